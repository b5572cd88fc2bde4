use super::{Document, TextError};
use crate::eval::rouge::rouge_n;

/// Budget of the greedy label oracle, matching the summary-extraction policy.
pub const ORACLE_BUDGET: usize = 3;

/// Greedy extractive gold labels: starting from the empty selection,
/// repeatedly add the sentence that maximally increases the mean of unigram
/// and bigram F1 against the concatenated highlights, stopping when nothing
/// strictly improves the score or three sentences are selected. The selected
/// sentences get label 1.
pub fn derive_labels(doc: &Document) -> Result<Vec<u8>, TextError> {
    if doc.highlights.is_empty() {
        return Err(TextError::NoHighlights { id: doc.id.clone() });
    }
    let sentences = doc.tokenized_sentences();
    let reference: Vec<String> = doc.tokenized_highlights().into_iter().flatten().collect();
    let mut labels = vec![0u8; sentences.len()];
    for (index, _) in greedy_selection(&sentences, &reference) {
        labels[index] = 1;
    }
    Ok(labels)
}

/// The greedy picks in selection order, each with the score reached after
/// adding it. Scores are non-decreasing by construction.
pub(crate) fn greedy_selection(
    sentences: &[Vec<String>],
    reference: &[String],
) -> Vec<(usize, f64)> {
    let refs = [reference.to_vec()];
    let mut selected: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut current_score = 0.0;
    while selected.len() < ORACLE_BUDGET {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..sentences.len() {
            if selected.contains(&i) {
                continue;
            }
            let mut trial = selected.clone();
            trial.push(i);
            trial.sort_unstable();
            let score = selection_score(sentences, &refs, &trial);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        match best {
            Some((i, score)) if score > current_score => {
                selected.push(i);
                current_score = score;
                trace.push((i, score));
            }
            _ => break,
        }
    }
    trace
}

/// Mean of ROUGE-1 and ROUGE-2 F1 for the selection, concatenated in
/// document order, against the concatenated highlights.
fn selection_score(sentences: &[Vec<String>], refs: &[Vec<String>], selection: &[usize]) -> f64 {
    let candidate: Vec<String> = selection
        .iter()
        .flat_map(|&i| sentences[i].iter().cloned())
        .collect();
    (rouge_n(&candidate, refs, 1).f1 + rouge_n(&candidate, refs, 2).f1) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(sentences: &[&str], highlights: &[&str]) -> Document {
        Document {
            id: "t".to_string(),
            sentences: sentences.iter().map(|s| s.to_string()).collect(),
            highlights: highlights.iter().map(|s| s.to_string()).collect(),
            labels: None,
        }
    }

    #[test]
    fn exact_match_dominates() {
        let d = doc(
            &["one thing here", "the gold sentence exactly", "noise"],
            &["the gold sentence exactly"],
        );
        assert_eq!(derive_labels(&d).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn two_disjoint_copies_are_both_selected() {
        let d = doc(
            &[
                "alpha beta gamma",
                "totally unrelated words",
                "delta epsilon zeta",
            ],
            &["alpha beta gamma", "delta epsilon zeta"],
        );
        assert_eq!(derive_labels(&d).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn zero_overlap_yields_all_zeros() {
        let d = doc(&["aa bb cc", "dd ee ff"], &["xx yy zz"]);
        assert_eq!(derive_labels(&d).unwrap(), vec![0, 0]);
    }

    #[test]
    fn missing_highlights_is_an_error() {
        let d = doc(&["something"], &[]);
        assert!(matches!(
            derive_labels(&d),
            Err(TextError::NoHighlights { .. })
        ));
    }

    #[test]
    fn at_most_three_sentences_are_selected() {
        let d = doc(
            &["aa bb", "cc dd", "ee ff", "gg hh", "ii jj"],
            &["aa bb cc dd ee ff gg hh ii jj"],
        );
        let labels = derive_labels(&d).unwrap();
        assert_eq!(labels.iter().map(|&l| l as usize).sum::<usize>(), 3);
    }

    #[test]
    fn greedy_score_is_monotone_over_steps() {
        let d = doc(
            &["aa bb cc", "dd ee", "aa dd", "ff gg"],
            &["aa bb cc dd ee"],
        );
        let sentences = d.tokenized_sentences();
        let reference: Vec<String> = d.tokenized_highlights().into_iter().flatten().collect();
        let trace = greedy_selection(&sentences, &reference);
        assert!(!trace.is_empty());
        let mut previous = 0.0;
        for (_, score) in trace {
            assert!(score >= previous);
            previous = score;
        }
    }
}
