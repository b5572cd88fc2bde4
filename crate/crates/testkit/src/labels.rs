/// Exhaustive counterpart of the greedy extractive-label oracle: tries every
/// subset of at most `budget` sentences and keeps the one whose concatenation
/// maximizes the mean of unigram and bigram F1 against `reference`.
///
/// Ties prefer fewer sentences, then the lexicographically smallest index
/// set. Returns one 0/1 label per sentence.
pub fn exhaustive_best_labels(
    sentences: &[Vec<String>],
    reference: &[String],
    budget: usize,
) -> Vec<u8> {
    let n = sentences.len();
    assert!(n <= 20, "exhaustive search is limited to 20 sentences");
    let mut best_indices: Vec<usize> = Vec::new();
    let mut best_score = 0.0;
    for mask in 0u32..(1 << n) {
        let indices: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if indices.is_empty() || indices.len() > budget {
            continue;
        }
        let candidate: Vec<&str> = indices
            .iter()
            .flat_map(|&i| sentences[i].iter().map(String::as_str))
            .collect();
        let reference: Vec<&str> = reference.iter().map(String::as_str).collect();
        let score =
            (ngram_f1(&candidate, &reference, 1) + ngram_f1(&candidate, &reference, 2)) / 2.0;
        let better = score > best_score
            || (score == best_score
                && !best_indices.is_empty()
                && (indices.len() < best_indices.len()
                    || (indices.len() == best_indices.len() && indices < best_indices)));
        if better {
            best_score = score;
            best_indices = indices;
        }
    }
    let mut labels = vec![0u8; n];
    if best_score > 0.0 {
        for i in best_indices {
            labels[i] = 1;
        }
    }
    labels
}

/// Clipped n-gram F1 against a single reference, counted by scanning.
fn ngram_f1(candidate: &[&str], reference: &[&str], n: usize) -> f64 {
    let cand = ngrams(candidate, n);
    let refr = ngrams(reference, n);
    if cand.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let mut matched = 0usize;
    let mut used = vec![false; refr.len()];
    for gram in &cand {
        if let Some(pos) = refr
            .iter()
            .enumerate()
            .position(|(j, r)| !used[j] && r == gram)
        {
            used[pos] = true;
            matched += 1;
        }
    }
    let precision = matched as f64 / cand.len() as f64;
    let recall = matched as f64 / refr.len() as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ngrams<'a>(tokens: &[&'a str], n: usize) -> Vec<Vec<&'a str>> {
    if tokens.len() < n {
        return Vec::new();
    }
    tokens.windows(n).map(|w| w.to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn exact_copy_wins_alone() {
        let sentences = vec![toks("rain in spain"), toks("dogs bark loudly")];
        let labels = exhaustive_best_labels(&sentences, &toks("rain in spain"), 3);
        assert_eq!(labels, vec![1, 0]);
    }

    #[test]
    fn two_disjoint_copies_both_selected() {
        let sentences = vec![
            toks("alpha beta gamma"),
            toks("delta epsilon zeta"),
            toks("noise words here"),
        ];
        let reference = toks("alpha beta gamma delta epsilon zeta");
        let labels = exhaustive_best_labels(&sentences, &reference, 3);
        assert_eq!(labels, vec![1, 1, 0]);
    }

    #[test]
    fn zero_overlap_selects_nothing() {
        let sentences = vec![toks("aa bb"), toks("cc dd")];
        let labels = exhaustive_best_labels(&sentences, &toks("xx yy zz"), 3);
        assert_eq!(labels, vec![0, 0]);
    }
}
