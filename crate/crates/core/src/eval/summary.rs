use serde::{Deserialize, Serialize};

use crate::text::Document;

/// Hard cap on selected sentences.
pub const MAX_SUMMARY_SENTENCES: usize = 3;
/// Standard word budget for a summary.
pub const SUMMARY_WORD_LIMIT: usize = 75;

/// An extracted summary: selected sentence indices in document order, the
/// rendered text, and its word count (always within the budget; a lone
/// over-long top sentence is truncated to fit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub indices: Vec<usize>,
    pub text: String,
    pub word_count: usize,
}

/// Rank sentences by score (ties prefer the earlier sentence), then greedily
/// take up to three, skipping any that would push the total past 75 words.
/// If the top-ranked sentence alone exceeds the budget before anything is
/// selected, it is taken truncated to 75 words. Output is in document order.
pub fn extract_summary(doc: &Document, scores: &[f64]) -> Summary {
    assert_eq!(
        scores.len(),
        doc.sentences.len(),
        "one score per sentence required"
    );
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are comparable")
            .then(a.cmp(&b))
    });
    select_by_rank(doc, &order)
}

/// The leading three sentences under the same word-budget policy.
pub fn lead_baseline(doc: &Document) -> Summary {
    let order: Vec<usize> = (0..doc.sentences.len()).collect();
    select_by_rank(doc, &order)
}

fn select_by_rank(doc: &Document, ranked: &[usize]) -> Summary {
    let mut selected: Vec<usize> = Vec::new();
    let mut total_words = 0;
    let mut truncated: Option<(usize, String, usize)> = None;
    for &index in ranked {
        let words = word_count(&doc.sentences[index]);
        if total_words + words <= SUMMARY_WORD_LIMIT {
            selected.push(index);
            total_words += words;
            if selected.len() == MAX_SUMMARY_SENTENCES {
                break;
            }
        } else if selected.is_empty() {
            let text = truncate_words(&doc.sentences[index], SUMMARY_WORD_LIMIT);
            truncated = Some((index, text, SUMMARY_WORD_LIMIT));
            break;
        }
    }
    if let Some((index, text, words)) = truncated {
        return Summary {
            indices: vec![index],
            text,
            word_count: words,
        };
    }
    selected.sort_unstable();
    let text = selected
        .iter()
        .map(|&i| doc.sentences[i].as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Summary {
        indices: selected,
        text,
        word_count: total_words,
    }
}

fn word_count(sentence: &str) -> usize {
    sentence.split_whitespace().count()
}

fn truncate_words(sentence: &str, limit: usize) -> String {
    sentence
        .split_whitespace()
        .take(limit)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc_with(sentences: Vec<String>) -> Document {
        Document {
            id: "t".to_string(),
            sentences,
            highlights: vec![],
            labels: None,
        }
    }

    fn words(n: usize, tag: &str) -> String {
        (0..n).map(|i| format!("{tag}{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn top_three_in_document_order() {
        let doc = doc_with((0..4).map(|i| words(10, &format!("s{i}w"))).collect());
        let summary = extract_summary(&doc, &[0.9, 0.1, 0.8, 0.7]);
        assert_eq!(summary.indices, vec![0, 2, 3]);
        assert_eq!(summary.word_count, 30);
        assert!(summary.text.starts_with("s0w0"));
    }

    #[test]
    fn one_sentence_document() {
        let doc = doc_with(vec![words(10, "w")]);
        let summary = extract_summary(&doc, &[0.4]);
        assert_eq!(summary.indices, vec![0]);
        assert_eq!(summary.word_count, 10);
    }

    #[test]
    fn equal_scores_take_first_fitting_sentences() {
        let doc = doc_with((0..5).map(|i| words(20, &format!("s{i}w"))).collect());
        let summary = extract_summary(&doc, &[0.5; 5]);
        assert_eq!(summary.indices, vec![0, 1, 2]);
    }

    #[test]
    fn over_budget_sentences_are_skipped() {
        let doc = doc_with(vec![
            words(40, "a"),
            words(50, "b"),
            words(30, "c"),
            words(5, "d"),
        ]);
        // Ranked: b (50), a (40), c (30), d (5). b fits; a would exceed 75;
        // c would exceed; d fits.
        let summary = extract_summary(&doc, &[0.8, 0.9, 0.7, 0.6]);
        assert_eq!(summary.indices, vec![1, 3]);
        assert_eq!(summary.word_count, 55);
    }

    #[test]
    fn lone_over_long_top_sentence_is_truncated() {
        let doc = doc_with(vec![words(80, "w"), words(10, "x")]);
        let summary = extract_summary(&doc, &[0.9, 0.1]);
        assert_eq!(summary.indices, vec![0]);
        assert_eq!(summary.word_count, 75);
        assert_eq!(summary.text.split_whitespace().count(), 75);
        assert!(summary.text.ends_with("w74"));
    }

    #[test]
    fn lead_takes_first_three() {
        let doc = doc_with((0..5).map(|i| words(8, &format!("s{i}w"))).collect());
        let summary = lead_baseline(&doc);
        assert_eq!(summary.indices, vec![0, 1, 2]);
    }

    #[test]
    fn lead_on_two_sentence_document_takes_both() {
        let doc = doc_with(vec![words(6, "a"), words(6, "b")]);
        let summary = lead_baseline(&doc);
        assert_eq!(summary.indices, vec![0, 1]);
    }

    #[test]
    fn lead_truncates_over_long_first_sentence() {
        let doc = doc_with(vec![words(80, "w"), words(10, "x")]);
        let summary = lead_baseline(&doc);
        assert_eq!(summary.indices, vec![0]);
        assert_eq!(summary.word_count, 75);
    }
}
