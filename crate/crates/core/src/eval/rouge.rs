use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Recall / precision / F1 triple for one ROUGE variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeStat {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl RougeStat {
    fn from_counts(matches: usize, reference_total: usize, candidate_total: usize) -> RougeStat {
        let recall = ratio(matches, reference_total);
        let precision = ratio(matches, candidate_total);
        RougeStat {
            recall,
            precision,
            f1: f1(precision, recall),
        }
    }
}

/// ROUGE-1, ROUGE-2, and ROUGE-L scores for one candidate summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScores {
    pub rouge1: RougeStat,
    pub rouge2: RougeStat,
    pub rouge_l: RougeStat,
}

/// Token normalization applied before scoring. Both switches default to off,
/// the least-processing choice.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RougeFlags {
    pub stemming: bool,
    pub stopwords: bool,
}

impl RougeFlags {
    pub fn describe(&self) -> String {
        format!(
            "stemming={} stopwords={}",
            if self.stemming { "on" } else { "off" },
            if self.stopwords { "on" } else { "off" }
        )
    }
}

/// Clipped n-gram overlap against the multiset union of the references:
/// each n-gram's reference count is its maximum count over the references,
/// and candidate matches are clipped to that. Zero denominators score zero.
pub fn rouge_n(candidate: &[String], references: &[Vec<String>], n: usize) -> RougeStat {
    assert!(n >= 1, "n-gram order must be at least 1");
    let cand_counts = ngram_counts(candidate, n);
    let mut union: HashMap<&[String], usize> = HashMap::new();
    for reference in references {
        for (gram, count) in ngram_counts(reference, n) {
            let slot = union.entry(gram).or_insert(0);
            *slot = (*slot).max(count);
        }
    }
    let candidate_total: usize = cand_counts.values().sum();
    let reference_total: usize = union.values().sum();
    let matches: usize = cand_counts
        .iter()
        .map(|(gram, &count)| count.min(union.get(gram).copied().unwrap_or(0)))
        .sum();
    RougeStat::from_counts(matches, reference_total, candidate_total)
}

/// Longest-common-subsequence score against a single reference.
pub fn rouge_l(candidate: &[String], reference: &[String]) -> RougeStat {
    let lcs = lcs_length(candidate, reference);
    RougeStat::from_counts(lcs, reference.len(), candidate.len())
}

/// Multi-reference ROUGE-L: score against each reference and keep the triple
/// with the highest F1 (ties keep the earliest reference).
pub fn rouge_l_multi(candidate: &[String], references: &[Vec<String>]) -> RougeStat {
    references
        .iter()
        .map(|reference| rouge_l(candidate, reference))
        .fold(RougeStat::default(), |best, stat| {
            if stat.f1 > best.f1 {
                stat
            } else {
                best
            }
        })
}

/// All three variants at once: ROUGE-1/2 with clipped multi-reference
/// counting, ROUGE-L as the best single-reference score.
pub fn score_summary(candidate: &[String], references: &[Vec<String>]) -> RougeScores {
    RougeScores {
        rouge1: rouge_n(candidate, references, 1),
        rouge2: rouge_n(candidate, references, 2),
        rouge_l: rouge_l_multi(candidate, references),
    }
}

/// Apply the configured normalization: stopword removal first, then
/// Snowball stemming.
pub fn normalize_tokens(tokens: &[String], flags: RougeFlags) -> Vec<String> {
    let mut out: Vec<String> = tokens.to_vec();
    if flags.stopwords {
        out.retain(|t| !STOPWORDS.contains(&t.as_str()));
    }
    if flags.stemming {
        let stemmer = rust_stemmers::Stemmer::create(rust_stemmers::Algorithm::English);
        out = out
            .into_iter()
            .map(|t| stemmer.stem(&t).into_owned())
            .collect();
    }
    out
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn lcs_length(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let cols = b.len() + 1;
    let mut previous = vec![0usize; cols];
    let mut current = vec![0usize; cols];
    for ai in a {
        for (j, bj) in b.iter().enumerate() {
            current[j + 1] = if ai == bj {
                previous[j] + 1
            } else {
                current[j].max(previous[j + 1])
            };
        }
        std::mem::swap(&mut previous, &mut current);
    }
    previous[b.len()]
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Short English stopword list used when `stopwords` is enabled.
const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "has", "have", "he",
    "her", "his", "i", "in", "into", "is", "it", "its", "of", "on", "or", "she", "that", "the",
    "their", "there", "they", "this", "to", "was", "were", "which", "will", "with", "you",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn identical_candidate_and_reference_score_one() {
        let t = toks("the quick brown fox");
        let s = rouge_n(&t, &[t.clone()], 1);
        assert_eq!(s, RougeStat { recall: 1.0, precision: 1.0, f1: 1.0 });
        let l = rouge_l(&t, &t);
        assert_eq!(l, RougeStat { recall: 1.0, precision: 1.0, f1: 1.0 });
    }

    #[test]
    fn unigram_counts_match_manual_arithmetic() {
        let cand = toks("the cat sat");
        let refs = vec![toks("the cat")];
        let s = rouge_n(&cand, &refs, 1);
        assert!((s.recall - 1.0).abs() < 1e-15);
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn disjoint_vocabularies_score_zero() {
        let s = rouge_n(&toks("aa bb"), &[toks("cc dd")], 1);
        assert_eq!(s, RougeStat::default());
        let l = rouge_l(&toks("aa bb"), &toks("cc dd"));
        assert_eq!(l, RougeStat::default());
    }

    #[test]
    fn bigram_clipping_counts_repeats_correctly() {
        // "go go go" has bigrams {go go: 2}; reference has one.
        let s = rouge_n(&toks("go go go"), &[toks("we go go")], 2);
        assert!((s.recall - 0.5).abs() < 1e-15);
        assert!((s.precision - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lcs_on_reordered_tokens() {
        let s = rouge_l(&toks("a b c d"), &toks("a c d b"));
        assert!((s.recall - 0.75).abs() < 1e-15);
        assert!((s.precision - 0.75).abs() < 1e-15);
    }

    #[test]
    fn empty_candidate_scores_zero() {
        let s = rouge_l(&[], &toks("a b"));
        assert_eq!(s, RougeStat::default());
        let n = rouge_n(&[], &[toks("a b")], 1);
        assert_eq!(n, RougeStat::default());
    }

    #[test]
    fn multi_reference_rouge_l_takes_the_best_f1() {
        let cand = toks("x y z");
        let refs = vec![toks("a b c"), toks("x y z w")];
        let s = rouge_l_multi(&cand, &refs);
        assert!((s.recall - 0.75).abs() < 1e-15);
        assert!((s.precision - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stopword_and_stemming_flags() {
        let tokens = toks("the running dogs");
        let plain = normalize_tokens(&tokens, RougeFlags::default());
        assert_eq!(plain, tokens);
        let removed = normalize_tokens(
            &tokens,
            RougeFlags { stopwords: true, stemming: false },
        );
        assert_eq!(removed, toks("running dogs"));
        let stemmed = normalize_tokens(
            &tokens,
            RougeFlags { stopwords: true, stemming: true },
        );
        assert_eq!(stemmed, toks("run dog"));
    }
}
