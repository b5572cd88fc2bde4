use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rouge::{normalize_tokens, score_summary, RougeFlags, RougeScores, RougeStat};
use super::summary::Summary;
use crate::text::{tokenize, Corpus, Document};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("document `{id}` has no highlights")]
    MissingHighlights { id: String },
    #[error("summarizer failed on document `{id}`: {message}")]
    Summarizer { id: String, message: String },
}

/// Scores for one document, ready for the machine-readable per-document file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentScore {
    pub id: String,
    pub scores: RougeScores,
}

/// Macro-averaged corpus result for one system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemScores {
    pub system: String,
    pub flags: RougeFlags,
    pub mean: RougeScores,
    pub per_document: Vec<DocumentScore>,
}

/// Score a summarizer over a corpus: each document's summary is tokenized,
/// normalized per the flags, and scored against the document's highlights
/// (clipped multi-reference ROUGE-1/2, best-reference ROUGE-L), then the
/// per-document scores are macro-averaged.
pub fn evaluate_corpus<F>(
    corpus: &Corpus,
    system: &str,
    flags: RougeFlags,
    mut summarize: F,
) -> Result<SystemScores, EvalError>
where
    F: FnMut(&Document) -> Result<Summary, String>,
{
    let mut per_document = Vec::with_capacity(corpus.len());
    for doc in &corpus.documents {
        if doc.highlights.is_empty() {
            return Err(EvalError::MissingHighlights { id: doc.id.clone() });
        }
        let summary = summarize(doc).map_err(|message| EvalError::Summarizer {
            id: doc.id.clone(),
            message,
        })?;
        let candidate = normalize_tokens(&tokenize(&summary.text), flags);
        let references: Vec<Vec<String>> = doc
            .highlights
            .iter()
            .map(|h| normalize_tokens(&tokenize(h), flags))
            .collect();
        per_document.push(DocumentScore {
            id: doc.id.clone(),
            scores: score_summary(&candidate, &references),
        });
    }
    Ok(SystemScores {
        system: system.to_string(),
        flags,
        mean: macro_average(per_document.iter().map(|d| &d.scores)),
        per_document,
    })
}

fn macro_average<'a>(scores: impl Iterator<Item = &'a RougeScores>) -> RougeScores {
    let mut total = RougeScores::default();
    let mut count = 0usize;
    for s in scores {
        add_stat(&mut total.rouge1, &s.rouge1);
        add_stat(&mut total.rouge2, &s.rouge2);
        add_stat(&mut total.rouge_l, &s.rouge_l);
        count += 1;
    }
    if count > 0 {
        let n = count as f64;
        for stat in [&mut total.rouge1, &mut total.rouge2, &mut total.rouge_l] {
            stat.recall /= n;
            stat.precision /= n;
            stat.f1 /= n;
        }
    }
    total
}

fn add_stat(acc: &mut RougeStat, s: &RougeStat) {
    acc.recall += s.recall;
    acc.precision += s.precision;
    acc.f1 += s.f1;
}

/// Tab-separated score table: a comment line recording the normalization
/// flags, a header, then one row per system with F1 percentages printed to
/// one decimal.
pub fn format_table(rows: &[&SystemScores]) -> String {
    let mut out = String::new();
    if let Some(first) = rows.first() {
        out.push_str(&format!("# rouge: {}\n", first.flags.describe()));
    }
    out.push_str("system\tROUGE-1\tROUGE-2\tROUGE-L\n");
    for row in rows {
        out.push_str(&format!(
            "{}\t{:.1}\t{:.1}\t{:.1}\n",
            row.system,
            row.mean.rouge1.f1 * 100.0,
            row.mean.rouge2.f1 * 100.0,
            row.mean.rouge_l.f1 * 100.0,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::summary::lead_baseline;

    fn doc(id: &str, sentences: &[&str], highlights: &[&str]) -> Document {
        Document {
            id: id.to_string(),
            sentences: sentences.iter().map(|s| s.to_string()).collect(),
            highlights: highlights.iter().map(|s| s.to_string()).collect(),
            labels: None,
        }
    }

    #[test]
    fn lead_equal_highlights_score_one() {
        let corpus = Corpus::new(
            Default::default(),
            vec![
                doc(
                    "a",
                    &["first words here", "second thing", "third part", "tail"],
                    &["first words here second thing third part"],
                ),
                doc("b", &["one lone sentence"], &["one lone sentence"]),
            ],
        );
        let result = evaluate_corpus(&corpus, "lead", RougeFlags::default(), |d| {
            Ok(lead_baseline(d))
        })
        .unwrap();
        for stat in [result.mean.rouge1, result.mean.rouge2, result.mean.rouge_l] {
            assert!((stat.f1 - 1.0).abs() < 1e-12, "{stat:?}");
        }
    }

    #[test]
    fn single_document_table_equals_its_scores() {
        let corpus = Corpus::new(
            Default::default(),
            vec![doc("a", &["alpha beta", "gamma"], &["alpha beta"])],
        );
        let result = evaluate_corpus(&corpus, "lead", RougeFlags::default(), |d| {
            Ok(lead_baseline(d))
        })
        .unwrap();
        assert_eq!(result.per_document.len(), 1);
        assert_eq!(result.mean, result.per_document[0].scores);
    }

    #[test]
    fn two_documents_average() {
        let corpus = Corpus::new(
            Default::default(),
            vec![
                doc("a", &["x y"], &["x y"]),
                doc("b", &["p q"], &["no overlap here"]),
            ],
        );
        let result = evaluate_corpus(&corpus, "lead", RougeFlags::default(), |d| {
            Ok(lead_baseline(d))
        })
        .unwrap();
        let a = &result.per_document[0].scores;
        let b = &result.per_document[1].scores;
        assert!((result.mean.rouge1.f1 - (a.rouge1.f1 + b.rouge1.f1) / 2.0).abs() < 1e-15);
        assert!((result.mean.rouge1.f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn missing_highlights_name_the_document() {
        let corpus = Corpus::new(Default::default(), vec![doc("naked", &["text"], &[])]);
        let err = evaluate_corpus(&corpus, "lead", RougeFlags::default(), |d| {
            Ok(lead_baseline(d))
        })
        .unwrap_err();
        assert!(matches!(err, EvalError::MissingHighlights { id } if id == "naked"));
    }

    #[test]
    fn table_formats_percentages_with_one_decimal() {
        let scores = SystemScores {
            system: "lead".to_string(),
            flags: RougeFlags::default(),
            mean: RougeScores {
                rouge1: RougeStat { recall: 0.0, precision: 0.0, f1: 0.43649 },
                rouge2: RougeStat { recall: 0.0, precision: 0.0, f1: 0.21 },
                rouge_l: RougeStat { recall: 0.0, precision: 0.0, f1: 0.402 },
            },
            per_document: vec![],
        };
        let table = format_table(&[&scores]);
        assert!(table.contains("# rouge: stemming=off stopwords=off"));
        assert!(table.contains("lead\t43.6\t21.0\t40.2"));
    }
}
