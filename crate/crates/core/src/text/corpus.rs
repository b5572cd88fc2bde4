use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{tokenize, TextError, Vocabulary};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Valid,
    Test,
}

/// One article: pre-split sentences, abstractive highlights, and (after
/// labeling) per-sentence binary extraction targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<String>,
    pub highlights: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u8>>,
}

impl Document {
    pub fn tokenized_sentences(&self) -> Vec<Vec<String>> {
        self.sentences.iter().map(|s| tokenize(s)).collect()
    }

    pub fn tokenized_highlights(&self) -> Vec<Vec<String>> {
        self.highlights.iter().map(|s| tokenize(s)).collect()
    }

    fn validate(&self) -> Result<(), String> {
        if self.sentences.is_empty() {
            return Err("document has no sentences".to_string());
        }
        for (i, sentence) in self.sentences.iter().enumerate() {
            if tokenize(sentence).is_empty() {
                return Err(format!("sentence {i} has no tokens"));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.sentences.len() {
                return Err(format!(
                    "{} labels for {} sentences",
                    labels.len(),
                    self.sentences.len()
                ));
            }
            if labels.iter().any(|&l| l > 1) {
                return Err("labels must be 0 or 1".to_string());
            }
        }
        Ok(())
    }

    /// Token ids per sentence, truncated to the configured caps. Documents
    /// longer than `max_sentences` keep only their first sentences.
    pub fn encode(
        &self,
        vocab: &Vocabulary,
        max_sentence_tokens: usize,
        max_sentences: usize,
    ) -> EncodedDocument {
        let sentences: Vec<Vec<usize>> = self
            .sentences
            .iter()
            .take(max_sentences)
            .map(|s| {
                let mut ids = vocab.encode_text(s);
                ids.truncate(max_sentence_tokens);
                ids
            })
            .collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| l.iter().copied().take(max_sentences).collect());
        EncodedDocument {
            id: self.id.clone(),
            sentences,
            labels,
        }
    }
}

/// Model-ready view of a document: token-id sequences plus optional labels.
#[derive(Debug, Clone)]
pub struct EncodedDocument {
    pub id: String,
    pub sentences: Vec<Vec<usize>>,
    pub labels: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub split: Split,
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn new(split: Split, documents: Vec<Document>) -> Corpus {
        Corpus { split, documents }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Read one JSON document record per line, validating every document
/// invariant. Malformed lines report their 1-based line number; duplicate
/// ids are rejected.
pub fn load_corpus(path: &Path) -> Result<Corpus, TextError> {
    let reader = BufReader::new(File::open(path)?);
    let mut documents = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let number = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| TextError::Parse {
            line: number,
            message: e.to_string(),
        })?;
        doc.validate().map_err(|message| TextError::Parse {
            line: number,
            message: format!("document `{}`: {message}", doc.id),
        })?;
        if !seen.insert(doc.id.clone()) {
            return Err(TextError::DuplicateId {
                line: number,
                id: doc.id,
            });
        }
        documents.push(doc);
    }
    Ok(Corpus {
        split: Split::default(),
        documents,
    })
}

/// Write the line-delimited record format read by [`load_corpus`]. Field
/// order is fixed, so rewriting an unchanged corpus is byte-identical.
pub fn save_corpus(path: &Path, corpus: &Corpus) -> Result<(), TextError> {
    let mut out = File::create(path)?;
    for doc in &corpus.documents {
        let json = serde_json::to_string(doc).expect("document serializes");
        writeln!(out, "{json}")?;
    }
    Ok(())
}
