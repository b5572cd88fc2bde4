//! Tokenization, vocabulary construction, corpus IO, extractive gold-label
//! derivation, and a synthetic desk-scale corpus generator.

mod corpus;
mod labels;
pub mod synthetic;
mod vocab;

pub use corpus::{load_corpus, save_corpus, Corpus, Document, EncodedDocument, Split};
pub use labels::derive_labels;
pub use vocab::{build_vocab, Vocabulary, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate document id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("document `{id}`: {message}")]
    InvalidDocument { id: String, message: String },
    #[error("document `{id}` has no highlights")]
    NoHighlights { id: String },
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("vocabulary size {given} is too small; need room for PAD and UNK plus at least one token")]
    VocabTooSmall { given: usize },
    #[error("vocabulary file is malformed: {0}")]
    BadVocabFile(String),
}

/// Lowercased, whitespace- and punctuation-delimited tokens. Every
/// punctuation character becomes its own single-character token; empty text
/// yields an empty list. Deterministic across runs and platforms.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            word.extend(ch.to_lowercase());
        } else {
            if !word.is_empty() {
                tokens.push(std::mem::take(&mut word));
            }
            if !ch.is_whitespace() {
                tokens.push(ch.to_lowercase().collect());
            }
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}
