use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{tokenize, Corpus, TextError};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Token table with reserved PAD (0) and UNK (1) entries. Lookup of an
/// unseen token yields UNK, never an error.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    tokens: Vec<String>,
}

impl Vocabulary {
    /// Build from the non-reserved tokens, in id order.
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Vocabulary {
        let mut id_to_token = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        id_to_token.extend(tokens);
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            token_to_id,
            id_to_token,
        }
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> usize {
        self.token_to_id.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(String::as_str)
    }

    pub fn encode_tokens(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn encode_text(&self, text: &str) -> Vec<usize> {
        self.encode_tokens(&tokenize(text))
    }

    /// SHA-256 over the id-ordered token list; identifies the vocabulary in
    /// checkpoints.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for token in &self.id_to_token {
            hasher.update(token.as_bytes());
            hasher.update(b"\n");
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), TextError> {
        let file = VocabFile {
            tokens: self.id_to_token[2..].to_vec(),
        };
        let json = serde_json::to_string(&file).expect("vocabulary serializes");
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Vocabulary, TextError> {
        let raw = std::fs::read_to_string(path)?;
        let file: VocabFile =
            serde_json::from_str(&raw).map_err(|e| TextError::BadVocabFile(e.to_string()))?;
        Ok(Vocabulary::from_tokens(file.tokens))
    }
}

/// Keep the most frequent sentence tokens up to `max_size` entries including
/// the two reserved ids. Frequency ties break lexicographically.
pub fn build_vocab(corpus: &Corpus, max_size: usize) -> Result<Vocabulary, TextError> {
    if max_size <= 2 {
        return Err(TextError::VocabTooSmall { given: max_size });
    }
    if corpus.documents.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for doc in &corpus.documents {
        for sentence in &doc.sentences {
            for token in tokenize(sentence) {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_size - 2);
    Ok(Vocabulary::from_tokens(ranked.into_iter().map(|(t, _)| t)))
}
