//! ROUGE scoring, the summary-extraction policy, the LEAD baseline, and
//! corpus-level evaluation tables.

mod corpus_eval;
pub mod rouge;
mod summary;

pub use corpus_eval::{evaluate_corpus, format_table, DocumentScore, EvalError, SystemScores};
pub use rouge::{
    normalize_tokens, rouge_l, rouge_l_multi, rouge_n, score_summary, RougeFlags, RougeScores,
    RougeStat,
};
pub use summary::{
    extract_summary, lead_baseline, Summary, MAX_SUMMARY_SENTENCES, SUMMARY_WORD_LIMIT,
};
