//! Deliberately slow reference implementations used to cross-check the fast
//! paths in `memsum-core`: loop-based model fragments, brute-force common
//! subsequence search, exhaustive label-subset search, and central
//! finite-difference differentiation.
//!
//! Nothing in this crate shares code with the main numerical path; the
//! duplication is the point. Everything here favors obviousness over speed
//! and is only meant to run on toy-sized inputs.

mod finite_diff;
mod labels;
mod lcs;
pub mod scalar;

pub use finite_diff::{finite_diff_grad, max_rel_err, rel_err, FiniteDiffConfig};
pub use labels::exhaustive_best_labels;
pub use lcs::{brute_force_lcs, BRUTE_FORCE_LCS_MAX_LEN};
pub use scalar::{scalar_forward, FragmentCase, FragmentOutput};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("function evaluation produced a non-finite value at coordinate {index}")]
    NonFinite { index: usize },
    #[error("input of length {len} exceeds the exhaustive bound of {max}")]
    InputTooLong { len: usize, max: usize },
    #[error("unknown fragment id `{0}`")]
    UnknownFragment(String),
    #[error("fragment `{fragment}` is missing `{field}` in its case")]
    IncompleteCase {
        fragment: &'static str,
        field: &'static str,
    },
}
