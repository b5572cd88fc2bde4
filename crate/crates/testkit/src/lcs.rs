use crate::OracleError;

/// Longest list the exhaustive search will accept for its first argument.
pub const BRUTE_FORCE_LCS_MAX_LEN: usize = 8;

/// Length of the longest common subsequence of `a` and `b`, found by
/// enumerating every subsequence of `a` and testing it against `b`.
///
/// Exponential in `len(a)`, which is capped at [`BRUTE_FORCE_LCS_MAX_LEN`].
pub fn brute_force_lcs<T: PartialEq>(a: &[T], b: &[T]) -> Result<usize, OracleError> {
    if a.len() > BRUTE_FORCE_LCS_MAX_LEN {
        return Err(OracleError::InputTooLong {
            len: a.len(),
            max: BRUTE_FORCE_LCS_MAX_LEN,
        });
    }
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let picked: Vec<&T> = a
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, t)| t)
            .collect();
        if picked.len() > best && is_subsequence(&picked, b) {
            best = picked.len();
        }
    }
    Ok(best)
}

fn is_subsequence<T: PartialEq>(needle: &[&T], haystack: &[T]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|want| it.any(|have| have == *want))
}
