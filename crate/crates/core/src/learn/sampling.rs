use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Balances classes by appending with-replacement copies of minority rows.
///
/// The original rows are kept in order; copies follow. An already balanced
/// input comes back unchanged.
pub fn upsample_minority(rows: &[usize], positive: &[bool], seed: u64) -> Result<Vec<usize>> {
    let pos: Vec<usize> = rows.iter().copied().filter(|&r| positive[r]).collect();
    let neg: Vec<usize> = rows.iter().copied().filter(|&r| !positive[r]).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InvalidInput("up-sampling needs both classes".into()));
    }
    let deficit = pos.len().abs_diff(neg.len());
    let minority = if pos.len() < neg.len() { pos } else { neg };
    let mut rng = rng_for(seed, "upsample");
    let mut out = rows.to_vec();
    out.reserve(deficit);
    for _ in 0..deficit {
        out.push(minority[rng.random_range(0..minority.len())]);
    }
    Ok(out)
}
