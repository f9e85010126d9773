use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rule::RuleTable;
use super::topology::Topology;
use crate::error::{ensure_len, DcaError, Result};

/// One step of the probabilistic CA: every cell draws its new symbol
/// independently from `ρ` of its (discrete) neighborhood.
pub fn pca_sample(rule: &RuleTable, state: &[usize], topology: &Topology, seed: u64) -> Result<Vec<usize>> {
    pca_sample_with(rule, state, topology, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// [`pca_sample`] drawing from a caller-owned generator.
pub fn pca_sample_with<R: Rng + ?Sized>(
    rule: &RuleTable,
    state: &[usize],
    topology: &Topology,
    rng: &mut R,
) -> Result<Vec<usize>> {
    ensure_len("state length", topology.ring_size(), state.len())?;
    ensure_len("rule arity vs memory set", topology.arity(), rule.arity())?;
    let k = rule.k();
    if let Some(bad) = state.iter().find(|&&s| s >= k) {
        return Err(DcaError::invalid(format!("state symbol {bad} >= k = {k}")));
    }
    Ok((0..state.len())
        .map(|g| {
            let code = topology.neighborhood(g).fold(0, |c, h| c * k + state[h]);
            sample_row(rule.row(code), rng.random::<f64>())
        })
        .collect())
}

/// Inverse-CDF draw with `u ∈ [0, 1)`. Zero-probability symbols are never
/// chosen, so delta rows always return their symbol.
fn sample_row(row: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last = 0;
    for (a, &p) in row.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last = a;
            if u < cum {
                return a;
            }
        }
    }
    last
}
