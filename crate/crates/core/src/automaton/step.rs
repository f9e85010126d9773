use super::distribution::{CellDistribution, Configuration, SIMPLEX_TOL};
use super::rule::RuleTable;
use super::topology::Topology;
use crate::error::{ensure_len, DcaError, Result};

/// `out(a) = Σ_y ρ(y)(a) Π_s x_s(y(s))`, summed over every pattern in code order.
pub(crate) fn local_into(rule: &RuleTable, neighborhood: &[&[f64]], out: &mut [f64]) {
    let digits = rule.digits();
    out.iter_mut().for_each(|o| *o = 0.0);
    for code in 0..digits.count() {
        let prod = digits
            .get(code)
            .iter()
            .zip(neighborhood)
            .fold(1.0, |acc, (&sym, cell)| acc * cell[sym]);
        for (o, &rho) in out.iter_mut().zip(rule.row(code)) {
            *o += rho * prod;
        }
    }
}

/// Replaces the most probable entry by one minus the others, after checking
/// that the directly computed mass agrees with it to [`SIMPLEX_TOL`].
///
/// Without this the simplex defect of a cell feeds into every neighbor and
/// grows geometrically with the number of steps. The result lies in `[0, 1]`
/// exactly and sums to one up to rounding.
fn settle(cell: usize, out: &mut [f64]) -> Result<()> {
    let sum: f64 = out.iter().sum();
    if !sum.is_finite() || out.iter().any(|p| !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(p)) {
        return Err(DcaError::SimplexViolation { cell, sum });
    }
    let top = (0..out.len()).fold(0, |m, a| if out[a] > out[m] { a } else { m });
    let rest: f64 = out.iter().enumerate().filter(|&(a, _)| a != top).map(|(_, p)| p).sum();
    if (out[top] - (1.0 - rest)).abs() > SIMPLEX_TOL {
        return Err(DcaError::SimplexViolation { cell, sum });
    }
    out[top] = 1.0 - rest;
    Ok(())
}

pub(crate) fn check_compatible(rule: &RuleTable, config: &Configuration, topology: &Topology) -> Result<()> {
    ensure_len("rule arity vs memory set", topology.arity(), rule.arity())?;
    ensure_len("alphabet size", rule.k(), config.k())?;
    ensure_len("configuration length", topology.ring_size(), config.ring_size())
}

/// DCA local map applied to one neighborhood (given in offset order).
pub fn dca_local(rule: &RuleTable, neighborhood: &[CellDistribution]) -> Result<CellDistribution> {
    ensure_len("neighborhood size", rule.arity(), neighborhood.len())?;
    for cell in neighborhood {
        ensure_len("neighborhood alphabet size", rule.k(), cell.k())?;
    }
    let cells: Vec<&[f64]> = neighborhood.iter().map(CellDistribution::probs).collect();
    let mut out = vec![0.0; rule.k()];
    local_into(rule, &cells, &mut out);
    settle(0, &mut out)?;
    Ok(CellDistribution::from_raw(out))
}

/// One synchronous DCA update. A cell whose computed mass is off by more
/// than [`SIMPLEX_TOL`] is an error; within that, the largest entry is set
/// to the complement of the others so rounding cannot accumulate.
pub fn dca_step(rule: &RuleTable, config: &Configuration, topology: &Topology) -> Result<Configuration> {
    check_compatible(rule, config, topology)?;
    let k = rule.k();
    let n = topology.ring_size();
    let mut probs = vec![0.0; n * k];
    let mut cells: Vec<&[f64]> = Vec::with_capacity(topology.arity());
    for (g, out) in probs.chunks_exact_mut(k).enumerate() {
        cells.clear();
        cells.extend(topology.neighborhood(g).map(|h| config.cell(h)));
        local_into(rule, &cells, out);
        settle(g, out)?;
    }
    Ok(Configuration::from_raw(k, probs))
}

/// `steps + 1` configurations, the first being `config` itself.
pub fn dca_run(
    rule: &RuleTable,
    config: &Configuration,
    topology: &Topology,
    steps: usize,
) -> Result<Vec<Configuration>> {
    check_compatible(rule, config, topology)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(config.clone());
    for t in 0..steps {
        let next = dca_step(rule, &out[t], topology)?;
        out.push(next);
    }
    Ok(out)
}
