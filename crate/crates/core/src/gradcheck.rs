//! Central finite-difference oracles for the propagated gradients.
//!
//! Everything here goes through the forward engines only (`dca_run`,
//! `binary_run`, [`loss_value`]); none of it touches the propagation code it
//! is used to check.

use crate::automaton::{dca_run, Configuration, RuleTable, Topology};
use crate::binary::{binary_run, BinaryConfig, BinaryGradient, BinaryRule};
use crate::error::{DcaError, Result};
use crate::grad::ConfigGradient;
use crate::model::DcaRule;
use crate::optim::{loss_value, TargetSpec};

pub const FD_STEP: f64 = 1e-6;
pub const REL_TOL: f64 = 1e-5;
pub const ABS_FLOOR: f64 = 1e-8;

fn require_weights(w: Option<&[f64]>) -> Result<Vec<f64>> {
    w.map(<[f64]>::to_vec)
        .ok_or_else(|| DcaError::invalid("finite differences need a weight-parameterized rule"))
}

/// `(f(w + h e_j) − f(w − h e_j)) / 2h` for every weight `j`.
pub fn central_differences<F>(weights: &[f64], h: f64, mut f: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut w = weights.to_vec();
    let mut out = Vec::with_capacity(weights.len());
    for j in 0..weights.len() {
        w[j] = weights[j] + h;
        let plus = f(&w)?;
        w[j] = weights[j] - h;
        let minus = f(&w)?;
        w[j] = weights[j];
        out.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect());
    }
    Ok(out)
}

/// Finite-difference estimate of the final configuration gradient.
pub fn fd_config_gradient(
    rule: &RuleTable,
    config: &Configuration,
    topology: &Topology,
    steps: usize,
    h: f64,
) -> Result<ConfigGradient> {
    let weights = require_weights(rule.weights())?;
    let columns = central_differences(&weights, h, |w| {
        let r = RuleTable::from_weights(rule.k(), rule.arity(), w.to_vec())?;
        Ok(dca_run(&r, config, topology, steps)?[steps].probs().to_vec())
    })?;
    let mut out = ConfigGradient::zeros(config.ring_size(), rule.k(), rule.pattern_count());
    let nw = weights.len();
    let data = out.data_mut();
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            data[i * nw + j] = v;
        }
    }
    Ok(out)
}

/// Finite-difference estimate of `∂p(g)/∂w(y)` on the binary engine.
pub fn fd_binary_gradient(
    rule: &BinaryRule,
    config: &BinaryConfig,
    topology: &Topology,
    steps: usize,
    h: f64,
) -> Result<Vec<Vec<f64>>> {
    let weights = require_weights(rule.weights())?;
    let columns = central_differences(&weights, h, |w| {
        let r = BinaryRule::from_weights(rule.arity(), w.to_vec())?;
        Ok(binary_run(&r, config, topology, steps)?[steps].p_black().to_vec())
    })?;
    // Transpose to [cell][pattern].
    Ok((0..config.ring_size())
        .map(|g| columns.iter().map(|col| col[g]).collect())
        .collect())
}

/// Finite-difference estimate of `∇E` for one initial configuration.
pub fn fd_loss_gradient(
    rule: &DcaRule,
    initial: &Configuration,
    topology: &Topology,
    steps: usize,
    target: &TargetSpec,
    h: f64,
) -> Result<Vec<f64>> {
    let weights = require_weights(rule.weights())?;
    let mut probe = rule.clone();
    let columns = central_differences(&weights, h, |w| {
        probe.set_weights(w.to_vec())?;
        Ok(vec![loss_value(&probe, initial, topology, steps, target)?])
    })?;
    Ok(columns.into_iter().map(|c| c[0]).collect())
}

/// Agreement between an analytic and a numeric gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// Largest `|a − b| / max(|a|, |b|)` among entries with `|a − b| > abs_floor`.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub worst_index: Option<usize>,
    pub entries: usize,
}

impl Comparison {
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.max_rel_error < rel_tol
    }
}

/// Entry `i` passes when `|a − b| <= abs_floor` or `|a − b| <= rel_tol · max(|a|, |b|)`.
pub fn compare(analytic: &[f64], numeric: &[f64], abs_floor: f64) -> Result<Comparison> {
    crate::error::ensure_len("gradient comparison", analytic.len(), numeric.len())?;
    let mut cmp = Comparison {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst_index: None,
        entries: analytic.len(),
    };
    for (i, (&a, &b)) in analytic.iter().zip(numeric).enumerate() {
        let diff = (a - b).abs();
        if diff.is_nan() {
            cmp.max_rel_error = f64::INFINITY;
            cmp.worst_index = Some(i);
            continue;
        }
        cmp.max_abs_error = cmp.max_abs_error.max(diff);
        if diff <= abs_floor {
            continue;
        }
        let rel = diff / a.abs().max(b.abs());
        if rel > cmp.max_rel_error {
            cmp.max_rel_error = rel;
            cmp.worst_index = Some(i);
        }
    }
    Ok(cmp)
}

/// Flattens a binary gradient for [`compare`].
pub fn flatten_binary(grad: &BinaryGradient) -> Vec<f64> {
    grad.data().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_differences_of_quadratic() {
        let cols = central_differences(&[1.0, -2.0], 1e-4, |w| Ok(vec![w[0] * w[0] + 3.0 * w[1]])).unwrap();
        assert!((cols[0][0] - 2.0).abs() < 1e-8);
        assert!((cols[1][0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn compare_uses_floor_then_relative() {
        let c = compare(&[1.0, 1e-10, 0.5], &[1.0 + 1e-7, 3e-10, 0.5], ABS_FLOOR).unwrap();
        assert!((c.max_rel_error - 1e-7).abs() < 1e-9);
        assert_eq!(c.worst_index, Some(0));
        assert!(c.passes(REL_TOL));
        let bad = compare(&[1.0], &[1.1], ABS_FLOOR).unwrap();
        assert!(!bad.passes(REL_TOL));
        assert!(!compare(&[f64::NAN], &[0.0], ABS_FLOOR).unwrap().passes(REL_TOL));
    }

    #[test]
    fn needs_weights() {
        let rule = RuleTable::from_discrete(&crate::automaton::DiscreteRule::wolfram(30).unwrap());
        let t = Topology::elementary(4).unwrap();
        let x = Configuration::uniform(4, 2).unwrap();
        assert!(fd_config_gradient(&rule, &x, &t, 1, FD_STEP).is_err());
    }
}
