//! Forward-mode propagation of configuration gradients.
//!
//! The gradient of `τ^{t+1}(x)` with respect to every rule weight `w(y')(a')`
//! is computed from `τ^t(x)` and its gradient only:
//!
//! ```text
//! ∂x'(g)(a)/∂w(y')(a') = ρ(y')(a)(δ(a,a') − ρ(y')(a')) Π_s x(g+s)(y'(s))
//!                      + Σ_y ρ(y)(a) Σ_s ∂x(g+s)(y(s))/∂w(y')(a') Π_{s'≠s} x(g+s')(y(s'))
//! ```
//!
//! The seed configuration does not depend on the weights, so propagation
//! starts from a zero gradient.

use crate::automaton::{CellDistribution, Configuration, RuleTable, Topology};
use crate::automaton::{check_compatible, dca_step, SIMPLEX_TOL};
use crate::error::{ensure_len, Result};

/// `∂x(g)(a)/∂w(y')(a')` for every cell, symbol and weight.
///
/// Stored as `data[(g * k + a) * W + (y' * k + a')]` with `W = patterns * k`, so
/// the inner block for a fixed `(g, a)` has the same layout as the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigGradient {
    ring_size: usize,
    k: usize,
    patterns: usize,
    data: Vec<f64>,
}

impl ConfigGradient {
    pub fn zeros(ring_size: usize, k: usize, patterns: usize) -> Self {
        Self {
            ring_size,
            k,
            patterns,
            data: vec![0.0; ring_size * k * patterns * k],
        }
    }

    /// Zero gradient shaped for `rule` acting on `config`.
    pub fn zeros_for(rule: &RuleTable, config: &Configuration) -> Self {
        Self::zeros(config.ring_size(), rule.k(), rule.pattern_count())
    }

    pub fn ring_size(&self) -> usize {
        self.ring_size
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn patterns(&self) -> usize {
        self.patterns
    }

    /// Number of weights, `patterns * k`.
    pub fn weight_count(&self) -> usize {
        self.patterns * self.k
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, cell: usize, symbol: usize, pattern: usize, weight_symbol: usize) -> f64 {
        self.block(cell, symbol)[pattern * self.k + weight_symbol]
    }

    /// Derivatives of `x(cell)(symbol)` with respect to all weights.
    #[inline]
    pub fn block(&self, cell: usize, symbol: usize) -> &[f64] {
        let w = self.weight_count();
        let start = (cell * self.k + symbol) * w;
        &self.data[start..start + w]
    }

    /// Largest `|Σ_a ∂x(g)(a)/∂w|` over cells and weights. Zero in exact
    /// arithmetic because every cell stays normalized.
    pub fn zero_sum_residual(&self) -> f64 {
        let w = self.weight_count();
        let mut worst: f64 = 0.0;
        for g in 0..self.ring_size {
            for j in 0..w {
                let s: f64 = (0..self.k).map(|a| self.block(g, a)[j]).sum();
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    fn check_shape(&self, rule: &RuleTable, config: &Configuration) -> Result<()> {
        ensure_len("gradient ring size", config.ring_size(), self.ring_size)?;
        ensure_len("gradient alphabet size", rule.k(), self.k)?;
        ensure_len("gradient pattern count", rule.pattern_count(), self.patterns)
    }
}

/// `J[a][a'] = ρ(a)(δ(a, a') − ρ(a'))`, the Jacobian of softmax at the logits
/// producing `row`.
pub fn softmax_jacobian(row: &CellDistribution) -> Vec<Vec<f64>> {
    let p = row.probs();
    p.iter()
        .enumerate()
        .map(|(a, &pa)| {
            p.iter()
                .enumerate()
                .map(|(b, &pb)| pa * (if a == b { 1.0 } else { 0.0 } - pb))
                .collect()
        })
        .collect()
}

/// Advances the configuration and its weight gradient by one step.
///
/// The returned configuration is exactly [`dca_step`]'s output.
pub fn grad_step(
    rule: &RuleTable,
    config: &Configuration,
    grad: &ConfigGradient,
    topology: &Topology,
) -> Result<(Configuration, ConfigGradient)> {
    let next = dca_step(rule, config, topology)?;
    grad.check_shape(rule, config)?;

    let k = rule.k();
    let digits = rule.digits();
    let patterns = digits.count();
    let w = grad.weight_count();
    let mut out = ConfigGradient::zeros(config.ring_size(), k, patterns);

    let mut neighbors: Vec<usize> = Vec::with_capacity(topology.arity());
    for g in 0..config.ring_size() {
        neighbors.clear();
        neighbors.extend(topology.neighborhood(g));
        let cell_block = &mut out.data[g * k * w..(g + 1) * k * w];

        for code in 0..patterns {
            let y = digits.get(code);
            let rho = rule.row(code);

            // Direct term: only row `code` depends on w(code)(·).
            let prod = y
                .iter()
                .zip(&neighbors)
                .fold(1.0, |acc, (&sym, &h)| acc * config.prob(h, sym));
            for a in 0..k {
                let dst = &mut cell_block[a * w + code * k..a * w + (code + 1) * k];
                for (b, d) in dst.iter_mut().enumerate() {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    *d += rho[a] * (delta - rho[b]) * prod;
                }
            }

            // Chain term through each neighbor's previous gradient. The
            // leave-one-out product is rebuilt explicitly: delta cells make
            // dividing the full product 0/0.
            for s in 0..y.len() {
                let others = y
                    .iter()
                    .zip(&neighbors)
                    .enumerate()
                    .filter(|&(j, _)| j != s)
                    .fold(1.0, |acc, (_, (&sym, &h))| acc * config.prob(h, sym));
                if others == 0.0 {
                    continue;
                }
                let src = grad.block(neighbors[s], y[s]);
                for a in 0..k {
                    let c = rho[a] * others;
                    if c == 0.0 {
                        continue;
                    }
                    for (d, &v) in cell_block[a * w..(a + 1) * w].iter_mut().zip(src) {
                        *d += c * v;
                    }
                }
            }
        }
    }
    Ok((next, out))
}

/// Runs `steps` updates from `config` with `∇x = 0`, returning every
/// configuration and every gradient (`steps + 1` of each).
pub fn grad_trajectory(
    rule: &RuleTable,
    config: &Configuration,
    topology: &Topology,
    steps: usize,
) -> Result<(Vec<Configuration>, Vec<ConfigGradient>)> {
    check_compatible(rule, config, topology)?;
    let mut configs = Vec::with_capacity(steps + 1);
    let mut grads = Vec::with_capacity(steps + 1);
    configs.push(config.clone());
    grads.push(ConfigGradient::zeros_for(rule, config));
    for t in 0..steps {
        let (x, dx) = grad_step(rule, &configs[t], &grads[t], topology)?;
        configs.push(x);
        grads.push(dx);
    }
    Ok((configs, grads))
}

/// Runs `steps` updates from `config` with `∇x = 0`, returning all
/// configurations and the final gradient.
pub fn grad_run(
    rule: &RuleTable,
    config: &Configuration,
    topology: &Topology,
    steps: usize,
) -> Result<(Vec<Configuration>, ConfigGradient)> {
    check_compatible(rule, config, topology)?;
    let mut configs = Vec::with_capacity(steps + 1);
    configs.push(config.clone());
    let mut grad = ConfigGradient::zeros_for(rule, config);
    for t in 0..steps {
        let (x, dx) = grad_step(rule, &configs[t], &grad, topology)?;
        configs.push(x);
        grad = dx;
    }
    Ok((configs, grad))
}

/// Zero-sum tolerance for propagated gradients.
pub const ZERO_SUM_TOL: f64 = SIMPLEX_TOL;
