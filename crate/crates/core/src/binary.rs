//! Two-symbol fast path: one probability `P(■)` per cell and one sigmoid
//! logit per neighborhood pattern.
//!
//! The bridge to the general engine pins the `□` logit to zero:
//! `w_general(y) = [0, w_binary(y)]`, so `softmax(w_general(y))[■] =
//! sigmoid(w_binary(y))` and `∂p/∂w_binary(y) = ∂x(■)/∂w_general(y)(■)`.

use crate::automaton::{Configuration, DiscreteRule, PatternDigits, RuleTable, Topology};
use crate::error::{ensure_len, DcaError, Result};

/// Slack allowed on the `[0, 1]` range of binary outputs.
pub const RANGE_TOL: f64 = 1e-12;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `⟨x, y⟩ = x y + (1 − x)(1 − y)`: probability that a cell with `P(■) = x`
/// shows bit `y`.
#[inline]
pub fn pair(x: f64, y: bool) -> f64 {
    if y {
        x
    } else {
        1.0 - x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryRule {
    digits: PatternDigits,
    weights: Option<Vec<f64>>,
    probs: Vec<f64>,
}

impl BinaryRule {
    pub fn from_weights(arity: usize, weights: Vec<f64>) -> Result<Self> {
        let digits = PatternDigits::new(2, arity)?;
        let mut rule = Self {
            probs: vec![0.0; digits.count()],
            digits,
            weights: None,
        };
        rule.set_weights(weights)?;
        Ok(rule)
    }

    pub fn zeros(arity: usize) -> Result<Self> {
        let count = PatternDigits::new(2, arity)?.count();
        Self::from_weights(arity, vec![0.0; count])
    }

    /// Rule given by `ρ(y) = P(■)` directly; entries may be exactly 0 or 1.
    pub fn from_probs(arity: usize, probs: Vec<f64>) -> Result<Self> {
        let digits = PatternDigits::new(2, arity)?;
        ensure_len("binary rule probabilities", digits.count(), probs.len())?;
        if let Some(i) = probs.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(DcaError::invalid(format!("probability {i} outside [0, 1]")));
        }
        Ok(Self {
            digits,
            weights: None,
            probs,
        })
    }

    pub fn from_discrete(rule: &DiscreteRule) -> Result<Self> {
        ensure_len("alphabet size", 2, rule.k())?;
        Self::from_probs(rule.arity(), rule.outputs().iter().map(|&o| o as f64).collect())
    }

    /// Saturated logits `±cap` approximating a discrete rule.
    pub fn from_discrete_capped(rule: &DiscreteRule, cap: f64) -> Result<Self> {
        ensure_len("alphabet size", 2, rule.k())?;
        let weights = rule
            .outputs()
            .iter()
            .map(|&o| if o == 1 { cap } else { -cap })
            .collect();
        Self::from_weights(rule.arity(), weights)
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        ensure_len("binary rule weights", self.probs.len(), weights.len())?;
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(DcaError::invalid(format!("weight {i} is not finite")));
        }
        for (p, &w) in self.probs.iter_mut().zip(&weights) {
            *p = sigmoid(w);
        }
        self.weights = Some(weights);
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.digits.arity()
    }

    pub fn pattern_count(&self) -> usize {
        self.digits.count()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn is_deterministic(&self) -> bool {
        self.probs.iter().all(|&p| p == 0.0 || p == 1.0)
    }

    /// `ρ(y) >= 0.5 → ■`.
    pub fn threshold(&self) -> DiscreteRule {
        let outputs = self.probs.iter().map(|&p| usize::from(p >= 0.5)).collect();
        DiscreteRule::new(2, self.arity(), outputs).expect("binary outputs are in range")
    }

    /// Equivalent general rule under the `[0, w]` logit bridge.
    pub fn to_rule_table(&self) -> RuleTable {
        let arity = self.arity();
        match &self.weights {
            Some(w) => {
                let logits = w.iter().flat_map(|&w| [0.0, w]).collect();
                RuleTable::from_weights(2, arity, logits).expect("finite weights")
            }
            None => {
                let probs = self.probs.iter().flat_map(|&p| [1.0 - p, p]).collect();
                RuleTable::from_distributions(2, arity, probs).expect("valid probabilities")
            }
        }
    }
}

/// `P(■)` per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryConfig {
    p_black: Vec<f64>,
}

impl BinaryConfig {
    pub fn new(p_black: Vec<f64>) -> Result<Self> {
        if p_black.is_empty() {
            return Err(DcaError::invalid("configuration needs at least one cell"));
        }
        if let Some(g) = p_black.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(DcaError::invalid(format!("cell {g} probability outside [0, 1]")));
        }
        Ok(Self { p_black })
    }

    pub fn from_states(states: &[usize]) -> Result<Self> {
        if let Some(bad) = states.iter().find(|&&s| s > 1) {
            return Err(DcaError::invalid(format!("binary state contains symbol {bad}")));
        }
        Self::new(states.iter().map(|&s| s as f64).collect())
    }

    /// Takes `P(■)` (symbol 1) of a two-symbol configuration.
    pub fn from_configuration(config: &Configuration) -> Result<Self> {
        ensure_len("alphabet size", 2, config.k())?;
        Ok(Self {
            p_black: config.symbol_probs(1),
        })
    }

    pub fn to_configuration(&self) -> Result<Configuration> {
        Configuration::from_black_probs(&self.p_black)
    }

    pub fn ring_size(&self) -> usize {
        self.p_black.len()
    }

    pub fn p_black(&self) -> &[f64] {
        &self.p_black
    }
}

/// `∂p(g)/∂w(y')`, row-major `ring_size × patterns`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryGradient {
    ring_size: usize,
    patterns: usize,
    data: Vec<f64>,
}

impl BinaryGradient {
    pub fn zeros(ring_size: usize, patterns: usize) -> Self {
        Self {
            ring_size,
            patterns,
            data: vec![0.0; ring_size * patterns],
        }
    }

    pub fn ring_size(&self) -> usize {
        self.ring_size
    }

    pub fn patterns(&self) -> usize {
        self.patterns
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, cell: usize) -> &[f64] {
        &self.data[cell * self.patterns..(cell + 1) * self.patterns]
    }

    #[inline]
    pub fn get(&self, cell: usize, pattern: usize) -> f64 {
        self.data[cell * self.patterns + pattern]
    }
}

fn check(rule: &BinaryRule, config: &BinaryConfig, topology: &Topology) -> Result<()> {
    ensure_len("rule arity vs memory set", topology.arity(), rule.arity())?;
    ensure_len("configuration length", topology.ring_size(), config.ring_size())
}

fn bits(digits: &[usize]) -> impl Iterator<Item = bool> + '_ {
    digits.iter().map(|&d| d == 1)
}

fn check_range(cell: usize, p: f64) -> Result<()> {
    if (-RANGE_TOL..=1.0 + RANGE_TOL).contains(&p) {
        Ok(())
    } else {
        Err(DcaError::SimplexViolation { cell, sum: p })
    }
}

fn local(rule: &BinaryRule, x: &[f64], neighbors: &[usize]) -> f64 {
    let mut out = 0.0;
    for code in 0..rule.pattern_count() {
        let prod = bits(rule.digits.get(code))
            .zip(neighbors)
            .fold(1.0, |acc, (b, &h)| acc * pair(x[h], b));
        out += rule.probs[code] * prod;
    }
    out
}

/// `μ(x) = Σ_y ρ(y) Π_s ⟨x(s), y(s)⟩` at every cell. No clamping: outputs
/// are in `[0, 1]` analytically and checked within [`RANGE_TOL`].
pub fn binary_step(rule: &BinaryRule, config: &BinaryConfig, topology: &Topology) -> Result<BinaryConfig> {
    check(rule, config, topology)?;
    let mut neighbors = Vec::with_capacity(topology.arity());
    let mut out = Vec::with_capacity(config.ring_size());
    for g in 0..config.ring_size() {
        neighbors.clear();
        neighbors.extend(topology.neighborhood(g));
        let p = local(rule, &config.p_black, &neighbors);
        check_range(g, p)?;
        out.push(p);
    }
    Ok(BinaryConfig { p_black: out })
}

pub fn binary_run(
    rule: &BinaryRule,
    config: &BinaryConfig,
    topology: &Topology,
    steps: usize,
) -> Result<Vec<BinaryConfig>> {
    check(rule, config, topology)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(config.clone());
    for t in 0..steps {
        let next = binary_step(rule, &out[t], topology)?;
        out.push(next);
    }
    Ok(out)
}

/// One step of value and gradient:
///
/// ```text
/// ∂μ/∂w(y') = ρ(y')(1 − ρ(y')) Π_s ⟨x(s), y'(s)⟩
///           + Σ_y ρ(y) Σ_s (2y(s) − 1) ∂x(s)/∂w(y') Π_{s'≠s} ⟨x(s'), y(s')⟩
/// ```
pub fn binary_grad_step(
    rule: &BinaryRule,
    config: &BinaryConfig,
    grad: &BinaryGradient,
    topology: &Topology,
) -> Result<(BinaryConfig, BinaryGradient)> {
    let next = binary_step(rule, config, topology)?;
    ensure_len("gradient ring size", config.ring_size(), grad.ring_size)?;
    ensure_len("gradient pattern count", rule.pattern_count(), grad.patterns)?;

    let patterns = rule.pattern_count();
    let x = &config.p_black;
    let mut out = BinaryGradient::zeros(config.ring_size(), patterns);
    let mut neighbors = Vec::with_capacity(topology.arity());
    let mut pairs = vec![0.0; topology.arity()];

    for g in 0..config.ring_size() {
        neighbors.clear();
        neighbors.extend(topology.neighborhood(g));
        let dst = &mut out.data[g * patterns..(g + 1) * patterns];
        for code in 0..patterns {
            let y = rule.digits.get(code);
            for ((p, b), &h) in pairs.iter_mut().zip(bits(y)).zip(&neighbors) {
                *p = pair(x[h], b);
            }
            let rho = rule.probs[code];
            let prod: f64 = pairs.iter().product();
            dst[code] += rho * (1.0 - rho) * prod;

            for s in 0..pairs.len() {
                let others = pairs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != s)
                    .fold(1.0, |acc, (_, &p)| acc * p);
                let sign = if y[s] == 1 { 1.0 } else { -1.0 };
                let c = rho * others * sign;
                if c == 0.0 {
                    continue;
                }
                for (d, &v) in dst.iter_mut().zip(grad.row(neighbors[s])) {
                    *d += c * v;
                }
            }
        }
    }
    Ok((next, out))
}

/// Propagates from a zero gradient; returns all configurations and the final
/// gradient.
pub fn binary_grad_run(
    rule: &BinaryRule,
    config: &BinaryConfig,
    topology: &Topology,
    steps: usize,
) -> Result<(Vec<BinaryConfig>, BinaryGradient)> {
    check(rule, config, topology)?;
    let mut configs = Vec::with_capacity(steps + 1);
    configs.push(config.clone());
    let mut grad = BinaryGradient::zeros(config.ring_size(), rule.pattern_count());
    for t in 0..steps {
        let (x, dx) = binary_grad_step(rule, &configs[t], &grad, topology)?;
        configs.push(x);
        grad = dx;
    }
    Ok((configs, grad))
}
