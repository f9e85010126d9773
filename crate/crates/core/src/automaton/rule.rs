use super::pattern::{pattern_count, PatternDigits};
use super::topology::Topology;
use crate::error::{ensure_len, DcaError, Result};

/// Tolerance on `Σ ρ(y) = 1` for freshly built rule rows.
pub const ROW_TOL: f64 = 1e-12;

/// Deterministic local map `A^S -> A`, total over pattern codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteRule {
    k: usize,
    arity: usize,
    outputs: Vec<usize>,
}

impl DiscreteRule {
    pub fn new(k: usize, arity: usize, outputs: Vec<usize>) -> Result<Self> {
        if k < 2 || arity == 0 {
            return Err(DcaError::invalid("rule needs k >= 2 and arity >= 1"));
        }
        ensure_len("discrete rule outputs", pattern_count(k, arity)?, outputs.len())?;
        if let Some(bad) = outputs.iter().find(|&&o| o >= k) {
            return Err(DcaError::invalid(format!("output symbol {bad} >= k = {k}")));
        }
        Ok(Self { k, arity, outputs })
    }

    pub fn from_fn(k: usize, arity: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let digits = PatternDigits::new(k, arity)?;
        let outputs = (0..digits.count()).map(|c| f(digits.get(c))).collect();
        Self::new(k, arity, outputs)
    }

    /// Elementary CA in Wolfram's numbering: the output for pattern code `c`
    /// (left neighbor most significant, black = 1) is bit `c` of `number`.
    pub fn wolfram(number: u32) -> Result<Self> {
        if number > 255 {
            return Err(DcaError::invalid(format!(
                "Wolfram rule number {number} outside 0..=255"
            )));
        }
        let outputs = (0..8).map(|c| ((number >> c) & 1) as usize).collect();
        Self::new(2, 3, outputs)
    }

    /// Rule that copies the symbol at memory-set position `position`.
    pub fn identity(k: usize, arity: usize, position: usize) -> Result<Self> {
        if position >= arity {
            return Err(DcaError::invalid("identity position outside memory set"));
        }
        Self::from_fn(k, arity, |y| y[position])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    #[inline]
    pub fn output(&self, code: usize) -> usize {
        self.outputs[code]
    }

    /// Wolfram number, for binary radius-1 rules.
    pub fn wolfram_number(&self) -> Option<u32> {
        (self.k == 2 && self.arity == 3).then(|| {
            self.outputs
                .iter()
                .enumerate()
                .map(|(c, &o)| (o as u32) << c)
                .sum()
        })
    }
}

fn pattern_code_at(state: &[usize], k: usize, topology: &Topology, cell: usize) -> usize {
    topology
        .neighborhood(cell)
        .fold(0, |code, h| code * k + state[h])
}

/// One synchronous update of an ordinary CA.
pub fn discrete_step(rule: &DiscreteRule, state: &[usize], topology: &Topology) -> Result<Vec<usize>> {
    ensure_len("state length", topology.ring_size(), state.len())?;
    ensure_len("rule arity", topology.arity(), rule.arity())?;
    if let Some(bad) = state.iter().find(|&&s| s >= rule.k()) {
        return Err(DcaError::invalid(format!("state symbol {bad} >= k = {}", rule.k())));
    }
    Ok((0..state.len())
        .map(|g| rule.output(pattern_code_at(state, rule.k(), topology, g)))
        .collect())
}

/// `steps + 1` states starting with `state`.
pub fn discrete_run(
    rule: &DiscreteRule,
    state: &[usize],
    topology: &Topology,
    steps: usize,
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.to_vec());
    for t in 0..steps {
        let next = discrete_step(rule, &out[t], topology)?;
        out.push(next);
    }
    Ok(out)
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Rule of a DCA: one distribution `ρ(y)` per neighborhood pattern.
///
/// Usually `ρ = softmax(w(y))` for a weight matrix `w`. Rules built directly
/// from distributions (delta rows embedding an ordinary CA, or the hand-written
/// interpolation tables) carry no weights: their rows can contain exact zeros,
/// which no finite logit reaches.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable {
    digits: PatternDigits,
    weights: Option<Vec<f64>>,
    probs: Vec<f64>,
}

impl RuleTable {
    /// Softmax-parameterized rule; `weights[code * k + a] = w(y)(a)`.
    pub fn from_weights(k: usize, arity: usize, weights: Vec<f64>) -> Result<Self> {
        let digits = PatternDigits::new(k, arity)?;
        let mut rule = Self {
            probs: vec![0.0; digits.count() * k],
            digits,
            weights: None,
        };
        rule.set_weights(weights)?;
        Ok(rule)
    }

    /// All-zero weights, i.e. every row uniform.
    pub fn uniform(k: usize, arity: usize) -> Result<Self> {
        Self::from_weights(k, arity, vec![0.0; pattern_count(k, arity)? * k])
    }

    /// Rule given directly by its distributions (`probs[code * k + a]`).
    pub fn from_distributions(k: usize, arity: usize, probs: Vec<f64>) -> Result<Self> {
        let digits = PatternDigits::new(k, arity)?;
        ensure_len("rule distributions", digits.count() * k, probs.len())?;
        for (code, row) in probs.chunks_exact(k).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
                return Err(DcaError::invalid(format!("row {code} has entries outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOL {
                return Err(DcaError::invalid(format!("row {code} sums to {sum}")));
            }
        }
        Ok(Self {
            digits,
            weights: None,
            probs,
        })
    }

    /// Exact delta rows: the DCA then coincides with the ordinary CA.
    pub fn from_discrete(rule: &DiscreteRule) -> Self {
        let k = rule.k();
        let mut probs = vec![0.0; rule.outputs().len() * k];
        for (code, &o) in rule.outputs().iter().enumerate() {
            probs[code * k + o] = 1.0;
        }
        Self::from_distributions(k, rule.arity(), probs).expect("delta rows are valid")
    }

    /// Weight-space approximation of a discrete rule: logit `cap` on the output
    /// symbol and 0 elsewhere.
    pub fn from_discrete_capped(rule: &DiscreteRule, cap: f64) -> Result<Self> {
        let k = rule.k();
        let mut weights = vec![0.0; rule.outputs().len() * k];
        for (code, &o) in rule.outputs().iter().enumerate() {
            weights[code * k + o] = cap;
        }
        Self::from_weights(k, rule.arity(), weights)
    }

    /// Replaces the weights and recomputes every row.
    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        let k = self.k();
        ensure_len("rule weights", self.probs.len(), weights.len())?;
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(DcaError::invalid(format!("weight {i} is not finite")));
        }
        for (row, w) in self.probs.chunks_exact_mut(k).zip(weights.chunks_exact(k)) {
            row.copy_from_slice(&softmax(w));
        }
        self.weights = Some(weights);
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.digits.k()
    }

    pub fn arity(&self) -> usize {
        self.digits.arity()
    }

    pub fn pattern_count(&self) -> usize {
        self.digits.count()
    }

    pub fn digits(&self) -> &PatternDigits {
        &self.digits
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// All rows, flat.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn row(&self, code: usize) -> &[f64] {
        let k = self.k();
        &self.probs[code * k..(code + 1) * k]
    }

    /// Every row is a delta distribution.
    pub fn is_deterministic(&self) -> bool {
        self.probs
            .chunks_exact(self.k())
            .all(|row| row.iter().all(|&p| p == 0.0 || p == 1.0))
    }

    /// Ordinary CA choosing the most probable symbol of every row
    /// (ties to the lowest index).
    pub fn threshold(&self) -> DiscreteRule {
        let outputs = self
            .probs
            .chunks_exact(self.k())
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |b, (a, &p)| if p > b.1 { (a, p) } else { b })
                    .0
            })
            .collect();
        DiscreteRule::new(self.k(), self.arity(), outputs).expect("argmax is in range")
    }
}
