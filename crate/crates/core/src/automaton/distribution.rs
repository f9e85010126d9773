use crate::error::{ensure_len, DcaError, Result};

/// Tolerance on `Σ probs = 1` for configurations, which accumulate rounding
/// over many steps.
pub const SIMPLEX_TOL: f64 = 1e-9;

fn check_simplex(probs: &[f64], cell: usize) -> Result<()> {
    let mut sum = 0.0;
    for &p in probs {
        if !p.is_finite() || !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&p) {
            return Err(DcaError::SimplexViolation { cell, sum: p });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(DcaError::SimplexViolation { cell, sum });
    }
    Ok(())
}

/// A probability distribution over the alphabet (an element of the simplex).
#[derive(Debug, Clone, PartialEq)]
pub struct CellDistribution(Vec<f64>);

impl CellDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(DcaError::invalid("distribution needs at least 2 symbols"));
        }
        check_simplex(&probs, 0)?;
        Ok(Self(probs))
    }

    pub fn delta(k: usize, symbol: usize) -> Result<Self> {
        if symbol >= k {
            return Err(DcaError::invalid(format!("symbol {symbol} >= k = {k}")));
        }
        let mut probs = vec![0.0; k];
        probs[symbol] = 1.0;
        Self::new(probs)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for CellDistribution {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// One distribution per ring cell, stored flat (`probs[g * k + a]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    k: usize,
    probs: Vec<f64>,
}

impl Configuration {
    /// Builds from a flat `ring_size * k` vector, validating every cell.
    pub fn new(k: usize, probs: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(DcaError::invalid("alphabet size must be at least 2"));
        }
        if probs.is_empty() || !probs.len().is_multiple_of(k) {
            return Err(DcaError::invalid(format!(
                "{} probabilities do not form whole cells of size {k}",
                probs.len()
            )));
        }
        for (g, cell) in probs.chunks_exact(k).enumerate() {
            check_simplex(cell, g)?;
        }
        Ok(Self { k, probs })
    }

    pub fn from_cells(cells: &[CellDistribution]) -> Result<Self> {
        let k = cells
            .first()
            .ok_or_else(|| DcaError::invalid("configuration needs at least one cell"))?
            .k();
        let mut probs = Vec::with_capacity(cells.len() * k);
        for c in cells {
            ensure_len("cell alphabet size", k, c.k())?;
            probs.extend_from_slice(c.probs());
        }
        Self::new(k, probs)
    }

    /// Delta configuration of a discrete state.
    pub fn from_states(states: &[usize], k: usize) -> Result<Self> {
        let mut probs = vec![0.0; states.len() * k];
        for (g, &s) in states.iter().enumerate() {
            if s >= k {
                return Err(DcaError::invalid(format!("symbol {s} >= k = {k} at cell {g}")));
            }
            probs[g * k + s] = 1.0;
        }
        Self::new(k, probs)
    }

    pub fn uniform(ring_size: usize, k: usize) -> Result<Self> {
        Self::new(k, vec![1.0 / k as f64; ring_size * k])
    }

    /// Binary configuration from `P(1)` per cell.
    pub fn from_black_probs(p_black: &[f64]) -> Result<Self> {
        let probs = p_black.iter().flat_map(|&p| [1.0 - p, p]).collect();
        Self::new(2, probs)
    }

    /// Unchecked constructor for engine outputs that are validated separately.
    pub(crate) fn from_raw(k: usize, probs: Vec<f64>) -> Self {
        debug_assert!(probs.len().is_multiple_of(k));
        Self { k, probs }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ring_size(&self) -> usize {
        self.probs.len() / self.k
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn cell(&self, g: usize) -> &[f64] {
        &self.probs[g * self.k..(g + 1) * self.k]
    }

    #[inline]
    pub fn prob(&self, g: usize, a: usize) -> f64 {
        self.probs[g * self.k + a]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks_exact(self.k)
    }

    /// Probability of `symbol` in every cell.
    pub fn symbol_probs(&self, symbol: usize) -> Vec<f64> {
        self.cells().map(|c| c[symbol]).collect()
    }

    /// Returns the discrete state if every cell is an exact delta.
    pub fn delta_states(&self) -> Option<Vec<usize>> {
        self.cells()
            .map(|c| {
                let mut hot = None;
                for (a, &p) in c.iter().enumerate() {
                    if p == 1.0 && hot.is_none() {
                        hot = Some(a);
                    } else if p != 0.0 {
                        return None;
                    }
                }
                hot
            })
            .collect()
    }

    /// Most probable symbol per cell, ties to the lowest index.
    pub fn argmax_states(&self) -> Vec<usize> {
        self.cells()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (a, &p)| {
                        if p > best.1 {
                            (a, p)
                        } else {
                            best
                        }
                    })
                    .0
            })
            .collect()
    }

    /// Verifies every cell lies on the simplex within [`SIMPLEX_TOL`].
    pub fn check(&self) -> Result<()> {
        for (g, cell) in self.cells().enumerate() {
            check_simplex(cell, g)?;
        }
        Ok(())
    }

    /// Configuration whose cell `g + shift` holds this configuration's cell `g`.
    pub fn rotated(&self, shift: usize) -> Self {
        let n = self.ring_size();
        let mut probs = vec![0.0; self.probs.len()];
        for g in 0..n {
            let dst = (g + shift) % n;
            probs[dst * self.k..(dst + 1) * self.k].copy_from_slice(self.cell(g));
        }
        Self { k: self.k, probs }
    }
}
