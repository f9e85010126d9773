use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::loss::batch_loss_gradient;
use super::target::TargetSpec;
use crate::automaton::{Configuration, Topology};
use crate::error::{DcaError, Result};
use crate::model::DcaRule;

/// Optimizer state: the rule being trained, descent settings, the momentum
/// buffer and the batch of initial configurations the loss is summed over.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub rule: DcaRule,
    pub step_count: usize,
    pub descent_rate: f64,
    pub momentum: f64,
    pub velocity: Vec<f64>,
    pub seed: u64,
    pub batch: Vec<Configuration>,
}

impl TrainState {
    pub fn new(rule: DcaRule, descent_rate: f64, momentum: f64, seed: u64, batch: Vec<Configuration>) -> Result<Self> {
        if !(descent_rate > 0.0 && descent_rate.is_finite()) {
            return Err(DcaError::invalid(format!("descent rate must be positive, got {descent_rate}")));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(DcaError::invalid(format!("momentum must lie in [0, 1), got {momentum}")));
        }
        if batch.is_empty() {
            return Err(DcaError::invalid("training batch is empty"));
        }
        let n = rule
            .weights()
            .ok_or_else(|| DcaError::invalid("only weight-parameterized rules can be trained"))?
            .len();
        Ok(Self {
            rule,
            step_count: 0,
            descent_rate,
            momentum,
            velocity: vec![0.0; n],
            seed,
            batch,
        })
    }
}

/// Reported to the callback once per iteration, before the update.
#[derive(Debug)]
pub struct Progress<'a> {
    pub iteration: usize,
    pub loss: f64,
    pub weights: &'a [f64],
    pub gradient: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub state: TrainState,
    /// Batch loss at the start of each iteration.
    pub history: Vec<f64>,
}

fn first_non_finite(values: &[f64]) -> Option<(usize, f64)> {
    values.iter().copied().enumerate().find(|(_, v)| !v.is_finite())
}

/// Gradient descent with classical momentum:
/// `v ← βv + ∇E`, `w ← w − εv`, where `E` is summed over the batch.
///
/// The callback may stop early by returning `ControlFlow::Break`; the
/// iteration it was called for is then not applied.
pub fn train(
    mut state: TrainState,
    topology: &Topology,
    steps: usize,
    target: &TargetSpec,
    iterations: usize,
    mut callback: impl FnMut(&Progress<'_>) -> ControlFlow<()>,
) -> Result<TrainOutcome> {
    let mut history = Vec::with_capacity(iterations);
    for iteration in 0..iterations {
        let (loss, grad) = batch_loss_gradient(&state.rule, &state.batch, topology, steps, target)?;
        if !loss.is_finite() {
            return Err(DcaError::NonFinite {
                what: "loss",
                iteration,
                index: None,
                value: loss,
            });
        }
        if let Some((index, value)) = first_non_finite(&grad) {
            return Err(DcaError::NonFinite {
                what: "gradient",
                iteration,
                index: Some(index),
                value,
            });
        }
        let weights = state.rule.weights().expect("checked in TrainState::new").to_vec();
        let progress = Progress {
            iteration,
            loss,
            weights: &weights,
            gradient: &grad,
        };
        if callback(&progress).is_break() {
            break;
        }
        history.push(loss);

        let beta = state.momentum;
        let rate = state.descent_rate;
        for (v, g) in state.velocity.iter_mut().zip(&grad) {
            *v = beta * *v + g;
        }
        let updated: Vec<f64> = weights
            .iter()
            .zip(&state.velocity)
            .map(|(w, v)| w - rate * v)
            .collect();
        if let Some((index, value)) = first_non_finite(&updated) {
            return Err(DcaError::NonFinite {
                what: "weight",
                iteration,
                index: Some(index),
                value,
            });
        }
        state.rule.set_weights(updated)?;
        state.step_count += 1;
    }
    Ok(TrainOutcome { state, history })
}

/// `count` uniformly random delta configurations.
pub fn random_delta_batch(ring_size: usize, k: usize, count: usize, seed: u64) -> Result<Vec<Configuration>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let state: Vec<usize> = (0..ring_size).map(|_| rng.random_range(0..k)).collect();
            Configuration::from_states(&state, k)
        })
        .collect()
}

/// `count` i.i.d. `N(0, std²)` weights.
pub fn normal_weights(count: usize, std: f64, seed: u64) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, std).map_err(|e| DcaError::invalid(format!("bad weight scale: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| normal.sample(&mut rng)).collect())
}
