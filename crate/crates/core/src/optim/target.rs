use crate::automaton::{discrete_run, Configuration, DiscreteRule, Topology};
use crate::error::{ensure_len, DcaError, Result};

/// What the configuration should look like after the run.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    /// The same configuration for every initial condition.
    Fixed(Configuration),
    /// Every cell becomes the globally most probable symbol of the start.
    Majority,
    /// Whatever the given ordinary CA produces from the (delta) start after
    /// the same number of steps.
    RuleAfterSteps(DiscreteRule),
}

impl TargetSpec {
    /// Target configuration for `initial` after `steps` updates.
    pub fn resolve(&self, initial: &Configuration, topology: &Topology, steps: usize) -> Result<Configuration> {
        match self {
            TargetSpec::Fixed(c) => {
                ensure_len("target length", initial.ring_size(), c.ring_size())?;
                ensure_len("target alphabet size", initial.k(), c.k())?;
                Ok(c.clone())
            }
            TargetSpec::Majority => Ok(majority_target(initial)),
            TargetSpec::RuleAfterSteps(rule) => {
                ensure_len("target rule alphabet size", initial.k(), rule.k())?;
                let state = initial.delta_states().ok_or_else(|| {
                    DcaError::invalid("a discrete-rule target needs a delta initial configuration")
                })?;
                let run = discrete_run(rule, &state, topology, steps)?;
                Configuration::from_states(&run[steps], initial.k())
            }
        }
    }
}

/// Delta at `argmax_a Σ_g x(g)(a)` in every cell, ties to the lowest index.
pub fn majority_target(config: &Configuration) -> Configuration {
    let k = config.k();
    let mut totals = vec![0.0; k];
    for cell in config.cells() {
        for (t, p) in totals.iter_mut().zip(cell) {
            *t += p;
        }
    }
    let winner = totals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (a, &t)| if t > b.1 { (a, t) } else { b })
        .0;
    Configuration::from_states(&vec![winner; config.ring_size()], k).expect("winner < k")
}
