//! A trainable DCA rule under either parameterization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::automaton::{dca_run, Configuration, DiscreteRule, RuleTable, Topology};
use crate::binary::{binary_run, BinaryConfig, BinaryRule};
use crate::error::{DcaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameterization {
    /// `ρ(y) = softmax(w(y))`, one logit per (pattern, symbol).
    Softmax,
    /// Two symbols only, `ρ(y)(■) = sigmoid(w(y))`, one logit per pattern.
    Sigmoid,
}

impl fmt::Display for Parameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parameterization::Softmax => "softmax",
            Parameterization::Sigmoid => "sigmoid",
        })
    }
}

impl FromStr for Parameterization {
    type Err = DcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "softmax" => Ok(Parameterization::Softmax),
            "sigmoid" => Ok(Parameterization::Sigmoid),
            other => Err(DcaError::invalid(format!("unknown parameterization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DcaRule {
    Softmax(RuleTable),
    Sigmoid(BinaryRule),
}

impl DcaRule {
    /// Weight-parameterized rule of the given shape.
    pub fn with_weights(
        parameterization: Parameterization,
        k: usize,
        arity: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        match parameterization {
            Parameterization::Softmax => Ok(DcaRule::Softmax(RuleTable::from_weights(k, arity, weights)?)),
            Parameterization::Sigmoid => {
                if k != 2 {
                    return Err(DcaError::invalid("sigmoid rules need a two-symbol alphabet"));
                }
                Ok(DcaRule::Sigmoid(BinaryRule::from_weights(arity, weights)?))
            }
        }
    }

    /// Number of weights a rule of this shape carries.
    pub fn weight_count_for(parameterization: Parameterization, k: usize, arity: usize) -> Result<usize> {
        let patterns = crate::automaton::pattern_count(k, arity)?;
        Ok(match parameterization {
            Parameterization::Softmax => patterns * k,
            Parameterization::Sigmoid => patterns,
        })
    }

    pub fn parameterization(&self) -> Parameterization {
        match self {
            DcaRule::Softmax(_) => Parameterization::Softmax,
            DcaRule::Sigmoid(_) => Parameterization::Sigmoid,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            DcaRule::Softmax(r) => r.k(),
            DcaRule::Sigmoid(_) => 2,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            DcaRule::Softmax(r) => r.arity(),
            DcaRule::Sigmoid(r) => r.arity(),
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            DcaRule::Softmax(r) => r.weights(),
            DcaRule::Sigmoid(r) => r.weights(),
        }
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        match self {
            DcaRule::Softmax(r) => r.set_weights(weights),
            DcaRule::Sigmoid(r) => r.set_weights(weights),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            DcaRule::Softmax(r) => r.is_deterministic(),
            DcaRule::Sigmoid(r) => r.is_deterministic(),
        }
    }

    pub fn threshold(&self) -> DiscreteRule {
        match self {
            DcaRule::Softmax(r) => r.threshold(),
            DcaRule::Sigmoid(r) => r.threshold(),
        }
    }

    /// The rule as a general softmax table (bridged for sigmoid rules).
    pub fn to_rule_table(&self) -> RuleTable {
        match self {
            DcaRule::Softmax(r) => r.clone(),
            DcaRule::Sigmoid(r) => r.to_rule_table(),
        }
    }

    /// Trajectory of `steps + 1` configurations. Sigmoid rules run on the
    /// binary engine.
    pub fn run(&self, config: &Configuration, topology: &Topology, steps: usize) -> Result<Vec<Configuration>> {
        match self {
            DcaRule::Softmax(r) => dca_run(r, config, topology, steps),
            DcaRule::Sigmoid(r) => binary_run(r, &BinaryConfig::from_configuration(config)?, topology, steps)?
                .iter()
                .map(|c| c.to_configuration())
                .collect(),
        }
    }
}
