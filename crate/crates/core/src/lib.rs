//! Differentiable cellular automata.
//!
//! A differentiable cellular automaton (DCA) evolves one probability
//! distribution over the alphabet per cell. Each step is the exact one-step
//! marginal of a probabilistic CA under the assumption that neighboring cells
//! are independent, so a rule whose rows are delta distributions reproduces an
//! ordinary CA and anything in between mixes the CAs it interpolates.
//!
//! Rules are parameterized by logits (softmax per neighborhood pattern, or a
//! sigmoid per pattern on the binary fast path), which makes every
//! configuration a smooth function of the weights. [`grad`] propagates the
//! configuration gradient forward in time alongside the configuration, and
//! [`optim`] uses it to run gradient descent on a cross-entropy loss against a
//! target transformation.
//!
//! ```
//! use dca::automaton::{dca_run, Configuration, DiscreteRule, RuleTable, Topology};
//!
//! let topology = Topology::elementary(8).unwrap();
//! let rule = RuleTable::from_discrete(&DiscreteRule::wolfram(30).unwrap());
//! let start = Configuration::from_states(&[0, 0, 0, 1, 0, 0, 0, 0], 2).unwrap();
//! let run = dca_run(&rule, &start, &topology, 1).unwrap();
//! assert_eq!(run[1].delta_states().unwrap(), vec![0, 0, 1, 1, 1, 0, 0, 0]);
//! ```

pub mod automaton;
pub mod binary;
pub mod error;
pub mod experiment;
pub mod grad;
pub mod gradcheck;
pub mod io;
pub mod model;
pub mod optim;

pub use error::{DcaError, Result};
pub use model::DcaRule;
