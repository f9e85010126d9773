//! Domain types and the exact semantics of discrete CAs, PCA sampling and the
//! DCA step on one-dimensional rings.

mod alphabet;
mod distribution;
mod pattern;
mod pca;
mod rule;
mod step;
mod topology;

pub use alphabet::Alphabet;
pub use distribution::{CellDistribution, Configuration, SIMPLEX_TOL};
pub use pattern::{decode_pattern, encode_pattern, pattern_count, NeighborhoodPattern, PatternDigits};
pub use pca::{pca_sample, pca_sample_with};
pub use rule::{discrete_run, discrete_step, softmax, DiscreteRule, RuleTable, ROW_TOL};
pub use step::{dca_local, dca_run, dca_step};
pub(crate) use step::check_compatible;
pub use topology::Topology;
