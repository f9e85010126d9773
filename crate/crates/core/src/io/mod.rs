//! Bit-exact file formats: space-time diagrams as binary PGM, rule files and
//! loss logs.

mod loss_csv;
mod pgm;
mod rule_file;

pub use loss_csv::{parse_loss_csv, write_loss_csv};
pub use pgm::{encode_pgm, parse_pgm, render_pgm, PgmImage, SpaceTimeDiagram};
pub use rule_file::{load_rule, save_rule, RuleFile, LOGIT_CAP};
