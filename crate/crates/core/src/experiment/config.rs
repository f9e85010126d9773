use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{DcaError, Result};
use crate::model::Parameterization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Train,
    Gradcheck,
    Interpolate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Train => "train",
            Mode::Gradcheck => "gradcheck",
            Mode::Interpolate => "interpolate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub ring_size: usize,
    #[serde(default = "default_offsets")]
    pub offsets: Vec<i64>,
}

fn default_offsets() -> Vec<i64> {
    vec![-1, 0, 1]
}

/// A fixed probability or the placeholder `"alpha"` in an interpolation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableEntry {
    Value(f64),
    Placeholder(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSource {
    /// Elementary CA by Wolfram number, as exact delta rows.
    Wolfram(u32),
    /// Rule file, relative to the config file.
    File(PathBuf),
    /// Inline logits in rule-file order.
    Weights {
        parameterization: Parameterization,
        values: Vec<f64>,
    },
    /// `N(0, std²)` logits drawn from the root seed.
    Random {
        parameterization: Parameterization,
        #[serde(default = "default_std")]
        std: f64,
    },
    /// All-zero logits (uniform rows).
    Zeros { parameterization: Parameterization },
    /// Binary `P(■)` per pattern, keyed by the pattern written in symbols
    /// (first offset first), e.g. `"110"`.
    Table(BTreeMap<String, f64>),
    /// Binary table with `"alpha"` placeholders, run once per `alphas` entry.
    Interpolation {
        table: BTreeMap<String, TableEntry>,
        alphas: Vec<f64>,
    },
}

fn default_std() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSource {
    /// One symbol at cell `n / 2`, the rest symbol 0.
    #[default]
    Centered,
    /// One symbol per character.
    Bits(String),
    /// `P(■)` per cell.
    Probabilities(Vec<f64>),
    /// One state per line (blank lines and `#` comments skipped).
    File(PathBuf),
    /// Uniformly random delta configurations drawn from the root seed.
    Random { count: usize },
    /// Random interior configurations (every symbol has positive mass).
    RandomInterior { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    Majority,
    /// The elementary CA's output after the same number of steps.
    WolframAfterSteps(u32),
    /// Deterministic rule file's output after the same number of steps.
    RuleFileAfterSteps(PathBuf),
    /// The same configuration for every start.
    Fixed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_rate")]
    pub descent_rate: f64,
    #[serde(default)]
    pub momentum: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Stop once the batch loss drops below this.
    #[serde(default)]
    pub stop_below: Option<f64>,
}

fn default_rate() -> f64 {
    0.5
}

fn default_iterations() -> usize {
    100
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            descent_rate: default_rate(),
            momentum: 0.0,
            iterations: default_iterations(),
            stop_below: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradcheckConfig {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_floor")]
    pub abs_floor: f64,
}

fn default_h() -> f64 {
    crate::gradcheck::FD_STEP
}

fn default_tolerance() -> f64 {
    crate::gradcheck::REL_TOL
}

fn default_floor() -> f64 {
    crate::gradcheck::ABS_FLOOR
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            h: default_h(),
            tolerance: default_tolerance(),
            abs_floor: default_floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// Symbol whose probability is drawn dark in diagrams.
    #[serde(default = "default_black")]
    pub black_symbol: usize,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_black() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            black_symbol: default_black(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must agree with the subcommand when present.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default = "default_alphabet")]
    pub alphabet: Vec<String>,
    pub topology: TopologyConfig,
    pub rule: RuleSource,
    #[serde(default)]
    pub initial: InitialSource,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub target: Option<TargetConfig>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub gradcheck: GradcheckConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_alphabet() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

fn default_steps() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DcaError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies the command-line overrides; each flag sets exactly one field.
    pub fn apply_overrides(&mut self, steps: Option<usize>, seed: Option<u64>, out_dir: Option<PathBuf>) {
        if let Some(s) = steps {
            self.steps = s;
        }
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(d) = out_dir {
            self.output.dir = d;
        }
    }

    /// Checks the fields `mode` needs, pinning `self.mode`.
    pub fn validate_for(&mut self, mode: Mode) -> Result<()> {
        let err = |m: String| Err(DcaError::Config(m));
        match self.mode {
            Some(m) if m != mode => return err(format!("config declares mode {m} but {mode} was requested")),
            _ => self.mode = Some(mode),
        }
        let is_interp = matches!(self.rule, RuleSource::Interpolation { .. });
        if (mode == Mode::Interpolate) != is_interp {
            return err(if is_interp {
                format!("an interpolation rule only works in interpolate mode, not {mode}")
            } else {
                "interpolate mode needs an interpolation rule".into()
            });
        }
        if let RuleSource::Interpolation { alphas, table } = &self.rule {
            if alphas.is_empty() {
                return err("interpolation needs at least one alpha".into());
            }
            if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                return err(format!("alpha {a} outside [0, 1]"));
            }
            for (k, v) in table {
                if let TableEntry::Placeholder(p) = v {
                    if p != "alpha" {
                        return err(format!("table entry {k:?} has unknown placeholder {p:?}"));
                    }
                }
            }
        }
        if matches!(mode, Mode::Train | Mode::Gradcheck) {
            if self.steps == 0 {
                return err(format!("{mode} needs steps >= 1"));
            }
            match &self.rule {
                RuleSource::Weights { .. } | RuleSource::Random { .. } | RuleSource::Zeros { .. } | RuleSource::File(_) => {}
                _ => return err(format!("{mode} needs a weight-parameterized rule (weights, random, zeros or file)")),
            }
        }
        if mode == Mode::Train {
            let o = &self.optimizer;
            if o.descent_rate.is_nan() || o.descent_rate <= 0.0 {
                return err("descent_rate must be positive".into());
            }
            if !(0.0..1.0).contains(&o.momentum) {
                return err("momentum must lie in [0, 1)".into());
            }
        }
        if mode == Mode::Gradcheck && !(self.gradcheck.h > 0.0 && self.gradcheck.tolerance > 0.0) {
            return err("gradcheck h and tolerance must be positive".into());
        }
        if let InitialSource::Random { count } | InitialSource::RandomInterior { count } = self.initial {
            if count == 0 {
                return err("random initial count must be positive".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIMPLE: &str = r#"{
        "topology": {"ring_size": 63},
        "rule": {"wolfram": 30},
        "steps": 31
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(SIMPLE).unwrap();
        assert_eq!(c.topology.offsets, vec![-1, 0, 1]);
        assert_eq!(c.initial, InitialSource::Centered);
        assert_eq!(c.alphabet, vec!["0", "1"]);
        assert_eq!(c.output.black_symbol, 1);
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_fields_rejected_with_line() {
        let err = ExperimentConfig::from_json("{\n\"topology\": {\"ring_size\": 4},\n\"rule\": \"x\"\n}").unwrap_err();
        assert!(matches!(err, DcaError::Parse { line: 3, .. }), "{err}");
        assert!(ExperimentConfig::from_json(r#"{"topology":{"ring_size":4},"rule":{"wolfram":1},"bogus":1}"#).is_err());
    }

    #[test]
    fn overrides_touch_one_field_each() {
        let mut c = ExperimentConfig::from_json(SIMPLE).unwrap();
        let before = c.clone();
        c.apply_overrides(Some(5), None, None);
        assert_eq!(ExperimentConfig { steps: 31, ..c.clone() }, before);
        c.apply_overrides(None, Some(9), None);
        assert_eq!(c.seed, 9);
        c.apply_overrides(None, None, Some("x".into()));
        assert_eq!(c.output.dir, PathBuf::from("x"));
    }

    #[test]
    fn mode_validation() {
        let mut c = ExperimentConfig::from_json(SIMPLE).unwrap();
        assert!(c.clone().validate_for(Mode::Simulate).is_ok());
        assert!(c.clone().validate_for(Mode::Train).is_err());
        assert!(c.clone().validate_for(Mode::Interpolate).is_err());
        c.mode = Some(Mode::Train);
        assert!(c.validate_for(Mode::Simulate).is_err());

        let mut i = ExperimentConfig::from_json(
            r#"{"topology":{"ring_size":8},"rule":{"interpolation":{"table":{"110":"alpha"},"alphas":[0.5, 1.5]}}}"#,
        )
        .unwrap();
        assert!(i.validate_for(Mode::Interpolate).is_err());
    }
}
