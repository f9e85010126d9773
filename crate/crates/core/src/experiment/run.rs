use std::collections::BTreeMap;
use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, InitialSource, Mode, RuleSource, TableEntry, TargetConfig};
use crate::automaton::{dca_run, encode_pattern, pattern_count, Alphabet, Configuration, DiscreteRule, RuleTable, Topology};
use crate::binary::{binary_grad_run, BinaryConfig};
use crate::error::{DcaError, Result};
use crate::grad::grad_run;
use crate::gradcheck::{compare, fd_binary_gradient, fd_config_gradient, fd_loss_gradient, Comparison};
use crate::io::{load_rule, render_pgm, save_rule, write_loss_csv, RuleFile, SpaceTimeDiagram};
use crate::model::DcaRule;
use crate::optim::{batch_loss_gradient, normal_weights, random_delta_batch, train, TargetSpec, TrainState};

const STREAM_INITIAL: u64 = 1;
const STREAM_WEIGHTS: u64 = 2;

/// Independent sub-seed for one consumer of randomness; every random choice
/// of a run derives from the root seed this way.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub mode: Mode,
    /// Files written, in order.
    pub outputs: Vec<PathBuf>,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
    /// False when a numerical check failed (gradcheck above tolerance).
    pub passed: bool,
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    base_dir: &'a Path,
    alphabet: Alphabet,
    topology: Topology,
    report: RunReport,
}

/// Runs a validated configuration. Relative input paths resolve against
/// `base_dir`; outputs go to `config.output.dir`.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<RunReport> {
    let mode = config
        .mode
        .ok_or_else(|| DcaError::Config("mode is not set; call validate_for first".into()))?;
    let alphabet = Alphabet::new(config.alphabet.iter().cloned())?;
    let topology = Topology::new(config.topology.ring_size, config.topology.offsets.clone())?;
    if config.output.black_symbol >= alphabet.len() {
        return Err(DcaError::Config(format!(
            "black_symbol {} is not in the alphabet",
            config.output.black_symbol
        )));
    }
    let mut ctx = Context {
        config,
        base_dir,
        alphabet,
        topology,
        report: RunReport {
            mode,
            outputs: Vec::new(),
            lines: Vec::new(),
            passed: true,
        },
    };
    fs::create_dir_all(&config.output.dir)?;
    ctx.write("effective-config.json", config.to_json().as_bytes())?;
    ctx.report.lines.push(format!("seed {}", config.seed));

    match mode {
        Mode::Simulate => ctx.simulate()?,
        Mode::Interpolate => ctx.interpolate()?,
        Mode::Gradcheck => ctx.gradcheck()?,
        Mode::Train => ctx.train()?,
    }
    Ok(ctx.report)
}

impl Context<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.config.output.dir.join(name);
        fs::write(&path, bytes)?;
        self.report.outputs.push(path);
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn k(&self) -> usize {
        self.alphabet.len()
    }

    fn require_binary(&self, what: &str) -> Result<()> {
        if self.k() == 2 {
            Ok(())
        } else {
            Err(DcaError::Config(format!("{what} needs a two-symbol alphabet")))
        }
    }

    fn render(&mut self, name: &str, rows: Vec<Configuration>) -> Result<()> {
        let pgm = render_pgm(&SpaceTimeDiagram::new(rows)?, self.config.output.black_symbol)?;
        self.write(name, &pgm)
    }

    /// `P(■)` per pattern code from a table keyed by pattern strings.
    fn table_probs<V>(&self, table: &BTreeMap<String, V>, value: impl Fn(&V) -> Result<f64>) -> Result<Vec<f64>> {
        self.require_binary("a probability table")?;
        let arity = self.topology.arity();
        let count = pattern_count(2, arity)?;
        let mut probs = vec![None; count];
        for (key, v) in table {
            let symbols = self.alphabet.parse_state(key)?;
            if symbols.len() != arity {
                return Err(DcaError::Config(format!("table key {key:?} is not a pattern of length {arity}")));
            }
            let p = value(v)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(DcaError::Config(format!("table entry {key:?} = {p} outside [0, 1]")));
            }
            probs[encode_pattern(&symbols, 2)?] = Some(p);
        }
        probs
            .into_iter()
            .enumerate()
            .map(|(code, p)| p.ok_or_else(|| DcaError::Config(format!("table has no entry for pattern code {code}"))))
            .collect()
    }

    fn binary_table_rule(&self, p_black: &[f64]) -> Result<RuleTable> {
        let probs = p_black.iter().flat_map(|&p| [1.0 - p, p]).collect();
        RuleTable::from_distributions(2, self.topology.arity(), probs)
    }

    fn load_rule_file(&self, path: &Path) -> Result<RuleFile> {
        let file = load_rule(&fs::read_to_string(self.resolve(path))?)?;
        if file.alphabet != self.alphabet {
            return Err(DcaError::Config("rule file alphabet differs from the config alphabet".into()));
        }
        if file.offsets != self.topology.offsets() {
            return Err(DcaError::Config("rule file offsets differ from the config topology".into()));
        }
        Ok(file)
    }

    fn build_rule(&self) -> Result<DcaRule> {
        let (k, arity) = (self.k(), self.topology.arity());
        Ok(match &self.config.rule {
            RuleSource::Wolfram(n) => {
                let d = DiscreteRule::wolfram(*n)?;
                if k != 2 || arity != 3 {
                    return Err(DcaError::Config("Wolfram rules need a binary alphabet and three offsets".into()));
                }
                DcaRule::Softmax(RuleTable::from_discrete(&d))
            }
            RuleSource::File(path) => self.load_rule_file(path)?.rule,
            RuleSource::Weights { parameterization, values } => {
                DcaRule::with_weights(*parameterization, k, arity, values.clone())?
            }
            RuleSource::Random { parameterization, std } => {
                let n = DcaRule::weight_count_for(*parameterization, k, arity)?;
                let w = normal_weights(n, *std, derive_seed(self.config.seed, STREAM_WEIGHTS))?;
                DcaRule::with_weights(*parameterization, k, arity, w)?
            }
            RuleSource::Zeros { parameterization } => {
                let n = DcaRule::weight_count_for(*parameterization, k, arity)?;
                DcaRule::with_weights(*parameterization, k, arity, vec![0.0; n])?
            }
            RuleSource::Table(table) => DcaRule::Softmax(self.binary_table_rule(&self.table_probs(table, |&p| Ok(p))?)?),
            RuleSource::Interpolation { .. } => {
                return Err(DcaError::Config("interpolation rules are expanded per alpha".into()))
            }
        })
    }

    fn build_initial(&self) -> Result<Vec<Configuration>> {
        let (n, k) = (self.topology.ring_size(), self.k());
        let seed = derive_seed(self.config.seed, STREAM_INITIAL);
        let from_state = |s: Vec<usize>| -> Result<Configuration> {
            if s.len() != n {
                return Err(DcaError::Config(format!("initial state has {} cells, ring has {n}", s.len())));
            }
            Configuration::from_states(&s, k)
        };
        match &self.config.initial {
            InitialSource::Centered => {
                let mut s = vec![0; n];
                s[n / 2] = 1;
                Ok(vec![from_state(s)?])
            }
            InitialSource::Bits(text) => Ok(vec![from_state(self.alphabet.parse_state(text)?)?]),
            InitialSource::Probabilities(p) => {
                self.require_binary("a probability initial configuration")?;
                if p.len() != n {
                    return Err(DcaError::Config(format!("{} probabilities for a ring of {n}", p.len())));
                }
                Ok(vec![Configuration::from_black_probs(p)?])
            }
            InitialSource::File(path) => {
                let text = fs::read_to_string(self.resolve(path))?;
                let states: Vec<Configuration> = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(|l| from_state(self.alphabet.parse_state(l)?))
                    .collect::<Result<_>>()?;
                if states.is_empty() {
                    return Err(DcaError::Config("initial configuration file is empty".into()));
                }
                Ok(states)
            }
            InitialSource::Random { count } => random_delta_batch(n, k, *count, seed),
            InitialSource::RandomInterior { count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..*count)
                    .map(|_| {
                        let mut probs: Vec<f64> = Vec::with_capacity(n * k);
                        for _ in 0..n {
                            let raw: Vec<f64> = (0..k).map(|_| 1.0 - rng.random::<f64>()).collect();
                            let sum: f64 = raw.iter().sum();
                            probs.extend(raw.iter().map(|r| r / sum));
                        }
                        Configuration::new(k, probs)
                    })
                    .collect()
            }
        }
    }

    fn build_target(&self) -> Result<TargetSpec> {
        Ok(match self.config.target.as_ref().unwrap_or(&TargetConfig::Majority) {
            TargetConfig::Majority => TargetSpec::Majority,
            TargetConfig::WolframAfterSteps(n) => TargetSpec::RuleAfterSteps(DiscreteRule::wolfram(*n)?),
            TargetConfig::RuleFileAfterSteps(path) => {
                let file = self.load_rule_file(path)?;
                if !file.rule.is_deterministic() {
                    return Err(DcaError::Config("target rule file must be deterministic".into()));
                }
                TargetSpec::RuleAfterSteps(file.rule.threshold())
            }
            TargetConfig::Fixed(text) => {
                let s = self.alphabet.parse_state(text)?;
                if s.len() != self.topology.ring_size() {
                    return Err(DcaError::Config("fixed target length differs from the ring size".into()));
                }
                TargetSpec::Fixed(Configuration::from_states(&s, self.k())?)
            }
        })
    }

    fn simulate(&mut self) -> Result<()> {
        let rule = self.build_rule()?;
        let starts = self.build_initial()?;
        let steps = self.config.steps;
        for (i, x) in starts.iter().enumerate() {
            let rows = rule.run(x, &self.topology, steps)?;
            let name = if starts.len() == 1 {
                "trajectory.pgm".to_string()
            } else {
                format!("trajectory_{i:03}.pgm")
            };
            self.render(&name, rows)?;
        }
        self.report.lines.push(format!(
            "simulated {} configuration(s) for {steps} steps on a ring of {}",
            starts.len(),
            self.topology.ring_size()
        ));
        Ok(())
    }

    fn interpolate(&mut self) -> Result<()> {
        let RuleSource::Interpolation { table, alphas } = &self.config.rule else {
            return Err(DcaError::Config("interpolate mode needs an interpolation rule".into()));
        };
        let starts = self.build_initial()?;
        let x = &starts[0];
        for &alpha in alphas {
            let probs = self.table_probs(table, |e| match e {
                TableEntry::Value(v) => Ok(*v),
                TableEntry::Placeholder(p) if p == "alpha" => Ok(alpha),
                TableEntry::Placeholder(p) => Err(DcaError::Config(format!("unknown placeholder {p:?}"))),
            })?;
            let rule = self.binary_table_rule(&probs)?;
            let rows = dca_run(&rule, x, &self.topology, self.config.steps)?;
            self.render(&format!("alpha_{alpha:.3}.pgm"), rows)?;
        }
        self.report.lines.push(format!("rendered {} interpolation diagram(s)", alphas.len()));
        Ok(())
    }

    fn gradcheck(&mut self) -> Result<()> {
        let rule = self.build_rule()?;
        let starts = self.build_initial()?;
        let target = self.build_target()?;
        let steps = self.config.steps;
        let gc = &self.config.gradcheck;
        let (h, floor) = (gc.h, gc.abs_floor);

        let mut worst_config = Comparison { max_rel_error: 0.0, max_abs_error: 0.0, worst_index: None, entries: 0 };
        let mut worst_loss = worst_config;
        let merge = |acc: &mut Comparison, c: Comparison| {
            acc.entries += c.entries;
            acc.max_abs_error = acc.max_abs_error.max(c.max_abs_error);
            if c.max_rel_error > acc.max_rel_error || c.max_rel_error.is_nan() {
                acc.max_rel_error = c.max_rel_error;
                acc.worst_index = c.worst_index;
            }
        };
        for x in &starts {
            let c = match &rule {
                DcaRule::Softmax(r) => {
                    let (_, analytic) = grad_run(r, x, &self.topology, steps)?;
                    let numeric = fd_config_gradient(r, x, &self.topology, steps, h)?;
                    compare(analytic.data(), numeric.data(), floor)?
                }
                DcaRule::Sigmoid(r) => {
                    let bx = BinaryConfig::from_configuration(x)?;
                    let (_, analytic) = binary_grad_run(r, &bx, &self.topology, steps)?;
                    let numeric: Vec<f64> = fd_binary_gradient(r, &bx, &self.topology, steps, h)?.concat();
                    compare(analytic.data(), &numeric, floor)?
                }
            };
            merge(&mut worst_config, c);
            let (_, analytic) = crate::optim::loss_gradient(&rule, x, &self.topology, steps, &target)?;
            let numeric = fd_loss_gradient(&rule, x, &self.topology, steps, &target, h)?;
            merge(&mut worst_loss, compare(&analytic, &numeric, floor)?);
        }
        let worst = worst_config.max_rel_error.max(worst_loss.max_rel_error);
        let passed = worst < gc.tolerance;
        let lines = vec![
            format!(
                "configuration gradient: {} entries, max relative error {:.3e}, max absolute error {:.3e}",
                worst_config.entries, worst_config.max_rel_error, worst_config.max_abs_error
            ),
            format!(
                "loss gradient: {} entries, max relative error {:.3e}, max absolute error {:.3e}",
                worst_loss.entries, worst_loss.max_rel_error, worst_loss.max_abs_error
            ),
            format!(
                "max relative error {worst:.3e} (tolerance {:.1e}): {}",
                gc.tolerance,
                if passed { "PASS" } else { "FAIL" }
            ),
        ];
        let mut text = lines.join("\n");
        text.push('\n');
        self.write("gradcheck.txt", text.as_bytes())?;
        self.report.lines.extend(lines);
        self.report.passed = passed;
        Ok(())
    }

    fn train(&mut self) -> Result<()> {
        let rule = self.build_rule()?;
        let batch = self.build_initial()?;
        let target = self.build_target()?;
        let steps = self.config.steps;
        let opt = &self.config.optimizer;
        let render_steps = steps.max(1);

        let before = rule.run(&batch[0], &self.topology, render_steps)?;
        let state = TrainState::new(rule, opt.descent_rate, opt.momentum, self.config.seed, batch)?;
        let stop_below = opt.stop_below;
        let outcome = train(state, &self.topology, steps, &target, opt.iterations, |p| match stop_below {
            Some(limit) if p.loss < limit => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        })?;
        let trained = &outcome.state.rule;
        let (final_loss, _) = batch_loss_gradient(trained, &outcome.state.batch, &self.topology, steps, &target)?;
        if !final_loss.is_finite() {
            return Err(DcaError::NonFinite {
                what: "loss",
                iteration: outcome.state.step_count,
                index: None,
                value: final_loss,
            });
        }
        let after = trained.run(&outcome.state.batch[0], &self.topology, render_steps)?;

        self.write("loss.csv", write_loss_csv(&outcome.history).as_bytes())?;
        let file = RuleFile::new(self.alphabet.clone(), self.topology.offsets().to_vec(), trained.clone())?;
        self.write("trained_rule.txt", save_rule(&file)?.as_bytes())?;
        self.render("before.pgm", before)?;
        self.render("after.pgm", after)?;

        let thresholded = trained.threshold();
        self.report.lines.push(format!(
            "trained {} iteration(s); final batch loss {final_loss:.6e}",
            outcome.state.step_count
        ));
        match thresholded.wolfram_number() {
            Some(n) if self.topology.offsets() == [-1, 0, 1] => {
                self.report.lines.push(format!("thresholded rule: Wolfram {n}"))
            }
            _ => self.report.lines.push(format!("thresholded rule outputs: {:?}", thresholded.outputs())),
        }
        Ok(())
    }
}
