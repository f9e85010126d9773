//! Plain-text rule files.
//!
//! ```text
//! # comment
//! format dca-rule 1
//! parameterization softmax
//! alphabet 0 1
//! offsets -1 0 1
//! deterministic false
//! rows
//! 0 -1.2000000000000000e0 3.4000000000000000e-1
//! ...
//! ```
//!
//! One row per pattern code in increasing order. Weight rows hold `k` logits
//! (softmax) or one logit (sigmoid), written with 17 significant digits so
//! they read back bit-identically. With `deterministic true` each row holds
//! the output symbol label instead and the rule is loaded with exact delta
//! distributions.

use crate::automaton::{pattern_count, Alphabet, DiscreteRule, RuleTable};
use crate::binary::BinaryRule;
use crate::error::{DcaError, Result};
use crate::model::{DcaRule, Parameterization};

/// Logit magnitude used when a discrete rule must be written in weight space.
pub const LOGIT_CAP: f64 = 30.0;

const MAGIC: &str = "dca-rule 1";

#[derive(Debug, Clone, PartialEq)]
pub struct RuleFile {
    pub alphabet: Alphabet,
    pub offsets: Vec<i64>,
    pub rule: DcaRule,
}

impl RuleFile {
    pub fn new(alphabet: Alphabet, offsets: Vec<i64>, rule: DcaRule) -> Result<Self> {
        if rule.k() != alphabet.len() {
            return Err(DcaError::invalid(format!(
                "rule has {} symbols but the alphabet has {}",
                rule.k(),
                alphabet.len()
            )));
        }
        if rule.arity() != offsets.len() {
            return Err(DcaError::invalid(format!(
                "rule reads {} cells but {} offsets are given",
                rule.arity(),
                offsets.len()
            )));
        }
        crate::automaton::Topology::new(1, offsets.clone())?;
        Ok(Self { alphabet, offsets, rule })
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn save_rule(file: &RuleFile) -> Result<String> {
    let rule = &file.rule;
    let mut out = String::from("# differentiable cellular automaton rule\n");
    out.push_str(&format!("format {MAGIC}\n"));
    out.push_str(&format!("parameterization {}\n", rule.parameterization()));
    out.push_str(&format!("alphabet {}\n", join(file.alphabet.symbols())));
    out.push_str(&format!("offsets {}\n", join(&file.offsets)));

    if let Some(weights) = rule.weights() {
        out.push_str("deterministic false\nrows\n");
        let per_row = weights.len() / pattern_count(rule.k(), rule.arity())?;
        for (code, row) in weights.chunks_exact(per_row).enumerate() {
            out.push_str(&code.to_string());
            for w in row {
                out.push_str(&format!(" {w:.16e}"));
            }
            out.push('\n');
        }
    } else if rule.is_deterministic() {
        out.push_str("deterministic true\nrows\n");
        for (code, &o) in rule.threshold().outputs().iter().enumerate() {
            let label = file.alphabet.label(o).expect("output within alphabet");
            out.push_str(&format!("{code} {label}\n"));
        }
    } else {
        return Err(DcaError::invalid(
            "rule has neither weights nor delta rows; it cannot be written to a rule file",
        ));
    }
    Ok(out)
}

#[derive(Default)]
struct Header {
    format: bool,
    parameterization: Option<Parameterization>,
    alphabet: Option<Alphabet>,
    offsets: Option<Vec<i64>>,
    deterministic: Option<bool>,
}

pub fn load_rule(text: &str) -> Result<RuleFile> {
    let mut header = Header::default();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut rows_line = None;
    for (lineno, line) in lines.by_ref() {
        let (key, value) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let value = value.trim();
        let dup = || DcaError::parse(lineno, format!("duplicate key {key:?}"));
        match key {
            "format" => {
                if value != MAGIC {
                    return Err(DcaError::parse(lineno, format!("unsupported format {value:?}")));
                }
                header.format = true;
            }
            "parameterization" => {
                let p = value.parse().map_err(|e: DcaError| DcaError::parse(lineno, e.to_string()))?;
                if header.parameterization.replace(p).is_some() {
                    return Err(dup());
                }
            }
            "alphabet" => {
                let a = Alphabet::new(value.split_whitespace()).map_err(|e| DcaError::parse(lineno, e.to_string()))?;
                if header.alphabet.replace(a).is_some() {
                    return Err(dup());
                }
            }
            "offsets" => {
                let o = value
                    .split_whitespace()
                    .map(|s| s.parse::<i64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| DcaError::parse(lineno, format!("bad offset: {e}")))?;
                if header.offsets.replace(o).is_some() {
                    return Err(dup());
                }
            }
            "deterministic" => {
                let d = match value {
                    "true" => true,
                    "false" => false,
                    other => return Err(DcaError::parse(lineno, format!("expected true/false, got {other:?}"))),
                };
                if header.deterministic.replace(d).is_some() {
                    return Err(dup());
                }
            }
            "rows" => {
                rows_line = Some(lineno);
                break;
            }
            other => return Err(DcaError::parse(lineno, format!("unknown key {other:?}"))),
        }
    }

    let rows_line = rows_line.ok_or_else(|| DcaError::parse(text.lines().count().max(1), "missing \"rows\" section"))?;
    let missing = |what: &str| DcaError::parse(rows_line, format!("header is missing {what:?}"));
    if !header.format {
        return Err(missing("format"));
    }
    let parameterization = header.parameterization.ok_or_else(|| missing("parameterization"))?;
    let alphabet = header.alphabet.ok_or_else(|| missing("alphabet"))?;
    let offsets = header.offsets.ok_or_else(|| missing("offsets"))?;
    let deterministic = header.deterministic.ok_or_else(|| missing("deterministic"))?;

    let k = alphabet.len();
    let arity = offsets.len();
    let patterns = pattern_count(k, arity).map_err(|e| DcaError::parse(rows_line, e.to_string()))?;
    if parameterization == Parameterization::Sigmoid && k != 2 {
        return Err(DcaError::parse(rows_line, "sigmoid rules need a two-symbol alphabet"));
    }
    let per_row = match (deterministic, parameterization) {
        (true, _) => 1,
        (false, Parameterization::Softmax) => k,
        (false, Parameterization::Sigmoid) => 1,
    };

    let mut values: Vec<f64> = Vec::with_capacity(patterns * per_row);
    let mut outputs: Vec<usize> = Vec::with_capacity(patterns);
    let mut last_line = rows_line;
    for (code, (lineno, line)) in lines.enumerate() {
        last_line = lineno;
        if code >= patterns {
            return Err(DcaError::parse(lineno, format!("more than {patterns} rows")));
        }
        let mut fields = line.split_whitespace();
        let idx = fields.next().and_then(|f| f.parse::<usize>().ok());
        if idx != Some(code) {
            return Err(DcaError::parse(lineno, format!("expected row {code}")));
        }
        let fields: Vec<&str> = fields.collect();
        if fields.len() != per_row {
            return Err(DcaError::parse(
                lineno,
                format!("expected {per_row} values, found {}", fields.len()),
            ));
        }
        if deterministic {
            let o = alphabet
                .index_of(fields[0])
                .ok_or_else(|| DcaError::parse(lineno, format!("unknown symbol {:?}", fields[0])))?;
            outputs.push(o);
        } else {
            for f in fields {
                let w: f64 = f.parse().map_err(|_| DcaError::parse(lineno, format!("bad number {f:?}")))?;
                if !w.is_finite() {
                    return Err(DcaError::parse(lineno, "weights must be finite"));
                }
                values.push(w);
            }
        }
    }
    let rows_read = if deterministic { outputs.len() } else { values.len() / per_row };
    if rows_read != patterns {
        return Err(DcaError::parse(last_line, format!("expected {patterns} rows, found {rows_read}")));
    }

    let to_parse = |e: DcaError| DcaError::parse(rows_line, e.to_string());
    let rule = if deterministic {
        let d = DiscreteRule::new(k, arity, outputs).map_err(to_parse)?;
        match parameterization {
            Parameterization::Softmax => DcaRule::Softmax(RuleTable::from_discrete(&d)),
            Parameterization::Sigmoid => DcaRule::Sigmoid(BinaryRule::from_discrete(&d).map_err(to_parse)?),
        }
    } else {
        DcaRule::with_weights(parameterization, k, arity, values).map_err(to_parse)?
    };
    RuleFile::new(alphabet, offsets, rule).map_err(to_parse)
}
