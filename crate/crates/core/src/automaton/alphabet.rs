use std::collections::HashMap;

use crate::error::{DcaError, Result};

/// Ordered, finite symbol set. Symbol `i` is addressed by its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(DcaError::invalid(format!(
                "alphabet needs at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(DcaError::invalid(format!("bad symbol label {s:?}")));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(DcaError::invalid(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Self { symbols, index })
    }

    /// `{0, 1}` with `1` standing for the black cell.
    pub fn binary() -> Self {
        Self::new(["0", "1"]).expect("binary alphabet is valid")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.symbols.get(i).map(String::as_str)
    }

    /// Parses a state written as one character per cell. Only usable when
    /// every label is a single character.
    pub fn parse_state(&self, text: &str) -> Result<Vec<usize>> {
        text.chars()
            .map(|c| {
                let mut buf = [0u8; 4];
                self.index_of(c.encode_utf8(&mut buf)).ok_or_else(|| {
                    DcaError::invalid(format!("symbol {c:?} is not in the alphabet"))
                })
            })
            .collect()
    }
}
