use crate::error::{DcaError, Result};

/// Number of neighborhood patterns `k^arity`.
pub fn pattern_count(k: usize, arity: usize) -> Result<usize> {
    u32::try_from(arity)
        .ok()
        .and_then(|a| k.checked_pow(a))
        .ok_or_else(|| DcaError::invalid(format!("{k}^{arity} patterns overflow")))
}

/// Mixed-radix code of a pattern, first symbol most significant.
pub fn encode_pattern(symbols: &[usize], k: usize) -> Result<usize> {
    pattern_count(k, symbols.len())?;
    symbols.iter().try_fold(0usize, |code, &s| {
        if s >= k {
            Err(DcaError::invalid(format!("symbol {s} out of range for k = {k}")))
        } else {
            Ok(code * k + s)
        }
    })
}

/// Inverse of [`encode_pattern`].
pub fn decode_pattern(code: usize, k: usize, arity: usize) -> Result<Vec<usize>> {
    let count = pattern_count(k, arity)?;
    if code >= count {
        return Err(DcaError::invalid(format!(
            "pattern code {code} out of range 0..{count}"
        )));
    }
    let mut out = vec![0; arity];
    let mut rest = code;
    for slot in out.iter_mut().rev() {
        *slot = rest % k;
        rest /= k;
    }
    Ok(out)
}

/// An element of `A^S` together with its code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NeighborhoodPattern {
    symbols: Vec<usize>,
    code: usize,
}

impl NeighborhoodPattern {
    pub fn from_symbols(symbols: Vec<usize>, k: usize) -> Result<Self> {
        let code = encode_pattern(&symbols, k)?;
        Ok(Self { symbols, code })
    }

    pub fn from_code(code: usize, k: usize, arity: usize) -> Result<Self> {
        Ok(Self {
            symbols: decode_pattern(code, k, arity)?,
            code,
        })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn code(&self) -> usize {
        self.code
    }
}

/// Decoded digits of every pattern code, laid out row-major
/// (`digits[code * arity + s]`). Built once per rule so the inner loops
/// never divide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDigits {
    k: usize,
    arity: usize,
    digits: Vec<usize>,
}

impl PatternDigits {
    pub fn new(k: usize, arity: usize) -> Result<Self> {
        let count = pattern_count(k, arity)?;
        let mut digits = Vec::with_capacity(count * arity);
        for code in 0..count {
            digits.extend(decode_pattern(code, k, arity)?);
        }
        Ok(Self { k, arity, digits })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn count(&self) -> usize {
        self.digits.len() / self.arity
    }

    #[inline]
    pub fn get(&self, code: usize) -> &[usize] {
        &self.digits[code * self.arity..(code + 1) * self.arity]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_examples() {
        assert_eq!(encode_pattern(&[1, 1, 0], 2).unwrap(), 6);
        assert_eq!(decode_pattern(0, 2, 3).unwrap(), vec![0, 0, 0]);
        assert_eq!(decode_pattern(7, 2, 3).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn ternary_mixed_radix() {
        assert_eq!(encode_pattern(&[2, 0, 1], 3).unwrap(), 19);
        assert_eq!(decode_pattern(19, 3, 3).unwrap(), vec![2, 0, 1]);
    }

    #[test]
    fn out_of_range() {
        assert!(encode_pattern(&[0, 2], 2).is_err());
        assert!(decode_pattern(8, 2, 3).is_err());
        assert!(pattern_count(usize::MAX, 2).is_err());
    }

    #[test]
    fn digit_table_matches_decode() {
        let t = PatternDigits::new(3, 2).unwrap();
        assert_eq!(t.count(), 9);
        for code in 0..9 {
            assert_eq!(t.get(code), decode_pattern(code, 3, 2).unwrap().as_slice());
        }
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(k in 2usize..5, arity in 1usize..5, seed in any::<u64>()) {
            let count = pattern_count(k, arity).unwrap();
            let code = (seed as usize) % count;
            let p = NeighborhoodPattern::from_code(code, k, arity).unwrap();
            prop_assert_eq!(encode_pattern(p.symbols(), k).unwrap(), code);
            let q = NeighborhoodPattern::from_symbols(p.symbols().to_vec(), k).unwrap();
            prop_assert_eq!(q, p);
        }
    }
}
