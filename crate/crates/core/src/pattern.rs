use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite bit pattern such as `1101`, stored in canonical form: leading and
/// trailing zeros stripped, so the first and last bits are ones.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    bits: Vec<u8>,
}

impl Pattern {
    pub fn new(bits: &[u8]) -> Result<Self> {
        let first = bits.iter().position(|&b| b != 0);
        let last = bits.iter().rposition(|&b| b != 0);
        match (first, last) {
            (Some(f), Some(l)) => Ok(Self {
                bits: bits[f..=l].iter().map(|&b| u8::from(b != 0)).collect(),
            }),
            _ => Err(Error::InvalidPattern(format!("{bits:?}"))),
        }
    }

    /// The block of `n` ones.
    pub fn block(n: usize) -> Self {
        assert!(n >= 1);
        Self { bits: vec![1; n] }
    }

    /// `1 0^(n-2) 1`, the two-ended gap pattern of length `n ≥ 2`.
    pub fn gap(n: usize) -> Self {
        assert!(n >= 2);
        let mut bits = vec![0; n];
        bits[0] = 1;
        bits[n - 1] = 1;
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Offsets of the ones relative to the first bit.
    pub fn offsets(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidPattern(s.to_string())),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(&bits).map_err(|_| Error::InvalidPattern(s.to_string()))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({self})")
    }
}
