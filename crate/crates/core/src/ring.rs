//! Bit configurations on a periodic lattice.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MIN_SITES: usize = 4;

/// A configuration of zeros and ones on `N` sites with periodic boundary
/// conditions. The number of ones is cached and kept in sync by every
/// mutating method.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingConfig {
    bits: Vec<u8>,
    ones: usize,
}

impl RingConfig {
    pub fn zeros(size: usize) -> Result<Self> {
        if size < MIN_SITES {
            return Err(Error::RingTooSmall(size));
        }
        Ok(Self {
            bits: vec![0; size],
            ones: 0,
        })
    }

    /// Builds a configuration from a slice of 0/1 values; any nonzero entry
    /// counts as a one.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() < MIN_SITES {
            return Err(Error::RingTooSmall(bits.len()));
        }
        let bits: Vec<u8> = bits.iter().map(|&b| u8::from(b != 0)).collect();
        let ones = bits.iter().filter(|&&b| b == 1).count();
        Ok(Self { bits, ones })
    }

    /// Decodes the low `size` bits of `mask`, site `i` being bit `i`.
    pub fn from_mask(mask: u64, size: usize) -> Result<Self> {
        if size < MIN_SITES {
            return Err(Error::RingTooSmall(size));
        }
        let bits: Vec<u8> = (0..size).map(|i| ((mask >> i) & 1) as u8).collect();
        let ones = (mask & low_mask(size)).count_ones() as usize;
        Ok(Self { bits, ones })
    }

    pub fn single(size: usize, site: usize) -> Result<Self> {
        let mut c = Self::zeros(size)?;
        c.set(site % size, true);
        Ok(c)
    }

    pub fn to_mask(&self) -> u64 {
        assert!(self.bits.len() <= 64, "mask encoding needs at most 64 sites");
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| m | (u64::from(b) << i))
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn ones(&self) -> usize {
        self.ones
    }

    #[inline]
    pub fn parity(&self) -> usize {
        self.ones & 1
    }

    #[inline]
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Value at `i` taken modulo the ring size; negative offsets wrap.
    #[inline]
    pub fn at(&self, i: isize) -> u8 {
        self.bits[self.wrap(i)]
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits[i % self.bits.len()] == 1
    }

    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        let n = self.bits.len() as isize;
        if i < 0 && i >= -n {
            (i + n) as usize
        } else if i >= n && i < 2 * n {
            (i - n) as usize
        } else if i >= 0 && i < n {
            i as usize
        } else {
            i.rem_euclid(n) as usize
        }
    }

    pub fn set(&mut self, i: usize, value: bool) {
        let i = i % self.bits.len();
        let old = self.bits[i] == 1;
        if old != value {
            self.toggle(i);
        }
    }

    /// Flips site `i` and returns its new value.
    #[inline]
    pub fn toggle(&mut self, i: usize) -> bool {
        let i = if i < self.bits.len() { i } else { i % self.bits.len() };
        let b = &mut self.bits[i];
        *b ^= 1;
        if *b == 1 {
            self.ones += 1;
            true
        } else {
            self.ones -= 1;
            false
        }
    }

    /// Flip of an in-range site, for hot loops that already hold a valid index.
    #[inline]
    pub(crate) fn flip_in_range(&mut self, i: usize) -> bool {
        let b = &mut self.bits[i];
        *b ^= 1;
        let now = *b;
        self.ones = self.ones + 2 * now as usize - 1;
        now == 1
    }

    /// Returns the configuration shifted so that `rotate(k).get(i + k) == get(i)`.
    pub fn rotate(&self, k: usize) -> Self {
        let n = self.bits.len();
        let mut bits = vec![0; n];
        for (i, &b) in self.bits.iter().enumerate() {
            bits[(i + k) % n] = b;
        }
        Self {
            bits,
            ones: self.ones,
        }
    }

    /// Positions of the ones, in increasing order.
    pub fn particles(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
    }
}

pub(crate) fn low_mask(size: usize) -> u64 {
    if size >= 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    }
}

impl fmt::Display for RingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for RingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingConfig({self}, ones={})", self.ones)
    }
}

impl FromStr for RingConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidInput(format!("not a bit string: {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_rings() {
        assert_eq!(RingConfig::zeros(3), Err(Error::RingTooSmall(3)));
        assert!("011".parse::<RingConfig>().is_err());
    }

    #[test]
    fn cached_count_follows_toggles() {
        let mut c: RingConfig = "10100".parse().unwrap();
        assert_eq!(c.ones(), 2);
        assert!(c.toggle(1));
        assert!(!c.toggle(0));
        assert_eq!(c.to_string(), "01100");
        assert_eq!(c.ones(), 2);
        c.set(4, true);
        c.set(4, true);
        assert_eq!(c.ones(), 3);
        assert_eq!(c.parity(), 1);
    }

    #[test]
    fn wraps_negative_indices() {
        let c: RingConfig = "10001".parse().unwrap();
        assert_eq!(c.at(-1), 1);
        assert_eq!(c.at(-2), 0);
        assert_eq!(c.at(5), 1);
    }

    #[test]
    fn mask_round_trip_and_rotation() {
        let c: RingConfig = "110100".parse().unwrap();
        assert_eq!(RingConfig::from_mask(c.to_mask(), 6).unwrap(), c);
        let r = c.rotate(2);
        assert_eq!(r.to_string(), "001101");
        for i in 0..6 {
            assert_eq!(r.get(i + 2), c.get(i));
        }
    }
}
