//! Classical labels of Bell states and of tensor products of Bell states.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::f2;

/// 2-bit label of a single Bell state: amplitude bit and phase bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellLabel {
    pub amp: bool,
    pub phase: bool,
}

impl BellLabel {
    pub fn new(amp: bool, phase: bool) -> Self {
        Self { amp, phase }
    }

    /// Index in spectrum order: 00, 01, 10, 11.
    pub fn index(self) -> usize {
        ((self.amp as usize) << 1) | self.phase as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        if i > 3 {
            return Err(Error::InvalidParameter(format!(
                "Bell label index {} out of range 0..=3",
                i
            )));
        }
        Ok(Self {
            amp: i & 2 != 0,
            phase: i & 1 != 0,
        })
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.amp as u8, self.phase as u8)
    }
}

/// Interleaved bit string `(i1, j1, …, im, jm)` naming one m-pair Bell
/// product. Lexicographic order of strings equals numeric order of
/// [`LabelString::index`], which indexes probability vectors everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelString {
    m: usize,
    idx: u32,
}

impl LabelString {
    pub fn from_index(m: usize, idx: u32) -> Result<Self> {
        if m == 0 || m > 15 {
            return Err(Error::InvalidParameter(format!(
                "pair count {} outside 1..=15",
                m
            )));
        }
        if idx as u64 >= 1u64 << (2 * m) {
            return Err(Error::InvalidParameter(format!(
                "label index {} out of range for {} pairs",
                idx, m
            )));
        }
        Ok(Self { m, idx })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() % 2 != 0 || bits.is_empty() {
            return Err(Error::Parse(format!(
                "label needs a positive even number of bits, got {}",
                bits.len()
            )));
        }
        let m = bits.len() / 2;
        let mut idx = 0u32;
        for &b in bits {
            if b > 1 {
                return Err(Error::Parse(format!("label bit {} is not 0/1", b)));
            }
            idx = (idx << 1) | b as u32;
        }
        Self::from_index(m, idx)
    }

    pub fn from_pairs(pairs: &[BellLabel]) -> Result<Self> {
        let mut idx = 0u32;
        for p in pairs {
            idx = (idx << 2) | p.index() as u32;
        }
        Self::from_index(pairs.len(), idx)
    }

    pub fn pair_count(&self) -> usize {
        self.m
    }

    /// Big-endian packed value; doubles as the position in a probability
    /// vector over all `4^m` labels.
    pub fn index(&self) -> u32 {
        self.idx
    }

    pub fn bit(&self, k: usize) -> u8 {
        f2::bit_at(self.idx, 2 * self.m, k)
    }

    pub fn pair(&self, p: usize) -> Result<BellLabel> {
        if p >= self.m {
            return Err(Error::PairOutOfRange {
                index: p,
                pairs: self.m,
            });
        }
        Ok(BellLabel {
            amp: self.bit(2 * p) != 0,
            phase: self.bit(2 * p + 1) != 0,
        })
    }

    pub fn with_pair(&self, p: usize, label: BellLabel) -> Result<Self> {
        if p >= self.m {
            return Err(Error::PairOutOfRange {
                index: p,
                pairs: self.m,
            });
        }
        let mut idx = f2::with_bit(self.idx, 2 * self.m, 2 * p, label.amp as u8);
        idx = f2::with_bit(idx, 2 * self.m, 2 * p + 1, label.phase as u8);
        Ok(Self { m: self.m, idx })
    }

    pub fn pairs(&self) -> Vec<BellLabel> {
        (0..self.m).map(|p| self.pair(p).unwrap()).collect()
    }
}

impl fmt::Display for LabelString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..2 * self.m {
            write!(f, "{}", self.bit(k))?;
        }
        Ok(())
    }
}

impl FromStr for LabelString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("invalid label character {:?}", c))),
            })
            .collect::<Result<_>>()?;
        Self::from_bits(&bits)
    }
}

/// Bilateral CNOT on the labels of two pairs of `s`: with `(i, j)` at
/// `source` and `(k, l)` at `target`, the pairs become `(i, j+l)` and
/// `(k+i, l)`. Applying it twice with fixed roles returns the input.
pub fn bcnot(source: usize, target: usize, s: &LabelString) -> Result<LabelString> {
    if source == target {
        return Err(Error::SourceEqualsTarget);
    }
    let src = s.pair(source)?;
    let tgt = s.pair(target)?;
    let s = s.with_pair(
        source,
        BellLabel {
            amp: src.amp,
            phase: src.phase ^ tgt.phase,
        },
    )?;
    s.with_pair(
        target,
        BellLabel {
            amp: tgt.amp ^ src.amp,
            phase: tgt.phase,
        },
    )
}
