//! Probability distributions over the `4^m` labels of an m-pair block.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::label::LabelString;

/// Tolerance for probability-sum checks.
pub const SUM_TOL: f64 = 1e-12;

/// Branch probabilities below this are treated as exactly zero.
pub const BRANCH_EPS: f64 = 1e-15;

pub(crate) fn log2(x: f64) -> f64 {
    x.log2()
}

/// Shannon entropy in bits of an already-normalized slice; 0·log 0 = 0.
pub(crate) fn shannon(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * log2(x))
        .sum::<f64>()
}

/// Binary entropy of the pair `(a, b)` with `a + b = 1`.
pub(crate) fn shannon_pair(a: f64, b: f64) -> f64 {
    shannon(&[a, b])
}

/// Shannon entropy in bits of a probability vector.
/// Entries must be nonnegative and sum to 1 within [`SUM_TOL`].
pub fn entropy(p: &[f64]) -> Result<f64> {
    validate_probabilities(p)?;
    Ok(shannon(p))
}

/// Entropy of `p / Σp` for a nonnegative vector with at least one
/// positive entry.
pub fn normalized_entropy(p: &[f64]) -> Result<f64> {
    for (i, &x) in p.iter().enumerate() {
        if x < 0.0 {
            return Err(Error::NegativeProbability { index: i, value: x });
        }
    }
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZero);
    }
    Ok(p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let q = x / total;
            -q * log2(q)
        })
        .sum())
}

fn validate_probabilities(p: &[f64]) -> Result<()> {
    for (i, &x) in p.iter().enumerate() {
        if !(x >= 0.0) {
            return Err(Error::NegativeProbability { index: i, value: x });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::ProbabilitySum { sum, tol: SUM_TOL });
    }
    Ok(())
}

/// Probability distribution over the `4^m` labels of an m-pair block,
/// indexed by [`LabelString::index`] (lexicographic bit order).
///
/// `m = 0` denotes the empty block left behind after measuring the last
/// pair; its single entry is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDist {
    m: usize,
    p: Vec<f64>,
}

impl BlockDist {
    pub fn new(m: usize, p: Vec<f64>) -> Result<Self> {
        let expected = 1usize << (2 * m);
        if p.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: p.len(),
            });
        }
        validate_probabilities(&p)?;
        Ok(Self { m, p })
    }

    /// Single-pair distribution from a spectrum in label order 00,01,10,11.
    pub fn from_spectrum(spectrum: [f64; 4]) -> Result<Self> {
        Self::new(1, spectrum.to_vec())
    }

    /// Point mass on one label.
    pub fn delta(label: LabelString) -> Self {
        let mut p = vec![0.0; 1 << (2 * label.pair_count())];
        p[label.index() as usize] = 1.0;
        Self {
            m: label.pair_count(),
            p,
        }
    }

    /// The empty block (m = 0).
    pub fn empty() -> Self {
        Self { m: 0, p: vec![1.0] }
    }

    pub fn uniform(m: usize) -> Self {
        let len = 1usize << (2 * m);
        Self {
            m,
            p: vec![1.0 / len as f64; len],
        }
    }

    pub(crate) fn from_raw(m: usize, p: Vec<f64>) -> Self {
        debug_assert_eq!(p.len(), 1usize << (2 * m));
        Self { m, p }
    }

    pub fn pairs(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn prob(&self, idx: u32) -> f64 {
        self.p[idx as usize]
    }

    /// Shannon entropy of the label distribution, in bits.
    pub fn entropy_bits(&self) -> f64 {
        shannon(&self.p)
    }

    /// Single-pair spectrum accessor.
    pub fn spectrum(&self) -> Result<[f64; 4]> {
        if self.m != 1 {
            return Err(Error::PairCountMismatch {
                left: self.m,
                right: 1,
            });
        }
        Ok([self.p[0], self.p[1], self.p[2], self.p[3]])
    }

    /// Product distribution over concatenated labels.
    pub fn tensor(&self, other: &BlockDist) -> BlockDist {
        let m = self.m + other.m;
        let mut p = Vec::with_capacity(self.p.len() * other.p.len());
        for &a in &self.p {
            for &b in &other.p {
                p.push(a * b);
            }
        }
        BlockDist { m, p }
    }

    /// n-fold tensor power.
    pub fn tensor_power(&self, n: usize) -> Result<BlockDist> {
        if n == 0 {
            return Err(Error::InvalidParameter("tensor power needs n >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        Ok(out)
    }

    /// Plain-text serialization: `m=<int>` then one `label<TAB>probability`
    /// line per label in lexicographic order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "m={}", self.m).unwrap();
        for idx in 0..self.p.len() {
            let label = LabelString::from_index(self.m, idx as u32).unwrap();
            writeln!(s, "{}\t{:.16e}", label, self.p[idx]).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let m: usize = header
            .strip_prefix("m=")
            .ok_or_else(|| Error::Parse(format!("expected m=<int>, got {:?}", header)))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad pair count: {}", e)))?;
        if m == 0 || m > 15 {
            return Err(Error::Parse(format!("pair count {} outside 1..=15", m)));
        }
        let mut p = vec![0.0; 1 << (2 * m)];
        let mut seen = vec![false; p.len()];
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (label, prob) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("expected label<TAB>prob: {:?}", line)))?;
            let label: LabelString = label.parse()?;
            if label.pair_count() != m {
                return Err(Error::Parse(format!(
                    "label {} has {} pairs, header says {}",
                    label,
                    label.pair_count(),
                    m
                )));
            }
            let idx = label.index() as usize;
            if seen[idx] {
                return Err(Error::Parse(format!("duplicate label {}", label)));
            }
            seen[idx] = true;
            p[idx] = prob
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad probability: {}", e)))?;
        }
        Self::new(m, p)
    }
}

/// Werner-state parameter: the fidelity `f = λ00`, restricted to (1/4, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParams {
    f: f64,
}

impl WernerParams {
    pub fn new(f: f64) -> Result<Self> {
        if !(f > 0.25 && f <= 1.0) {
            return Err(Error::FidelityRange(f));
        }
        Ok(Self { f })
    }

    pub fn fidelity(&self) -> f64 {
        self.f
    }

    /// Whether the state is entangled (`f > 1/2`).
    pub fn is_entangled(&self) -> bool {
        self.f > 0.5
    }
}

/// Spectrum `(f, (1-f)/3, (1-f)/3, (1-f)/3)` of the Werner state.
pub fn werner_dist(w: WernerParams) -> BlockDist {
    let t = (1.0 - w.f) / 3.0;
    BlockDist::from_raw(1, vec![w.f, t, t, t])
}

/// Shorthand for `werner_dist(WernerParams::new(f)?)`.
pub fn werner(f: f64) -> Result<BlockDist> {
    Ok(werner_dist(WernerParams::new(f)?))
}
