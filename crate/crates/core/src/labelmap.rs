//! Label maps: affine invertible transformations of multi-pair Bell
//! labels whose linear part preserves the per-pair symplectic form, and
//! enumeration of the full group they form for small blocks.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use crate::dist::BlockDist;
use crate::error::{Error, Result};
use crate::f2::{bit_at, BinMat};
use crate::label::LabelString;

/// Nonzero parity mask over the `2m` bits of an m-pair label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParityMask {
    m: usize,
    bits: u32,
}

impl ParityMask {
    pub fn new(m: usize, bits: u32) -> Result<Self> {
        if bits == 0 {
            return Err(Error::ZeroMask);
        }
        if m == 0 || bits as u64 >= 1u64 << (2 * m) {
            return Err(Error::InvalidParameter(format!(
                "mask {:b} does not fit a {}-pair block",
                bits, m
            )));
        }
        Ok(Self { m, bits })
    }

    pub fn pair_count(&self) -> usize {
        self.m
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Parity `⟨s, mask⟩` of a packed label index.
    pub fn parity_of(&self, idx: u32) -> u8 {
        ((idx & self.bits).count_ones() & 1) as u8
    }
}

impl fmt::Display for ParityMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..2 * self.m {
            write!(f, "{}", bit_at(self.bits, 2 * self.m, k))?;
        }
        Ok(())
    }
}

impl FromStr for ParityMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let label_bits: LabelString = s.parse()?;
        ParityMask::new(label_bits.pair_count(), label_bits.index())
    }
}

/// Affine invertible map on packed m-pair labels: `x ↦ Lx + t` with `L`
/// symplectic over GF(2). Induced by local unitaries that send
/// multi-copies of Bell states to multi-copies of Bell states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    m: usize,
    linear: BinMat,
    translation: u32,
}

impl LabelMap {
    pub fn new(m: usize, linear: BinMat, translation: u32) -> Result<Self> {
        if linear.dim() != 2 * m {
            return Err(Error::LengthMismatch {
                expected: 2 * m,
                got: linear.dim(),
            });
        }
        if translation as u64 >= 1u64 << (2 * m) {
            return Err(Error::InvalidParameter(format!(
                "translation {:b} does not fit a {}-pair block",
                translation, m
            )));
        }
        if !linear.is_symplectic() {
            return Err(Error::NotSymplectic);
        }
        Ok(Self {
            m,
            linear,
            translation,
        })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            m,
            linear: BinMat::identity(2 * m),
            translation: 0,
        }
    }

    /// Pure relabeling by XOR with `t` (one-sided Pauli flips).
    pub fn translation_map(m: usize, t: u32) -> Result<Self> {
        Self::new(m, BinMat::identity(2 * m), t)
    }

    /// Linear part of the bilateral CNOT from pair `source` to `target`.
    pub fn bcnot_map(source: usize, target: usize, m: usize) -> Result<Self> {
        if source == target {
            return Err(Error::SourceEqualsTarget);
        }
        for idx in [source, target] {
            if idx >= m {
                return Err(Error::PairOutOfRange {
                    index: idx,
                    pairs: m,
                });
            }
        }
        let n = 2 * m;
        let e = |k: usize| 1u32 << (n - 1 - k);
        let mut rows: Vec<u32> = (0..n).map(e).collect();
        rows[2 * source + 1] ^= e(2 * target + 1); // phase_s += phase_t
        rows[2 * target] ^= e(2 * source); // amp_t += amp_s
        Self::new(m, BinMat::new(n, rows)?, 0)
    }

    /// Swap the amp and phase bits of pair `p`.
    pub fn pair_swap(p: usize, m: usize) -> Result<Self> {
        if p >= m {
            return Err(Error::PairOutOfRange { index: p, pairs: m });
        }
        let n = 2 * m;
        let e = |k: usize| 1u32 << (n - 1 - k);
        let mut rows: Vec<u32> = (0..n).map(e).collect();
        rows[2 * p] = e(2 * p + 1);
        rows[2 * p + 1] = e(2 * p);
        Self::new(m, BinMat::new(n, rows)?, 0)
    }

    /// Shear on pair `p`: `(i, j) ↦ (i, i + j)`.
    pub fn pair_shear(p: usize, m: usize) -> Result<Self> {
        if p >= m {
            return Err(Error::PairOutOfRange { index: p, pairs: m });
        }
        let n = 2 * m;
        let e = |k: usize| 1u32 << (n - 1 - k);
        let mut rows: Vec<u32> = (0..n).map(e).collect();
        rows[2 * p + 1] = e(2 * p) | e(2 * p + 1);
        Self::new(m, BinMat::new(n, rows)?, 0)
    }

    pub fn pair_count(&self) -> usize {
        self.m
    }

    pub fn linear(&self) -> &BinMat {
        &self.linear
    }

    pub fn translation(&self) -> u32 {
        self.translation
    }

    #[inline]
    pub fn apply_index(&self, idx: u32) -> u32 {
        self.linear.apply(idx) ^ self.translation
    }

    pub fn apply(&self, s: &LabelString) -> Result<LabelString> {
        if s.pair_count() != self.m {
            return Err(Error::PairCountMismatch {
                left: s.pair_count(),
                right: self.m,
            });
        }
        LabelString::from_index(self.m, self.apply_index(s.index()))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &LabelMap) -> Result<LabelMap> {
        if self.m != other.m {
            return Err(Error::PairCountMismatch {
                left: self.m,
                right: other.m,
            });
        }
        Ok(LabelMap {
            m: self.m,
            linear: self.linear.mul(&other.linear),
            translation: self.linear.apply(other.translation) ^ self.translation,
        })
    }

    pub fn inverse(&self) -> LabelMap {
        let inv = self.linear.inverse().expect("symplectic maps are invertible");
        let translation = inv.apply(self.translation);
        LabelMap {
            m: self.m,
            linear: inv,
            translation,
        }
    }

    /// Wire format `<rows row-major>:<translation bits>` used by the
    /// protocol-tree serialization.
    pub fn wire_format(&self) -> String {
        let n = 2 * self.m;
        let mut s = String::with_capacity(n * n + 1 + n);
        for r in 0..n {
            for c in 0..n {
                s.push(if self.linear.entry(r, c) == 1 { '1' } else { '0' });
            }
        }
        s.push(':');
        for k in 0..n {
            s.push(if bit_at(self.translation, n, k) == 1 { '1' } else { '0' });
        }
        s
    }

    pub fn from_wire(s: &str) -> Result<Self> {
        let (mat, trans) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("relabel wire format needs ':': {:?}", s)))?;
        let n = trans.len();
        if n == 0 || n % 2 != 0 || mat.len() != n * n {
            return Err(Error::Parse(format!(
                "relabel wire format has {} matrix bits for {} translation bits",
                mat.len(),
                n
            )));
        }
        let parse_bits = |chunk: &str| -> Result<u32> {
            let mut v = 0u32;
            for c in chunk.chars() {
                v = (v << 1)
                    | match c {
                        '0' => 0,
                        '1' => 1,
                        _ => return Err(Error::Parse(format!("invalid bit {:?}", c))),
                    };
            }
            Ok(v)
        };
        let rows = (0..n)
            .map(|r| parse_bits(&mat[r * n..(r + 1) * n]))
            .collect::<Result<Vec<_>>>()?;
        LabelMap::new(n / 2, BinMat::new(n, rows)?, parse_bits(trans)?)
    }
}

/// Pushforward of a block distribution: the output probability at label
/// `g(x)` equals the input probability at `x`.
pub fn apply_label_map(g: &LabelMap, d: &BlockDist) -> Result<BlockDist> {
    if g.pair_count() != d.pairs() {
        return Err(Error::PairCountMismatch {
            left: g.pair_count(),
            right: d.pairs(),
        });
    }
    let mut out = vec![0.0; d.len()];
    for (x, &px) in d.probs().iter().enumerate() {
        out[g.apply_index(x as u32) as usize] = px;
    }
    Ok(BlockDist::from_raw(d.pairs(), out))
}

fn pack_matrix(mat: &BinMat) -> u64 {
    mat.rows()
        .iter()
        .enumerate()
        .fold(0u64, |acc, (r, &row)| acc | (row as u64) << (8 * r))
}

/// Generators: all bilateral-CNOT maps plus per-pair amp/phase swaps, as
/// characterized for Bell-basis-preserving local unitaries. Per-pair
/// shears are included as well: without them the closure only reaches
/// the orthogonal subgroup (order 2 and 72 for one and two pairs), while
/// the brute-force symplectic count gives 6 and 720.
fn generators(m: usize) -> Vec<LabelMap> {
    let mut gens = Vec::new();
    for s in 0..m {
        for t in 0..m {
            if s != t {
                gens.push(LabelMap::bcnot_map(s, t, m).unwrap());
            }
        }
    }
    for p in 0..m {
        gens.push(LabelMap::pair_swap(p, m).unwrap());
        gens.push(LabelMap::pair_shear(p, m).unwrap());
    }
    gens
}

fn closure(m: usize) -> Vec<LabelMap> {
    let gens = generators(m);
    let identity = LabelMap::identity(m);
    let mut seen: HashSet<u64> = HashSet::new();
    let mut out: Vec<LabelMap> = Vec::new();
    let mut queue: VecDeque<LabelMap> = VecDeque::new();
    seen.insert(pack_matrix(identity.linear()));
    queue.push_back(identity.clone());
    out.push(identity);
    while let Some(g) = queue.pop_front() {
        for gen in &gens {
            let next = gen.compose(&g).unwrap();
            if seen.insert(pack_matrix(next.linear())) {
                queue.push_back(next.clone());
                out.push(next);
            }
        }
    }
    out.sort_by_key(|g| pack_matrix(g.linear()));
    out
}

/// Count all `2m x 2m` binary matrices preserving the symplectic form,
/// by exhaustive enumeration. Only feasible for one or two pairs.
pub fn count_symplectic_brute_force(m: usize) -> Result<usize> {
    if m == 0 || m > 2 {
        return Err(Error::UnsupportedPairCount(m));
    }
    let n = 2 * m;
    let total: u64 = 1u64 << (n * n);
    let mut count = 0usize;
    for packed in 0..total {
        let rows: Vec<u32> = (0..n)
            .map(|r| ((packed >> (r * n)) as u32) & ((1 << n) - 1))
            .collect();
        let mat = BinMat::new(n, rows).unwrap();
        if mat.is_symplectic() {
            count += 1;
        }
    }
    Ok(count)
}

static GROUP_CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<LabelMap>>>>> = OnceLock::new();

/// All linear label maps on an m-pair block (translations zero), i.e.
/// the full symplectic group over GF(2). Supported for `m ∈ {1, 2, 3}`;
/// the result is cached. Deterministic order.
pub fn enumerate_label_maps(m: usize) -> Result<Arc<Vec<LabelMap>>> {
    if m == 0 || m > 3 {
        return Err(Error::UnsupportedPairCount(m));
    }
    let cache = GROUP_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(group) = guard.get(&m) {
        return Ok(Arc::clone(group));
    }
    let group = Arc::new(closure(m));
    guard.insert(m, Arc::clone(&group));
    Ok(group)
}

/// Order of the enumerated label-map group.
pub fn group_order(m: usize) -> Result<usize> {
    Ok(enumerate_label_maps(m)?.len())
}

/// Number of cosets of the subgroup of maps acting on each pair
/// separately (block-diagonal linear parts). Reported alongside the raw
/// group order; no claim is made about which quotient the literature's
/// "120 possibilities for two copies" refers to.
pub fn per_pair_subgroup_coset_count(m: usize) -> Result<usize> {
    let group = enumerate_label_maps(m)?;
    let block_diagonal = group
        .iter()
        .filter(|g| {
            let n = 2 * m;
            (0..n).all(|r| {
                (0..n).all(|c| r / 2 == c / 2 || g.linear().entry(r, c) == 0)
            })
        })
        .count();
    Ok(group.len() / block_diagonal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::bcnot;

    #[test]
    fn mask_parse_and_parity() {
        let mask: ParityMask = "1010".parse().unwrap();
        assert_eq!(mask.bits(), 0b1010);
        assert_eq!(mask.parity_of(0b1000), 1);
        assert_eq!(mask.parity_of(0b1010), 0);
        assert!("0000".parse::<ParityMask>().is_err());
        assert_eq!(mask.to_string(), "1010");
    }

    #[test]
    fn bcnot_map_matches_operational_bcnot_on_all_two_pair_labels() {
        let g = LabelMap::bcnot_map(0, 1, 2).unwrap();
        for idx in 0..16u32 {
            let s = LabelString::from_index(2, idx).unwrap();
            assert_eq!(g.apply(&s).unwrap(), bcnot(0, 1, &s).unwrap(), "idx={idx}");
        }
        let g = LabelMap::bcnot_map(1, 0, 2).unwrap();
        for idx in 0..16u32 {
            let s = LabelString::from_index(2, idx).unwrap();
            assert_eq!(g.apply(&s).unwrap(), bcnot(1, 0, &s).unwrap(), "idx={idx}");
        }
    }

    #[test]
    fn generators_are_symplectic() {
        for m in 1..=3 {
            for g in generators(m) {
                assert!(g.linear().is_symplectic());
            }
        }
    }

    #[test]
    fn single_pair_group_has_order_six() {
        let group = enumerate_label_maps(1).unwrap();
        assert_eq!(group.len(), 6);
        assert_eq!(count_symplectic_brute_force(1).unwrap(), 6);
        let id = LabelMap::identity(1);
        let swap = LabelMap::pair_swap(0, 1).unwrap();
        assert!(group.iter().any(|g| *g == id));
        assert!(group.iter().any(|g| *g == swap));
    }

    #[test]
    fn two_pair_group_matches_brute_force_count() {
        let group = enumerate_label_maps(2).unwrap();
        assert_eq!(group.len(), 720);
    }

    #[test]
    fn group_is_closed_with_inverses() {
        let group = enumerate_label_maps(1).unwrap();
        let keys: HashSet<u64> = group.iter().map(|g| pack_matrix(g.linear())).collect();
        for a in group.iter() {
            assert!(keys.contains(&pack_matrix(a.inverse().linear())));
            for b in group.iter() {
                assert!(keys.contains(&pack_matrix(a.compose(b).unwrap().linear())));
            }
        }
    }

    #[test]
    fn coset_count_reported_for_two_pairs() {
        // block-diagonal subgroup is Sp(2)^2, order 36
        assert_eq!(per_pair_subgroup_coset_count(2).unwrap(), 720 / 36);
        assert!(enumerate_label_maps(4).is_err());
    }

    #[test]
    fn pushforward_moves_mass_and_preserves_entropy() {
        let w = crate::dist::werner(0.7).unwrap();
        let ww = w.tensor(&w);
        let g = LabelMap::bcnot_map(0, 1, 2).unwrap();
        let out = apply_label_map(&g, &ww).unwrap();
        for x in 0..16u32 {
            assert_eq!(out.prob(g.apply_index(x)), ww.prob(x));
        }
        assert!((out.entropy_bits() - ww.entropy_bits()).abs() < 1e-12);
        let id = LabelMap::identity(2);
        assert_eq!(apply_label_map(&id, &ww).unwrap(), ww);
    }

    #[test]
    fn compose_and_inverse_are_affine_consistent() {
        let g = LabelMap::new(
            2,
            LabelMap::bcnot_map(0, 1, 2).unwrap().linear().clone(),
            0b0110,
        )
        .unwrap();
        let h = LabelMap::new(2, LabelMap::pair_swap(1, 2).unwrap().linear().clone(), 0b1000)
            .unwrap();
        let gh = g.compose(&h).unwrap();
        for x in 0..16u32 {
            assert_eq!(gh.apply_index(x), g.apply_index(h.apply_index(x)));
            assert_eq!(g.inverse().apply_index(g.apply_index(x)), x);
        }
    }

    #[test]
    fn wire_format_round_trip() {
        let g = LabelMap::new(
            2,
            LabelMap::bcnot_map(1, 0, 2).unwrap().linear().clone(),
            0b0101,
        )
        .unwrap();
        let wire = g.wire_format();
        let back = LabelMap::from_wire(&wire).unwrap();
        assert_eq!(g, back);
        assert_eq!(wire, back.wire_format());
        assert!(LabelMap::from_wire("101:01").is_err());
    }
}
