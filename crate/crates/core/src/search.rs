//! Exhaustive optimization over protocol trees built from asymptotic
//! parity checks, local Bell measurements and label maps.
//!
//! The search value satisfies
//! `V(d) = max(hash, 0, parity checks, measurements, relabelings)`,
//! where parity checks range over masks whose parity is not already
//! determined on the support of `d` (deterministic masks are value-
//! neutral no-ops) and relabelings are folded into the measurement
//! action: measuring after a label map is equivalent to measuring the
//! parity functional `phi = gᵀe`, and any two symplectic completions of
//! the same functional give value-equal children. Label maps in front
//! of parity checks or terminal nodes never change the value, so this
//! action set covers the full protocol class.
//!
//! Each memo entry stores the serialized best subtree, so tie-breaking
//! and tree extraction never re-expand states.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::dist::{BlockDist, BRANCH_EPS};
use crate::error::{Error, Result};
use crate::f2::{symplectic_completion, F2Basis};
use crate::labelmap::{apply_label_map, enumerate_label_maps, LabelMap, ParityMask};
use crate::protocol::{bell_measure, hashing_yield, parity_split, MeasuredBit, ProtocolNode};
use crate::rates::{best_recurrence_then_hash, rate_2copy, rate_asymptotic_recurrence};

/// Value ties within this tolerance are broken by tree shape.
const TIE_TOL: f64 = 1e-12;

/// Configuration of the protocol search.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Largest block the search accepts; at most 4 for exhaustive
    /// search, at most 6 with beam pruning.
    pub max_pairs: usize,
    /// Memoize states by the minimum of their label-map orbit instead
    /// of the raw probability vector. Requires relabelings in the
    /// action set to be sound.
    pub canonicalization: bool,
    /// Quantization step for memo keys.
    pub memo_tolerance: f64,
    pub use_parity_checks: bool,
    pub use_measurements: bool,
    pub use_relabelings: bool,
    /// Beam width for blocks of 5+ pairs; `None` means exhaustive
    /// (only allowed up to 4 pairs).
    pub beam_width: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_pairs: 4,
            canonicalization: true,
            memo_tolerance: 1e-10,
            use_parity_checks: true,
            use_measurements: true,
            use_relabelings: true,
            beam_width: None,
        }
    }
}

/// One node of the search: the current block, the basis of parity masks
/// checked along the path, and the path depth.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub dist: BlockDist,
    pub checked_masks: F2Basis,
    pub depth: usize,
}

impl SearchState {
    pub fn root(dist: BlockDist) -> Self {
        Self {
            dist,
            checked_masks: F2Basis::new(),
            depth: 0,
        }
    }
}

/// Memoization key: the orbit-minimal (or raw) probability vector,
/// quantized to the memo tolerance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalKey {
    m: usize,
    quantized: Vec<u64>,
}

fn quantize(v: &[f64], tol: f64) -> Vec<u64> {
    v.iter().map(|&x| (x / tol).round() as i64 as u64).collect()
}

/// Inverse permutation tables of the label-map group on packed indices,
/// used to stream orbit pushforwards in output order.
struct CanonTable {
    inv_perms: Vec<Vec<u16>>,
}

fn build_canon_table(m: usize) -> Result<CanonTable> {
    let group = enumerate_label_maps(m)?;
    let len = 1usize << (2 * m);
    let inv_perms = group
        .iter()
        .map(|g| {
            let mut perm = vec![0u16; len];
            for x in 0..len as u32 {
                perm[g.apply_index(x) as usize] = x as u16;
            }
            perm
        })
        .collect();
    Ok(CanonTable { inv_perms })
}

fn canonical_vector_with(d: &BlockDist, table: &CanonTable) -> Vec<f64> {
    let len = d.len();
    let p = d.probs();
    let mut best: Vec<f64> = p.to_vec();
    for inv in &table.inv_perms {
        for t in 0..len as u32 {
            // lexicographic compare of the pushforward against best
            let mut replace = false;
            for y in 0..len {
                let cand = p[inv[(y as u32 ^ t) as usize] as usize];
                if cand < best[y] {
                    replace = true;
                    break;
                }
                if cand > best[y] {
                    break;
                }
            }
            if replace {
                for y in 0..len {
                    best[y] = p[inv[(y as u32 ^ t) as usize] as usize];
                }
            }
        }
    }
    best
}

/// Orbit-canonical memo key: the lexicographically minimal pushforward
/// of `d` over all enumerated label maps and translations, quantized.
/// Distributions related by any label map share a key.
pub fn canonicalize(d: &BlockDist, memo_tolerance: f64) -> Result<CanonicalKey> {
    if !(memo_tolerance > 0.0) {
        return Err(Error::InvalidParameter(
            "memo tolerance must be positive".into(),
        ));
    }
    if d.pairs() == 0 {
        return Ok(CanonicalKey {
            m: 0,
            quantized: quantize(d.probs(), memo_tolerance),
        });
    }
    let table = build_canon_table(d.pairs())?;
    Ok(CanonicalKey {
        m: d.pairs(),
        quantized: quantize(&canonical_vector_with(d, &table), memo_tolerance),
    })
}

/// Value, tree depth and serialized form of the best subtree at a state.
#[derive(Debug, Clone)]
struct Outcome {
    value: f64,
    depth: u32,
    text: Arc<String>,
}

/// A candidate action with its children's serialized subtrees; the full
/// text is only rendered when the candidate survives tie-breaking.
struct Candidate {
    value: f64,
    depth: u32,
    shape: Shape,
}

enum Shape {
    Hash,
    Discard,
    Pc {
        mask: ParityMask,
        t0: Option<Arc<String>>,
        t1: Option<Arc<String>>,
    },
    Meas {
        pair: usize,
        which: MeasuredBit,
        t0: Option<Arc<String>>,
        t1: Option<Arc<String>>,
    },
    RelabelMeas {
        wire: String,
        pair: usize,
        t0: Option<Arc<String>>,
        t1: Option<Arc<String>>,
    },
}

fn indent(block: &str) -> String {
    let mut out = String::with_capacity(block.len() + block.lines().count() * 2);
    for line in block.lines() {
        out.push_str("  ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn child_text(t: &Option<Arc<String>>) -> &str {
    t.as_deref().map(|s| s.as_str()).unwrap_or("DISCARD\n")
}

impl Shape {
    fn render(&self) -> String {
        match self {
            Shape::Hash => "HASH\n".to_string(),
            Shape::Discard => "DISCARD\n".to_string(),
            Shape::Pc { mask, t0, t1 } => format!(
                "PC {}\n{}{}",
                mask,
                indent(child_text(t0)),
                indent(child_text(t1))
            ),
            Shape::Meas {
                pair,
                which,
                t0,
                t1,
            } => format!(
                "MEAS {} {}\n{}{}",
                pair,
                which,
                indent(child_text(t0)),
                indent(child_text(t1))
            ),
            Shape::RelabelMeas { wire, pair, t0, t1 } => {
                let meas = format!(
                    "MEAS {} amp\n{}{}",
                    pair,
                    indent(child_text(t0)),
                    indent(child_text(t1))
                );
                format!("RELABEL {}\n{}", wire, indent(&meas))
            }
        }
    }
}

/// Fresh parity masks and the deterministic subspace of a support set.
struct MaskClasses {
    /// Basis of masks with constant parity on the support.
    deterministic: F2Basis,
    /// One representative per non-deterministic mask coset.
    fresh: Vec<u32>,
}

struct Searcher {
    cfg: SearchConfig,
    memo: HashMap<CanonicalKey, Outcome>,
    /// Raw-key alias table, so repeated identical children skip the
    /// orbit scan.
    key_cache: HashMap<CanonicalKey, CanonicalKey>,
    canon_tables: HashMap<usize, Arc<CanonTable>>,
    completions: HashMap<(usize, u32), Arc<LabelMap>>,
}

impl Searcher {
    fn new(cfg: SearchConfig) -> Self {
        Self {
            cfg,
            memo: HashMap::new(),
            key_cache: HashMap::new(),
            canon_tables: HashMap::new(),
            completions: HashMap::new(),
        }
    }

    fn raw_key(&self, d: &BlockDist) -> CanonicalKey {
        CanonicalKey {
            m: d.pairs(),
            quantized: quantize(d.probs(), self.cfg.memo_tolerance),
        }
    }

    fn memo_key(&mut self, d: &BlockDist) -> Result<CanonicalKey> {
        let m = d.pairs();
        // Canonical keys are only sound when relabelings are actions.
        // Beyond two pairs the group table (1451520 elements at m = 3)
        // costs more than the dedup saves, so raw keys are used there.
        if !(self.cfg.canonicalization && self.cfg.use_relabelings && (1..=2).contains(&m)) {
            return Ok(self.raw_key(d));
        }
        let raw = self.raw_key(d);
        if let Some(canon) = self.key_cache.get(&raw) {
            return Ok(canon.clone());
        }
        let table = match self.canon_tables.get(&m) {
            Some(t) => Arc::clone(t),
            None => {
                let t = Arc::new(build_canon_table(m)?);
                self.canon_tables.insert(m, Arc::clone(&t));
                t
            }
        };
        let canon = CanonicalKey {
            m,
            quantized: quantize(&canonical_vector_with(d, &table), self.cfg.memo_tolerance),
        };
        self.key_cache.insert(raw, canon.clone());
        Ok(canon)
    }

    fn completion(&mut self, m: usize, phi: u32) -> Result<Arc<LabelMap>> {
        if let Some(g) = self.completions.get(&(m, phi)) {
            return Ok(Arc::clone(g));
        }
        let mat = symplectic_completion(phi, 2 * m)?;
        let g = Arc::new(LabelMap::new(m, mat, 0)?);
        self.completions.insert((m, phi), Arc::clone(&g));
        Ok(g)
    }

    fn mask_classes(&self, d: &BlockDist) -> MaskClasses {
        let n = 2 * d.pairs();
        let support: Vec<u32> = d
            .probs()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > BRANCH_EPS)
            .map(|(idx, _)| idx as u32)
            .collect();
        let mut diff = F2Basis::new();
        for &s in &support[1..] {
            diff.insert(s ^ support[0]);
        }
        let deterministic = diff.orthogonal_complement(n);
        let mut seen = HashSet::new();
        let mut fresh = Vec::new();
        for mask in 1..(1u32 << n) {
            let rep = deterministic.reduce(mask);
            if rep == 0 {
                continue; // parity already determined on the support
            }
            if seen.insert(rep) {
                fresh.push(rep);
            }
        }
        MaskClasses {
            deterministic,
            fresh,
        }
    }

    fn value(&mut self, state: &SearchState) -> Result<Outcome> {
        let d = &state.dist;
        let m = d.pairs();
        if m == 0 {
            return Ok(Outcome {
                value: 0.0,
                depth: 0,
                text: Arc::new("DISCARD\n".to_string()),
            });
        }
        let key = self.memo_key(d)?;
        if let Some(entry) = self.memo.get(&key) {
            return Ok(entry.clone());
        }
        let classes = self.mask_classes(d);
        let mut candidates: Vec<Candidate> = vec![
            Candidate {
                value: hashing_yield(d),
                depth: 0,
                shape: Shape::Hash,
            },
            Candidate {
                value: 0.0,
                depth: 0,
                shape: Shape::Discard,
            },
        ];
        if self.cfg.use_parity_checks {
            let mut masks = classes.fresh.clone();
            if let Some(width) = self.beam_at(m) {
                masks = self.beam_select_masks(d, masks, width)?;
            }
            for mask_bits in masks {
                let mask = ParityMask::new(m, mask_bits)?;
                let split = parity_split(d, &mask)?;
                let (b0, b1) = match (&split.branch0, &split.branch1) {
                    (Some(b0), Some(b1)) => (b0, b1),
                    // numerically one-sided: value-neutral, skip
                    _ => continue,
                };
                let o0 = self.value(&self.child_state(state, b0, Some(mask_bits)))?;
                let o1 = self.value(&self.child_state(state, b1, Some(mask_bits)))?;
                candidates.push(Candidate {
                    value: -split.cost + split.mu0 * o0.value + split.mu1 * o1.value,
                    depth: 1 + o0.depth.max(o1.depth),
                    shape: Shape::Pc {
                        mask,
                        t0: Some(o0.text),
                        t1: Some(o1.text),
                    },
                });
            }
        }
        if self.cfg.use_measurements {
            let mut phis: Vec<u32> = if self.cfg.use_relabelings {
                // one representative per coset of the deterministic
                // subspace: completions of equivalent functionals give
                // children related by a label map on the remaining pairs
                let mut seen = HashSet::new();
                (1..(1u32 << (2 * m)))
                    .filter(|&phi| seen.insert(classes.deterministic.reduce(phi)))
                    .collect()
            } else {
                (0..2 * m).map(|pos| 1u32 << (2 * m - 1 - pos)).collect()
            };
            if let Some(width) = self.beam_at(m) {
                phis = self.beam_select_phis(d, phis, width)?;
            }
            for phi in phis {
                candidates.push(self.measurement_candidate(state, phi)?);
            }
        }
        let best = pick_best(candidates);
        self.memo.insert(key, best.clone());
        Ok(best)
    }

    fn child_state(
        &self,
        parent: &SearchState,
        dist: &BlockDist,
        new_mask: Option<u32>,
    ) -> SearchState {
        let mut checked = parent.checked_masks.clone();
        if let Some(mask) = new_mask {
            checked.insert(mask);
            debug_assert!(checked.rank() <= 2 * dist.pairs());
        }
        SearchState {
            dist: dist.clone(),
            checked_masks: checked,
            depth: parent.depth + 1,
        }
    }

    /// Candidate for measuring the parity functional `phi`: a plain
    /// Bell measurement for coordinate functionals, otherwise a
    /// relabeling mapping `phi` onto the last pair's amp bit followed
    /// by one.
    fn measurement_candidate(&mut self, state: &SearchState, phi: u32) -> Result<Candidate> {
        let d = &state.dist;
        let m = d.pairs();
        let (out, shape_of) = if phi.count_ones() == 1 {
            let pos = 2 * m - 1 - phi.trailing_zeros() as usize;
            let which = if pos % 2 == 0 {
                MeasuredBit::Amp
            } else {
                MeasuredBit::Phase
            };
            let out = bell_measure(d, pos / 2, which)?;
            let pair = pos / 2;
            (
                out,
                Box::new(move |t0, t1| Shape::Meas {
                    pair,
                    which,
                    t0,
                    t1,
                }) as Box<dyn FnOnce(Option<Arc<String>>, Option<Arc<String>>) -> Shape>,
            )
        } else {
            let g = self.completion(m, phi)?;
            let pushed = apply_label_map(&g, d)?;
            let out = bell_measure(&pushed, m - 1, MeasuredBit::Amp)?;
            let wire = g.wire_format();
            let pair = m - 1;
            (
                out,
                Box::new(move |t0, t1| Shape::RelabelMeas { wire, pair, t0, t1 })
                    as Box<dyn FnOnce(Option<Arc<String>>, Option<Arc<String>>) -> Shape>,
            )
        };
        let mut value = 0.0;
        let mut depth = 0u32;
        let mut texts: [Option<Arc<String>>; 2] = [None, None];
        for (slot, (q, branch)) in [(out.q0, &out.r0), (out.q1, &out.r1)].into_iter().enumerate() {
            if let Some(rb) = branch {
                let child = SearchState {
                    dist: rb.clone(),
                    checked_masks: F2Basis::new(),
                    depth: state.depth + 1,
                };
                let o = self.value(&child)?;
                value += q * o.value;
                depth = depth.max(o.depth);
                texts[slot] = Some(o.text);
            }
        }
        let [t0, t1] = texts;
        Ok(Candidate {
            value,
            depth: 1 + depth,
            shape: shape_of(t0, t1),
        })
    }

    fn beam_at(&self, m: usize) -> Option<usize> {
        match self.cfg.beam_width {
            Some(w) if m >= 5 => Some(w),
            _ => None,
        }
    }

    fn beam_select_masks(&self, d: &BlockDist, masks: Vec<u32>, width: usize) -> Result<Vec<u32>> {
        let mut scored: Vec<(f64, u32)> = masks
            .into_iter()
            .map(|bits| {
                let mask = ParityMask::new(d.pairs(), bits)?;
                let split = parity_split(d, &mask)?;
                let mut score = -split.cost;
                if let Some(b) = &split.branch0 {
                    score += split.mu0 * hashing_yield(b);
                }
                if let Some(b) = &split.branch1 {
                    score += split.mu1 * hashing_yield(b);
                }
                Ok((score, bits))
            })
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        Ok(scored.into_iter().take(width).map(|(_, b)| b).collect())
    }

    fn beam_select_phis(&mut self, d: &BlockDist, phis: Vec<u32>, width: usize) -> Result<Vec<u32>> {
        let m = d.pairs();
        let mut scored: Vec<(f64, u32)> = Vec::with_capacity(phis.len());
        for phi in phis {
            let out = if phi.count_ones() == 1 {
                let pos = 2 * m - 1 - phi.trailing_zeros() as usize;
                let which = if pos % 2 == 0 {
                    MeasuredBit::Amp
                } else {
                    MeasuredBit::Phase
                };
                bell_measure(d, pos / 2, which)?
            } else {
                let g = self.completion(m, phi)?;
                bell_measure(&apply_label_map(&g, d)?, m - 1, MeasuredBit::Amp)?
            };
            let mut score = 0.0;
            if let Some(r) = &out.r0 {
                score += out.q0 * hashing_yield(r);
            }
            if let Some(r) = &out.r1 {
                score += out.q1 * hashing_yield(r);
            }
            scored.push((score, phi));
        }
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        Ok(scored.into_iter().take(width).map(|(_, b)| b).collect())
    }
}

/// Highest value wins; floating-point ties prefer shallower trees, then
/// the lexicographically smaller serialized form.
fn pick_best(candidates: Vec<Candidate>) -> Outcome {
    let vmax = candidates
        .iter()
        .map(|c| c.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut tied: Vec<Candidate> = candidates
        .into_iter()
        .filter(|c| c.value >= vmax - TIE_TOL)
        .collect();
    let dmin = tied.iter().map(|c| c.depth).min().unwrap();
    tied.retain(|c| c.depth == dmin);
    let mut best: Option<(String, u32)> = None;
    for cand in tied {
        let text = cand.shape.render();
        match &best {
            Some((t, _)) if *t <= text => {}
            _ => best = Some((text, cand.depth)),
        }
    }
    let (text, depth) = best.unwrap();
    Outcome {
        value: vmax,
        depth,
        text: Arc::new(text),
    }
}

/// Find the best protocol tree for `d`; returns the optimal rate in
/// ebits per initial copy along with a tree achieving it.
pub fn optimize(d: &BlockDist, cfg: &SearchConfig) -> Result<(f64, ProtocolNode)> {
    if cfg.max_pairs == 0 || cfg.max_pairs > 6 {
        return Err(Error::InvalidParameter(
            "max_pairs must lie in 1..=6".into(),
        ));
    }
    if d.pairs() == 0 {
        return Err(Error::InvalidParameter(
            "optimize needs a block with at least one pair".into(),
        ));
    }
    if d.pairs() > cfg.max_pairs {
        return Err(Error::BlockTooLarge {
            pairs: d.pairs(),
            limit: cfg.max_pairs,
        });
    }
    if d.pairs() >= 5 && cfg.beam_width.is_none() {
        return Err(Error::InvalidParameter(
            "exhaustive search is limited to 4 pairs; set a beam width for larger blocks".into(),
        ));
    }
    let mut searcher = Searcher::new(cfg.clone());
    let root = SearchState::root(d.clone());
    let outcome = searcher.value(&root)?;
    let tree = ProtocolNode::from_text(&outcome.text)?;
    Ok((outcome.value / d.pairs() as f64, tree))
}

/// One row of the Werner-state rate table.
#[derive(Debug, Clone, PartialEq)]
pub struct WernerCurveRow {
    pub f: f64,
    pub hash: f64,
    pub asym_rec: f64,
    pub two_copy: f64,
    pub rec_hash: f64,
    pub optimized: f64,
}

/// Werner-state rate table over a fidelity grid.
#[derive(Debug, Clone)]
pub struct WernerCurve {
    pub rows: Vec<WernerCurveRow>,
    /// Best tree found for each grid point, in row order.
    pub trees: Vec<ProtocolNode>,
    /// Descriptions of any monotonicity violations between grid points.
    pub warnings: Vec<String>,
}

impl WernerCurve {
    /// CSV with 12 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f,hash,asym_rec,two_copy,rec_hash,optimized\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_sig(r.f),
                fmt_sig(r.hash),
                fmt_sig(r.asym_rec),
                fmt_sig(r.two_copy),
                fmt_sig(r.rec_hash),
                fmt_sig(r.optimized),
            ));
        }
        out
    }
}

/// Format with 12 significant digits, locale-independent.
pub fn fmt_sig(x: f64) -> String {
    format!("{:.11e}", x)
}

/// Maximum recurrence rounds swept for the recurrence+hash column.
pub const CURVE_MAX_ROUNDS: usize = 20;

/// Compute all reference rates and the optimized 2-copy search rate on
/// a grid of Werner fidelities in (1/2, 1]. Each column is checked for
/// monotonicity in `f`; violations are reported, not fatal.
pub fn werner_curve(f_grid: &[f64], cfg: &SearchConfig) -> Result<WernerCurve> {
    if cfg.max_pairs < 2 {
        return Err(Error::InvalidParameter(
            "the optimized column searches 2-copy blocks; max_pairs must be at least 2".into(),
        ));
    }
    let mut rows = Vec::with_capacity(f_grid.len());
    let mut trees = Vec::with_capacity(f_grid.len());
    for &f in f_grid {
        if !(f > 0.5 && f <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grid point {} outside the entangled Werner region (1/2, 1]",
                f
            )));
        }
        let d = crate::dist::werner(f)?;
        let two = d.tensor(&d);
        let (optimized, tree) = optimize(&two, cfg)?;
        trees.push(tree);
        rows.push(WernerCurveRow {
            f,
            hash: 1.0 - d.entropy_bits(),
            asym_rec: rate_asymptotic_recurrence(&d)?,
            two_copy: rate_2copy(&d)?,
            rec_hash: best_recurrence_then_hash(&d, CURVE_MAX_ROUNDS)?,
            optimized,
        });
    }
    let mut warnings = Vec::new();
    let columns: [(&str, fn(&WernerCurveRow) -> f64); 5] = [
        ("hash", |r| r.hash),
        ("asym_rec", |r| r.asym_rec),
        ("two_copy", |r| r.two_copy),
        ("rec_hash", |r| r.rec_hash),
        ("optimized", |r| r.optimized),
    ];
    for window in rows.windows(2) {
        for (name, get) in &columns {
            if get(&window[1]) < get(&window[0]) - 1e-9 {
                warnings.push(format!(
                    "{} decreases from {} at f={} to {} at f={}",
                    name,
                    get(&window[0]),
                    window[0].f,
                    get(&window[1]),
                    window[1].f
                ));
            }
        }
    }
    Ok(WernerCurve {
        rows,
        trees,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::werner;
    use crate::label::LabelString;
    use crate::protocol::evaluate;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_dist(m: usize, rng: &mut StdRng) -> BlockDist {
        let len = 1usize << (2 * m);
        let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        BlockDist::new(m, raw.into_iter().map(|x| x / total).collect()).unwrap()
    }

    #[test]
    fn canonical_key_is_orbit_invariant() {
        let mut rng = StdRng::seed_from_u64(1);
        let d = random_dist(2, &mut rng);
        let key = canonicalize(&d, 1e-10).unwrap();
        let group = enumerate_label_maps(2).unwrap();
        for (i, g) in group.iter().enumerate().step_by(37) {
            let moved = apply_label_map(g, &d).unwrap();
            assert_eq!(canonicalize(&moved, 1e-10).unwrap(), key, "g #{}", i);
        }
        // translations too
        let t = LabelMap::translation_map(2, 0b0110).unwrap();
        let moved = apply_label_map(&t, &d).unwrap();
        assert_eq!(canonicalize(&moved, 1e-10).unwrap(), key);
    }

    #[test]
    fn canonical_keys_distinguish_independent_distributions() {
        let mut rng = StdRng::seed_from_u64(2);
        let mut keys = std::collections::HashSet::new();
        for _ in 0..20 {
            let d = random_dist(2, &mut rng);
            assert!(keys.insert(canonicalize(&d, 1e-10).unwrap()));
        }
    }

    #[test]
    fn canonicalize_needs_an_enumerated_group() {
        let d = BlockDist::uniform(4);
        assert!(canonicalize(&d, 1e-10).is_err());
    }

    #[test]
    fn optimize_delta_is_hash() {
        let d = BlockDist::delta("00".parse::<LabelString>().unwrap());
        let (rate, tree) = optimize(&d, &SearchConfig::default()).unwrap();
        assert_abs_diff_eq!(rate, 1.0, epsilon = 1e-15);
        assert_eq!(tree, ProtocolNode::Hash);
    }

    #[test]
    fn optimize_hash_discard_only_clamps_hashing() {
        let cfg = SearchConfig {
            use_parity_checks: false,
            use_measurements: false,
            use_relabelings: false,
            ..SearchConfig::default()
        };
        for f in [0.55, 0.7, 0.85, 0.95] {
            let d = werner(f).unwrap();
            let (rate, tree) = optimize(&d, &cfg).unwrap();
            let hash = 1.0 - d.entropy_bits();
            assert_abs_diff_eq!(rate, hash.max(0.0), epsilon = 1e-12);
            if hash < 0.0 {
                assert_eq!(tree, ProtocolNode::Discard);
            }
        }
    }

    #[test]
    fn optimize_dominates_reference_protocols_on_two_copies() {
        let cfg = SearchConfig::default();
        for f in [0.55, 0.75, 0.95] {
            let d = werner(f).unwrap();
            let two = d.tensor(&d);
            let (rate, tree) = optimize(&two, &cfg).unwrap();
            let hash = 1.0 - d.entropy_bits();
            let two_copy = rate_2copy(&d).unwrap();
            let asym = rate_asymptotic_recurrence(&d).unwrap();
            assert!(rate >= hash - 1e-12, "f={}", f);
            assert!(rate >= two_copy - 1e-12, "f={}", f);
            assert!(rate >= asym - 1e-12, "f={}", f);
            // the returned tree must actually achieve the claimed rate
            let replay = evaluate(&tree, &two).unwrap();
            assert_abs_diff_eq!(replay.rate_per_copy, rate, epsilon = 1e-9);
        }
    }

    #[test]
    fn optimize_high_fidelity_matches_two_copy_rate() {
        let d = werner(0.95).unwrap();
        let two = d.tensor(&d);
        let (rate, _) = optimize(&two, &SearchConfig::default()).unwrap();
        assert_abs_diff_eq!(rate, rate_2copy(&d).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn optimize_rejects_oversized_blocks() {
        let d = BlockDist::uniform(3);
        let cfg = SearchConfig {
            max_pairs: 2,
            ..SearchConfig::default()
        };
        assert!(matches!(
            optimize(&d, &cfg),
            Err(Error::BlockTooLarge { .. })
        ));
    }

    #[test]
    fn memoized_and_raw_search_agree() {
        let plain = SearchConfig {
            canonicalization: false,
            ..SearchConfig::default()
        };
        let canon = SearchConfig::default();
        for f in [0.6, 0.8, 0.92] {
            let d = werner(f).unwrap();
            let two = d.tensor(&d);
            let (a, _) = optimize(&two, &canon).unwrap();
            let (b, _) = optimize(&two, &plain).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn search_value_invariant_under_label_maps() {
        let mut rng = StdRng::seed_from_u64(7);
        let d = random_dist(1, &mut rng).tensor(&random_dist(1, &mut rng));
        let cfg = SearchConfig::default();
        let (base, _) = optimize(&d, &cfg).unwrap();
        let group = enumerate_label_maps(2).unwrap();
        for g in group.iter().step_by(211) {
            let moved = apply_label_map(g, &d).unwrap();
            let (v, _) = optimize(&moved, &cfg).unwrap();
            assert_abs_diff_eq!(v, base, epsilon = 1e-9);
        }
    }

    #[test]
    fn three_copy_search_completes_and_dominates_two_copies() {
        let cfg = SearchConfig::default();
        let d = werner(0.85).unwrap();
        let three = d.tensor_power(3).unwrap();
        let (rate3, tree) = optimize(&three, &cfg).unwrap();
        let (rate2, _) = optimize(&d.tensor(&d), &cfg).unwrap();
        assert!(rate3 >= rate2 - 1e-10, "rate3={} rate2={}", rate3, rate2);
        let replay = evaluate(&tree, &three).unwrap();
        assert_abs_diff_eq!(replay.rate_per_copy, rate3, epsilon = 1e-9);
    }

    #[test]
    fn beam_search_handles_five_copies() {
        let cfg = SearchConfig {
            max_pairs: 5,
            beam_width: Some(2),
            ..SearchConfig::default()
        };
        let d = werner(0.9).unwrap();
        let five = d.tensor_power(5).unwrap();
        let (rate, tree) = optimize(&five, &cfg).unwrap();
        // hash and discard are always candidates
        assert!(rate >= (1.0 - d.entropy_bits()).max(0.0) - 1e-12);
        let replay = evaluate(&tree, &five).unwrap();
        assert_abs_diff_eq!(replay.rate_per_copy, rate, epsilon = 1e-9);
        // exhaustive five-copy search is refused
        let no_beam = SearchConfig {
            max_pairs: 5,
            ..SearchConfig::default()
        };
        assert!(optimize(&five, &no_beam).is_err());
    }

    #[test]
    fn werner_curve_columns_and_bounds() {
        let cfg = SearchConfig::default();
        let curve = werner_curve(&[0.55, 0.7, 0.8, 0.9, 1.0], &cfg).unwrap();
        assert!(curve.warnings.is_empty(), "{:?}", curve.warnings);
        let last = curve.rows.last().unwrap();
        for v in [last.hash, last.asym_rec, last.two_copy, last.rec_hash, last.optimized] {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
        }
        for row in &curve.rows {
            assert!(row.two_copy >= row.hash - 1e-12);
            assert!(row.optimized >= row.two_copy - 1e-9);
        }
        // recurrence regime: recurrence+hash dominates the 2-copy rate
        assert!(curve.rows[0].rec_hash > curve.rows[0].two_copy);
        // every best tree replays to the reported optimized rate
        for (row, tree) in curve.rows.iter().zip(&curve.trees) {
            let d = werner(row.f).unwrap();
            let replay = evaluate(tree, &d.tensor(&d)).unwrap().rate_per_copy;
            assert_abs_diff_eq!(replay, row.optimized, epsilon = 1e-9);
        }
        assert!(werner_curve(&[0.5], &cfg).is_err());
        assert!(werner_curve(&[0.4], &cfg).is_err());
    }

    #[test]
    fn csv_format_is_stable() {
        let curve = WernerCurve {
            rows: vec![WernerCurveRow {
                f: 1.0,
                hash: 1.0,
                asym_rec: 1.0,
                two_copy: 1.0,
                rec_hash: 1.0,
                optimized: 1.0,
            }],
            trees: vec![ProtocolNode::Hash],
            warnings: vec![],
        };
        let csv = curve.to_csv();
        assert!(csv.starts_with("f,hash,asym_rec,two_copy,rec_hash,optimized\n"));
        assert!(csv.contains("1.00000000000e0"));
    }
}
