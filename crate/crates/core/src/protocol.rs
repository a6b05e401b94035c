//! Protocol primitives and the protocol-tree evaluator.
//!
//! A protocol is a finite decision tree over an m-pair block. Parity
//! checks split the block into even/odd branches at an entropy cost,
//! local Bell measurements destroy one pair and reveal one of its bits,
//! label maps permute labels, and every branch terminates in either a
//! hashing step (yield `m - S`) or a discard (yield 0).

use std::fmt;

use crate::dist::{shannon_pair, BlockDist, BRANCH_EPS};
use crate::error::{Error, Result};
use crate::f2::{bit_at, drop_pair, F2Basis};
use crate::labelmap::{apply_label_map, LabelMap, ParityMask};

/// Which bit of a pair a local Bell measurement reveals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasuredBit {
    Amp,
    Phase,
}

impl fmt::Display for MeasuredBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasuredBit::Amp => write!(f, "amp"),
            MeasuredBit::Phase => write!(f, "phase"),
        }
    }
}

/// Node of a protocol tree. Parity-check masks along any root-to-leaf
/// path must stay linearly independent (checked during evaluation, with
/// masks transported through relabelings and measurements).
#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolNode {
    ParityCheck {
        mask: ParityMask,
        child0: Box<ProtocolNode>,
        child1: Box<ProtocolNode>,
    },
    Measure {
        pair: usize,
        which: MeasuredBit,
        child0: Box<ProtocolNode>,
        child1: Box<ProtocolNode>,
    },
    Relabel {
        map: LabelMap,
        child: Box<ProtocolNode>,
    },
    Hash,
    Discard,
}

impl ProtocolNode {
    pub fn parity_check(mask: ParityMask, child0: ProtocolNode, child1: ProtocolNode) -> Self {
        ProtocolNode::ParityCheck {
            mask,
            child0: Box::new(child0),
            child1: Box::new(child1),
        }
    }

    pub fn measure(
        pair: usize,
        which: MeasuredBit,
        child0: ProtocolNode,
        child1: ProtocolNode,
    ) -> Self {
        ProtocolNode::Measure {
            pair,
            which,
            child0: Box::new(child0),
            child1: Box::new(child1),
        }
    }

    pub fn relabel(map: LabelMap, child: ProtocolNode) -> Self {
        ProtocolNode::Relabel {
            map,
            child: Box::new(child),
        }
    }

    /// Depth of the tree (leaves have depth 0).
    pub fn depth(&self) -> usize {
        match self {
            ProtocolNode::ParityCheck { child0, child1, .. }
            | ProtocolNode::Measure { child0, child1, .. } => {
                1 + child0.depth().max(child1.depth())
            }
            ProtocolNode::Relabel { child, .. } => 1 + child.depth(),
            ProtocolNode::Hash | ProtocolNode::Discard => 0,
        }
    }

    /// Indented text serialization: one node per line, two spaces per
    /// depth level, children in branch order child0 then child1.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_indented(&mut out, 0);
        out
    }

    fn write_indented(&self, out: &mut String, depth: usize) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        match self {
            ProtocolNode::ParityCheck {
                mask,
                child0,
                child1,
            } => {
                out.push_str(&format!("PC {}\n", mask));
                child0.write_indented(out, depth + 1);
                child1.write_indented(out, depth + 1);
            }
            ProtocolNode::Measure {
                pair,
                which,
                child0,
                child1,
            } => {
                out.push_str(&format!("MEAS {} {}\n", pair, which));
                child0.write_indented(out, depth + 1);
                child1.write_indented(out, depth + 1);
            }
            ProtocolNode::Relabel { map, child } => {
                out.push_str(&format!("RELABEL {}\n", map.wire_format()));
                child.write_indented(out, depth + 1);
            }
            ProtocolNode::Hash => out.push_str("HASH\n"),
            ProtocolNode::Discard => out.push_str("DISCARD\n"),
        }
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let stripped = line.trim_start_matches(' ');
            let indent = line.len() - stripped.len();
            if indent % 2 != 0 || stripped.starts_with('\t') {
                return Err(Error::Parse(format!(
                    "line {}: indentation must be two spaces per level",
                    lineno + 1
                )));
            }
            items.push((indent / 2, stripped, lineno + 1));
        }
        if items.is_empty() {
            return Err(Error::Parse("empty protocol tree".into()));
        }
        let (node, used) = Self::parse_at(&items, 0, 0)?;
        if used != items.len() {
            return Err(Error::Parse(format!(
                "line {}: unexpected trailing node",
                items[used].2
            )));
        }
        Ok(node)
    }

    fn parse_at(items: &[(usize, &str, usize)], pos: usize, depth: usize) -> Result<(Self, usize)> {
        let (d, content, lineno) = items
            .get(pos)
            .copied()
            .ok_or_else(|| Error::Parse("unexpected end of tree".into()))?;
        if d != depth {
            return Err(Error::Parse(format!(
                "line {}: expected depth {}, found {}",
                lineno, depth, d
            )));
        }
        let mut words = content.split(' ');
        let head = words.next().unwrap_or("");
        match head {
            "HASH" => Ok((ProtocolNode::Hash, pos + 1)),
            "DISCARD" => Ok((ProtocolNode::Discard, pos + 1)),
            "PC" => {
                let mask: ParityMask = words
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {}: PC needs a mask", lineno)))?
                    .parse()?;
                let (child0, next) = Self::parse_at(items, pos + 1, depth + 1)?;
                let (child1, next) = Self::parse_at(items, next, depth + 1)?;
                Ok((ProtocolNode::parity_check(mask, child0, child1), next))
            }
            "MEAS" => {
                let pair: usize = words
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {}: MEAS needs a pair", lineno)))?
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: bad pair index: {}", lineno, e)))?;
                let which = match words.next() {
                    Some("amp") => MeasuredBit::Amp,
                    Some("phase") => MeasuredBit::Phase,
                    other => {
                        return Err(Error::Parse(format!(
                            "line {}: expected amp|phase, got {:?}",
                            lineno, other
                        )))
                    }
                };
                let (child0, next) = Self::parse_at(items, pos + 1, depth + 1)?;
                let (child1, next) = Self::parse_at(items, next, depth + 1)?;
                Ok((ProtocolNode::measure(pair, which, child0, child1), next))
            }
            "RELABEL" => {
                let map = LabelMap::from_wire(words.next().ok_or_else(|| {
                    Error::Parse(format!("line {}: RELABEL needs a map", lineno))
                })?)?;
                let (child, next) = Self::parse_at(items, pos + 1, depth + 1)?;
                Ok((ProtocolNode::relabel(map, child), next))
            }
            other => Err(Error::Parse(format!(
                "line {}: unknown node {:?}",
                lineno, other
            ))),
        }
    }
}

impl fmt::Display for ProtocolNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Result of an asymptotic parity check on a block distribution.
#[derive(Debug, Clone)]
pub struct ParitySplit {
    /// Probability of parity 0; the branch is `None` when empty.
    pub mu0: f64,
    pub branch0: Option<BlockDist>,
    /// Probability of parity 1.
    pub mu1: f64,
    pub branch1: Option<BlockDist>,
    /// Entropy cost `S(mu0, mu1)` in ebits per block.
    pub cost: f64,
}

/// Split `d` into the renormalized restrictions with even/odd parity
/// under `mask`. Branch probabilities below 1e-15 are treated as zero.
pub fn parity_split(d: &BlockDist, mask: &ParityMask) -> Result<ParitySplit> {
    if mask.pair_count() != d.pairs() {
        return Err(Error::PairCountMismatch {
            left: mask.pair_count(),
            right: d.pairs(),
        });
    }
    let mut sums = [0.0f64; 2];
    for (idx, &p) in d.probs().iter().enumerate() {
        sums[mask.parity_of(idx as u32) as usize] += p;
    }
    let split_branch = |b: u8, total: f64| -> Option<BlockDist> {
        if total < BRANCH_EPS {
            return None;
        }
        let v: Vec<f64> = d
            .probs()
            .iter()
            .enumerate()
            .map(|(idx, &p)| {
                if mask.parity_of(idx as u32) == b {
                    p / total
                } else {
                    0.0
                }
            })
            .collect();
        Some(BlockDist::from_raw(d.pairs(), v))
    };
    let branch0 = split_branch(0, sums[0]);
    let branch1 = split_branch(1, sums[1]);
    let (mu0, mu1) = match (&branch0, &branch1) {
        (Some(_), Some(_)) => (sums[0], sums[1]),
        (Some(_), None) => (1.0, 0.0),
        (None, Some(_)) => (0.0, 1.0),
        (None, None) => return Err(Error::AllZero),
    };
    Ok(ParitySplit {
        mu0,
        branch0,
        mu1,
        branch1,
        cost: shannon_pair(mu0, mu1),
    })
}

/// Outcome of a local Bell measurement: probabilities of the two
/// outcomes and the conditional distributions on the remaining pairs
/// (the measured pair is destroyed, its unmeasured bit summed out).
#[derive(Debug, Clone)]
pub struct MeasureOutcome {
    pub q0: f64,
    pub r0: Option<BlockDist>,
    pub q1: f64,
    pub r1: Option<BlockDist>,
}

pub fn bell_measure(d: &BlockDist, pair: usize, which: MeasuredBit) -> Result<MeasureOutcome> {
    let m = d.pairs();
    if pair >= m {
        return Err(Error::PairOutOfRange {
            index: pair,
            pairs: m,
        });
    }
    let n = 2 * m;
    let pos = 2 * pair + matches!(which, MeasuredBit::Phase) as usize;
    let rest_len = 1usize << (2 * (m - 1));
    let mut acc = [vec![0.0f64; rest_len], vec![0.0f64; rest_len]];
    for (idx, &p) in d.probs().iter().enumerate() {
        let b = bit_at(idx as u32, n, pos) as usize;
        acc[b][drop_pair(idx as u32, n, pair) as usize] += p;
    }
    let finish = |v: Vec<f64>| -> (f64, Option<BlockDist>) {
        let q: f64 = v.iter().sum();
        if q < BRANCH_EPS {
            return (0.0, None);
        }
        let scaled = v.into_iter().map(|x| x / q).collect();
        (q, Some(BlockDist::from_raw(m - 1, scaled)))
    };
    let [v0, v1] = acc;
    let (mut q0, r0) = finish(v0);
    let (mut q1, r1) = finish(v1);
    if r0.is_none() {
        q1 = 1.0;
    }
    if r1.is_none() {
        q0 = 1.0;
    }
    Ok(MeasureOutcome { q0, r0, q1, r1 })
}

/// Asymptotic hashing/breeding yield `m - S(d)` in ebits per block.
/// May be negative; callers decide whether to discard instead.
pub fn hashing_yield(d: &BlockDist) -> f64 {
    d.pairs() as f64 - d.entropy_bits()
}

/// One leaf of a protocol evaluation: the branch path, its probability,
/// the parity costs accumulated along it, and the terminal yield.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    pub path: String,
    pub probability: f64,
    pub cost: f64,
    pub terminal_yield: f64,
}

/// Expected yield of a protocol tree.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// Ebits per initial copy: `raw_yield / m_initial`.
    pub rate_per_copy: f64,
    /// Ebits per initial m-pair block.
    pub raw_yield: f64,
    /// One record per leaf reached with positive probability.
    pub branch_log: Vec<BranchRecord>,
}

/// Parity masks seen along the current root-to-leaf path, transported
/// into the current label frame. After a relabeling `y = g(x)` a stored
/// functional `b` becomes `(gᵀ)⁻¹ b`; after measuring pair `p`, vectors
/// touching the destroyed phase bit are dropped and the rest lose the
/// pair's two positions.
#[derive(Debug, Clone)]
struct PathBasis {
    n: usize,
    basis: F2Basis,
}

impl PathBasis {
    fn new(n: usize) -> Self {
        Self {
            n,
            basis: F2Basis::new(),
        }
    }

    fn check_insert(&mut self, mask_bits: u32) -> Result<()> {
        if !self.basis.insert(mask_bits) {
            return Err(Error::InvalidTree(
                "parity masks along a path must be linearly independent".into(),
            ));
        }
        Ok(())
    }

    fn after_relabel(&self, g: &LabelMap) -> Result<PathBasis> {
        let inv_t = g.linear().transpose().inverse()?;
        let mut basis = F2Basis::new();
        for &b in self.basis.vectors() {
            basis.insert(inv_t.apply(b));
        }
        Ok(PathBasis { n: self.n, basis })
    }

    fn after_measure(&self, pair: usize) -> PathBasis {
        let mut basis = F2Basis::new();
        for &b in self.basis.vectors() {
            if bit_at(b, self.n, 2 * pair + 1) == 1 {
                continue;
            }
            let reduced = drop_pair(b, self.n, pair);
            if reduced != 0 {
                basis.insert(reduced);
            }
        }
        PathBasis {
            n: self.n - 2,
            basis,
        }
    }
}

/// Evaluate a protocol tree on a block distribution.
///
/// The yield recursion: a parity check pays its entropy cost and mixes
/// the branch yields with weights `mu0, mu1`; a measurement mixes with
/// the outcome probabilities; a relabeling pushes the distribution
/// forward; `Hash` yields `m - S` and `Discard` yields 0. Branches with
/// probability zero contribute nothing and are skipped.
pub fn evaluate(tree: &ProtocolNode, d: &BlockDist) -> Result<RateReport> {
    if d.pairs() == 0 {
        return Err(Error::InvalidParameter(
            "evaluate needs a block with at least one pair".into(),
        ));
    }
    let mut branch_log = Vec::new();
    let raw_yield = eval_node(
        tree,
        d,
        PathBasis::new(2 * d.pairs()),
        1.0,
        0.0,
        String::new(),
        &mut branch_log,
    )?;
    Ok(RateReport {
        rate_per_copy: raw_yield / d.pairs() as f64,
        raw_yield,
        branch_log,
    })
}

fn eval_node(
    node: &ProtocolNode,
    d: &BlockDist,
    basis: PathBasis,
    prob: f64,
    cost_acc: f64,
    path: String,
    log: &mut Vec<BranchRecord>,
) -> Result<f64> {
    match node {
        ProtocolNode::Hash => {
            let y = hashing_yield(d);
            log.push(BranchRecord {
                path: join_path(&path, "HASH"),
                probability: prob,
                cost: cost_acc,
                terminal_yield: y,
            });
            Ok(y)
        }
        ProtocolNode::Discard => {
            log.push(BranchRecord {
                path: join_path(&path, "DISCARD"),
                probability: prob,
                cost: cost_acc,
                terminal_yield: 0.0,
            });
            Ok(0.0)
        }
        ProtocolNode::ParityCheck {
            mask,
            child0,
            child1,
        } => {
            let mut basis = basis;
            basis.check_insert(mask.bits())?;
            let split = parity_split(d, mask)?;
            let mut y = -split.cost;
            for (b, mu, branch, child) in [
                (0u8, split.mu0, &split.branch0, child0),
                (1u8, split.mu1, &split.branch1, child1),
            ] {
                if let Some(db) = branch {
                    y += mu * eval_node(
                        child,
                        db,
                        basis.clone(),
                        prob * mu,
                        cost_acc + split.cost,
                        join_path(&path, &format!("PC[{}]={}", mask, b)),
                        log,
                    )?;
                }
            }
            Ok(y)
        }
        ProtocolNode::Measure {
            pair,
            which,
            child0,
            child1,
        } => {
            let out = bell_measure(d, *pair, *which)?;
            let next_basis = basis.after_measure(*pair);
            let mut y = 0.0;
            for (b, q, branch, child) in [
                (0u8, out.q0, &out.r0, child0),
                (1u8, out.q1, &out.r1, child1),
            ] {
                if let Some(rb) = branch {
                    y += q * eval_node(
                        child,
                        rb,
                        next_basis.clone(),
                        prob * q,
                        cost_acc,
                        join_path(&path, &format!("MEAS[{},{}]={}", pair, which, b)),
                        log,
                    )?;
                }
            }
            Ok(y)
        }
        ProtocolNode::Relabel { map, child } => {
            let pushed = apply_label_map(map, d)?;
            let next_basis = basis.after_relabel(map)?;
            eval_node(
                child,
                &pushed,
                next_basis,
                prob,
                cost_acc,
                join_path(&path, "REL"),
                log,
            )
        }
    }
}

fn join_path(path: &str, step: &str) -> String {
    if path.is_empty() {
        step.to_string()
    } else {
        format!("{} {}", path, step)
    }
}
