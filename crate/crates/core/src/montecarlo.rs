//! Finite-copy sampling oracle: concrete Bell-label strings drawn from
//! a single-pair spectrum, operational parity checks against an ancilla
//! pair, and the posterior-entropy diagnostic for the hashing picture.
//!
//! All randomness is ChaCha-based; trial `t` of a run with seed `s`
//! uses stream `t` of a generator seeded with `s`, so runs are
//! reproducible and trials are independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::BlockDist;
use crate::error::{Error, Result};
use crate::f2::F2Basis;
use crate::label::{bcnot, BellLabel, LabelString};
use crate::labelmap::ParityMask;

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn sample_label(spectrum: &[f64; 4], rng: &mut ChaCha8Rng) -> BellLabel {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for i in 0..4 {
        acc += spectrum[i];
        if x < acc {
            return BellLabel::from_index(i).unwrap();
        }
    }
    BellLabel::from_index(3).unwrap()
}

/// `n` Bell labels drawn i.i.d. from a single-pair spectrum.
#[derive(Debug, Clone)]
pub struct SampledEnsemble {
    labels: Vec<BellLabel>,
    rng_seed: u64,
}

impl SampledEnsemble {
    pub fn sample(spectrum: &BlockDist, n: usize, seed: u64) -> Result<Self> {
        let lam = spectrum.spectrum()?;
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one copy".into()));
        }
        let mut rng = trial_rng(seed, 0);
        let labels = (0..n).map(|_| sample_label(&lam, &mut rng)).collect();
        Ok(Self {
            labels,
            rng_seed: seed,
        })
    }

    pub fn from_labels(labels: Vec<BellLabel>, seed: u64) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidParameter("need at least one copy".into()));
        }
        Ok(Self {
            labels,
            rng_seed: seed,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[BellLabel] {
        &self.labels
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    /// The ensemble as one packed label string.
    pub fn as_label_string(&self) -> LabelString {
        LabelString::from_pairs(&self.labels).unwrap()
    }
}

/// Operationally evaluate the parity `⟨S, M⟩` of the hidden ensemble
/// string: an ancilla pair starting in label (0,0) is used as the
/// target of a bilateral CNOT from every pair selected by the mask.
/// Masked phase bits are routed into the ancilla by conjugating the
/// source pair with a swap, masked amp+phase combinations with a shear.
/// The ancilla's amp bit accumulates the parity; the ensemble labels
/// are unchanged by construction and this is asserted.
pub fn simulate_parity_check(e: &SampledEnsemble, mask: &ParityMask) -> Result<bool> {
    let n = e.len();
    if mask.pair_count() != n {
        return Err(Error::PairCountMismatch {
            left: mask.pair_count(),
            right: n,
        });
    }
    // working register: ensemble pairs 0..n, ancilla at index n
    let mut work: Vec<BellLabel> = e.labels.clone();
    work.push(BellLabel::new(false, false));
    let mut reg = LabelString::from_pairs(&work)?;
    let string_bits = 2 * n;
    for p in 0..n {
        let want_amp = crate::f2::bit_at(mask.bits(), string_bits, 2 * p) == 1;
        let want_phase = crate::f2::bit_at(mask.bits(), string_bits, 2 * p + 1) == 1;
        if !want_amp && !want_phase {
            continue;
        }
        let rotate = |reg: LabelString| -> Result<LabelString> {
            let lab = reg.pair(p)?;
            let rotated = match (want_amp, want_phase) {
                (true, false) => lab,
                (false, true) => BellLabel::new(lab.phase, lab.amp),
                (true, true) => BellLabel::new(lab.amp ^ lab.phase, lab.phase),
                (false, false) => unreachable!(),
            };
            reg.with_pair(p, rotated)
        };
        reg = rotate(reg)?;
        reg = bcnot(p, n, &reg)?;
        // the rotations are involutions, so applying again restores the pair
        reg = rotate(reg)?;
    }
    let result = reg.pair(n)?.amp;
    for p in 0..n {
        assert_eq!(
            reg.pair(p)?,
            e.labels[p],
            "parity check disturbed ensemble pair {}",
            p
        );
    }
    Ok(result)
}

/// Mean and spread of the posterior entropy after `k` parity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualEntropyPoint {
    pub checks_applied: usize,
    pub mean_bits: f64,
    pub stddev_bits: f64,
}

/// Average posterior entropy over all `4^n` label strings consistent
/// with the outcomes of `checks` random linearly independent parity
/// checks, across `trials` seeded trials.
///
/// The posterior is computed exhaustively, so `n` is capped at 10.
/// Masks are rejection-sampled to stay independent of the earlier ones,
/// which bounds `checks` by `2n`.
pub fn residual_entropy_curve(
    spectrum: &BlockDist,
    n: usize,
    checks: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<ResidualEntropyPoint>> {
    let lam = spectrum.spectrum()?;
    if n == 0 || n > 10 {
        return Err(Error::InvalidParameter(format!(
            "posterior enumeration supports 1..=10 copies, got {}",
            n
        )));
    }
    if checks > 2 * n {
        return Err(Error::InvalidParameter(format!(
            "at most {} independent checks exist on {} copies",
            2 * n,
            n
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    // prior over all 4^n strings and its per-entry -p*lg(p) terms
    let mut prior = vec![1.0f64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(prior.len() * 4);
        for &p in &prior {
            for &l in &lam {
                next.push(p * l);
            }
        }
        prior = next;
    }
    let string_bits = 2 * n;
    let curves: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let truth = {
                let mut idx = 0u32;
                for _ in 0..n {
                    idx = (idx << 2) | sample_label(&lam, &mut rng).index() as u32;
                }
                idx
            };
            let mut alive: Vec<bool> = vec![true; prior.len()];
            let mut basis = F2Basis::new();
            let mut curve = Vec::with_capacity(checks + 1);
            curve.push(posterior_entropy(&prior, &alive));
            for _ in 0..checks {
                let mask = loop {
                    let candidate = rng.gen_range(1..(1u64 << string_bits)) as u32;
                    if basis.insert(candidate) {
                        break candidate;
                    }
                };
                let outcome = (truth & mask).count_ones() & 1;
                for (idx, slot) in alive.iter_mut().enumerate() {
                    if *slot && (idx as u32 & mask).count_ones() & 1 != outcome {
                        *slot = false;
                    }
                }
                curve.push(posterior_entropy(&prior, &alive));
            }
            curve
        })
        .collect();
    Ok((0..=checks)
        .map(|k| {
            let values: Vec<f64> = curves.iter().map(|c| c[k]).collect();
            let mean = values.iter().sum::<f64>() / trials as f64;
            let var = if trials > 1 {
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
            } else {
                0.0
            };
            ResidualEntropyPoint {
                checks_applied: k,
                mean_bits: mean,
                stddev_bits: var.sqrt(),
            }
        })
        .collect())
}

fn posterior_entropy(prior: &[f64], alive: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut weighted_log = 0.0;
    for (p, &a) in prior.iter().zip(alive) {
        if a && *p > 0.0 {
            total += p;
            weighted_log += p * p.log2();
        }
    }
    if total <= 0.0 {
        return 0.0;
    }
    total.log2() - weighted_log / total
}

/// Empirical frequencies of block parity over sampled blocks of
/// `mask.pair_count()` i.i.d. pairs.
pub fn empirical_branch_probabilities(
    spectrum: &BlockDist,
    mask: &ParityMask,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let lam = spectrum.spectrum()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let m = mask.pair_count();
    let odd: u64 = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let mut idx = 0u32;
            for _ in 0..m {
                idx = (idx << 2) | sample_label(&lam, &mut rng).index() as u32;
            }
            mask.parity_of(idx) as u64
        })
        .sum();
    let mu1 = odd as f64 / trials as f64;
    Ok((1.0 - mu1, mu1))
}

/// 5-sigma binomial band used by the statistical tests.
pub fn binomial_band(p: f64, trials: usize) -> f64 {
    5.0 * (p * (1.0 - p) / trials as f64).sqrt()
}
