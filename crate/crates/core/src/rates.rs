//! Closed-form distillation rates for the reference protocols, with the
//! protocol trees they correspond to.
//!
//! Every closed form here has an independent route through the tree
//! evaluator; the two must agree to 1e-12 (exercised by the test suite).

use crate::dist::{normalized_entropy, shannon, shannon_pair, BlockDist};
use crate::error::{Error, Result};
use crate::labelmap::{apply_label_map, LabelMap};
use crate::protocol::{bell_measure, MeasuredBit, ProtocolNode};

fn require_single_pair(d: &BlockDist) -> Result<[f64; 4]> {
    d.spectrum()
}

/// Rate of the asymptotic recurrence protocol on one copy of a
/// single-pair state: check parity 1010 on two copies, hash the even
/// branch, drop the odd branch:
/// `-S(p_odd, p_even)/2 + p_even (1 - S(rho_even)/2)`.
pub fn rate_asymptotic_recurrence(d: &BlockDist) -> Result<f64> {
    let lam = require_single_pair(d)?;
    let a = lam[0] + lam[1];
    let b = lam[2] + lam[3];
    let p_even = a * a + b * b;
    let p_odd = 2.0 * a * b;
    let mut even_entries = Vec::with_capacity(8);
    for i in 0..2 {
        for j in 0..2 {
            for l in 0..2 {
                even_entries.push(lam[2 * i + j] * lam[2 * i + l]);
            }
        }
    }
    let s_even = normalized_entropy(&even_entries)?;
    Ok(-shannon_pair(p_even, p_odd) / 2.0 + p_even * (1.0 - s_even / 2.0))
}

/// The two-copy tree realizing [`rate_asymptotic_recurrence`].
pub fn reference_tree_asymptotic_recurrence() -> ProtocolNode {
    ProtocolNode::parity_check("1010".parse().unwrap(), ProtocolNode::Hash, ProtocolNode::Discard)
}

/// The 2-copy rate: check parity 1010 on two copies, hash the even
/// branch, measure the second pair's amp bit on the odd branch and hash
/// both remainders (each is a rank-two state):
/// `D_2c = 1 - S(λ) + (p_odd/4) [S([λ00, λ01]) + S([λ11, λ10])]`.
///
/// The extra term is zero exactly when at most two eigenvalues are
/// nonzero. On Werner states the coinciding-outcome remainder {10, 11}
/// is equally weighted, hence separable, and hashing it is equivalent
/// to dropping it.
pub fn rate_2copy(d: &BlockDist) -> Result<f64> {
    let lam = require_single_pair(d)?;
    let p_odd = 2.0 * (lam[0] + lam[1]) * (lam[2] + lam[3]);
    let extra = if p_odd > 0.0 {
        p_odd / 4.0
            * (normalized_entropy(&[lam[0], lam[1]]).unwrap_or(0.0)
                + normalized_entropy(&[lam[3], lam[2]]).unwrap_or(0.0))
    } else {
        0.0
    };
    Ok(1.0 - shannon(&lam) + extra)
}

/// The two-copy tree realizing [`rate_2copy`].
pub fn reference_tree_2copy() -> ProtocolNode {
    ProtocolNode::parity_check(
        "1010".parse().unwrap(),
        ProtocolNode::Hash,
        ProtocolNode::measure(1, MeasuredBit::Amp, ProtocolNode::Hash, ProtocolNode::Hash),
    )
}

/// One recurrence step, built from the primitives: tensor two copies,
/// bilateral CNOT with pair 0 as source and pair 1 as target, measure
/// pair 1's amp bit, keep the coinciding outcome (bit 0), renormalize.
/// Returns the success probability and the surviving spectrum.
pub fn recurrence_step(d: &BlockDist) -> Result<(f64, BlockDist)> {
    require_single_pair(d)?;
    let two = d.tensor(d);
    let g = LabelMap::bcnot_map(0, 1, 2)?;
    let after = apply_label_map(&g, &two)?;
    let out = bell_measure(&after, 1, MeasuredBit::Amp)?;
    match out.r0 {
        Some(kept) => Ok((out.q0, kept)),
        None => Err(Error::DegenerateSpectrum),
    }
}

/// Historical variant: after the step, twirl the survivor back to
/// Werner form, keeping only its fidelity.
pub fn recurrence_step_twirled(d: &BlockDist) -> Result<(f64, BlockDist)> {
    let (p, kept) = recurrence_step(d)?;
    let f = kept.prob(0);
    let t = (1.0 - f) / 3.0;
    Ok((p, BlockDist::from_raw(1, vec![f, t, t, t])))
}

fn recurrence_sweep(
    d: &BlockDist,
    rounds: usize,
    step: fn(&BlockDist) -> Result<(f64, BlockDist)>,
) -> Result<f64> {
    require_single_pair(d)?;
    let mut factor = 1.0;
    let mut state = d.clone();
    for _ in 0..rounds {
        let (p, next) = step(&state)?;
        factor *= p / 2.0;
        state = next;
    }
    Ok(factor * (1.0 - state.entropy_bits()).max(0.0))
}

/// Rate of `rounds` recurrence steps followed by hashing: each round
/// halves the surviving pairs and multiplies by its success
/// probability; the final states are hashed if profitable.
///
/// Iterating the untwirled step drives the state toward the flat
/// rank-two mixture `(1/2, 1/2, 0, 0)` when the fidelity is low, where
/// the hashing yield stalls at zero; the twirled variant keeps raising
/// the fidelity instead and eventually turns positive.
pub fn rate_recurrence_then_hash(d: &BlockDist, rounds: usize) -> Result<f64> {
    recurrence_sweep(d, rounds, recurrence_step)
}

/// [`rate_recurrence_then_hash`] with the historical twirled step.
pub fn rate_recurrence_then_hash_twirled(d: &BlockDist, rounds: usize) -> Result<f64> {
    recurrence_sweep(d, rounds, recurrence_step_twirled)
}

/// Best recurrence round count in `0..=max_rounds` for the given state.
pub fn best_recurrence_then_hash(d: &BlockDist, max_rounds: usize) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for rounds in 0..=max_rounds {
        best = best.max(rate_recurrence_then_hash(d, rounds)?);
    }
    Ok(best)
}
