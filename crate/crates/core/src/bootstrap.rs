//! Conversion of entanglement-assisted rates into non-assisted
//! protocols: an activating protocol distills a sublinear starting pool
//! of ebits, which then funds a geometric schedule of assisted blocks.

use crate::error::{Error, Result};

/// Schedule for running an assisted protocol of rate `r` over `n`
/// copies, activated by a non-assisted protocol of rate `k`.
///
/// The activating protocol consumes `ceil(sqrt(n)/k)` extra copies to
/// distill a pool of `floor(sqrt(n))` ebits. Each block of `b` copies
/// consumes `b` ebits from the pool and yields `(1+r) b`, so block
/// sizes grow like `(1+r)^t sqrt(n)`; the final block takes whatever
/// copies remain.
#[derive(Debug, Clone)]
pub struct BootstrapPlan {
    n: u64,
    k: f64,
    r: f64,
    activating_copies: u64,
    blocks: Vec<u64>,
}

impl BootstrapPlan {
    pub fn total_copies(&self) -> u64 {
        self.n
    }

    pub fn activating_rate(&self) -> f64 {
        self.k
    }

    pub fn assisted_rate(&self) -> f64 {
        self.r
    }

    pub fn activating_copies(&self) -> u64 {
        self.activating_copies
    }

    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    pub fn starting_pool(&self) -> u64 {
        isqrt(self.n)
    }

    /// Pool balance after each block (starting pool minus consumption
    /// plus yield, cumulatively). Every entry is nonnegative.
    pub fn pool_balances(&self) -> Vec<f64> {
        let mut pool = self.starting_pool() as f64;
        self.blocks
            .iter()
            .map(|&b| {
                pool += self.r * b as f64;
                pool
            })
            .collect()
    }

    /// Net ebits gained per copy, counting the activating copies and
    /// treating the starting pool as borrowed:
    /// `(total yield - pool) / (n + activating)`. Tends to `r`.
    pub fn effective_rate(&self) -> f64 {
        let processed: f64 = self.blocks.iter().map(|&b| b as f64).sum();
        self.r * processed / (self.n as f64 + self.activating_copies as f64)
    }
}

fn isqrt(n: u64) -> u64 {
    let mut root = (n as f64).sqrt() as u64;
    while root.saturating_mul(root) > n {
        root -= 1;
    }
    while (root + 1).saturating_mul(root + 1) <= n {
        root += 1;
    }
    root
}

/// Build the block schedule for `n` copies, activating rate `k` and
/// assisted rate `r`.
pub fn make_plan(n: u64, k: f64, r: f64) -> Result<BootstrapPlan> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one copy".into()));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "activating rate must be positive, got {}",
            k
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "assisted rate must be positive, got {}",
            r
        )));
    }
    let sqrt_n = isqrt(n);
    let activating_copies = (sqrt_n as f64 / k).ceil() as u64;
    let mut blocks = Vec::new();
    let mut pool = sqrt_n as f64;
    let mut remaining = n;
    while remaining > 0 {
        let b = (pool.floor() as u64).min(remaining).max(1);
        blocks.push(b);
        pool += r * b as f64;
        remaining -= b;
    }
    Ok(BootstrapPlan {
        n,
        k,
        r,
        activating_copies,
        blocks,
    })
}

/// Lower bound on the overall success probability:
/// `p_activating(sqrt(n)) * (1 - k_err e^{-c sqrt(n)})^{sqrt(n)}`,
/// evaluated in log space. Clamped to [0, 1]; returns 0 when the
/// typicality factor is vacuous (`k_err e^{-c sqrt(n)} >= 1`).
pub fn success_bound(
    n: u64,
    p_activating: impl Fn(f64) -> f64,
    k_err: f64,
    c: f64,
) -> Result<f64> {
    if !(k_err > 0.0) || !k_err.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "k_err must be positive, got {}",
            k_err
        )));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "c must be positive, got {}",
            c
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one copy".into()));
    }
    let rn = (n as f64).sqrt();
    let p = p_activating(rn);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "p_activating must map into [0, 1], got {}",
            p
        )));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let typ = k_err * (-c * rn).exp();
    if typ >= 1.0 {
        return Ok(0.0);
    }
    let log_bound = p.ln() + rn * (-typ).ln_1p();
    Ok(log_bound.exp().clamp(0.0, 1.0))
}
