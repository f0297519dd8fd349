//! Monte Carlo estimates of error and acceptance.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Hermitian;
use crate::state::{child_seed, rng_from_seed, ProblemInstance, ThreeOutcomeMeasurement};

/// Allowed negative probability before clamping.
const NEGATIVITY_ALLOWANCE: f64 = 1e-9;
/// Normal quantile for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

/// Outcome probabilities `(guess ρ, guess σ, reject)` for state `nu`.
pub fn outcome_distribution(nu: &Hermitian, m: &ThreeOutcomeMeasurement) -> Result<[f64; 3]> {
    if nu.dim() != m.dim() {
        return Err(Error::DimMismatch { expected: nu.dim(), found: m.dim() });
    }
    let clamp = |p: f64, what: &str| -> Result<f64> {
        if !(-NEGATIVITY_ALLOWANCE..=1.0 + NEGATIVITY_ALLOWANCE).contains(&p) {
            return Err(Error::BadParameter(format!("{what} probability {p} out of range")));
        }
        Ok(p.clamp(0.0, 1.0))
    };
    let a = clamp(m.lambda_rho().tr_prod(nu), "guess-rho")?;
    let b = clamp(m.lambda_sigma().tr_prod(nu), "guess-sigma")?;
    let c = clamp(1.0 - a - b, "reject")?;
    Ok([a, b, c])
}

/// 95% half-widths. A half-width of 1 means the normal approximation is not
/// trusted (fewer than 5 successes or failures).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ci95 {
    pub e: Option<f64>,
    pub a_rho: Option<f64>,
    pub a_sigma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub n: u64,
    pub seed: u64,
    /// Rows: hidden state ρ, σ. Columns: guess ρ, guess σ, reject.
    pub counts: [[u64; 3]; 2],
    pub e_hat: Option<f64>,
    pub a_rho_hat: Option<f64>,
    pub a_sigma_hat: Option<f64>,
    pub ci95: Ci95,
    /// No trial was accepted, so the error is undefined.
    pub no_accepts: bool,
}

fn wald(successes: u64, trials: u64) -> Option<(f64, f64)> {
    if trials == 0 {
        return None;
    }
    let m = trials as f64;
    let p = successes as f64 / m;
    let half = if m * p < 5.0 || m * (1.0 - p) < 5.0 { 1.0 } else { Z95 * (p * (1.0 - p) / m).sqrt() };
    Some((p, half))
}

fn pick(u: f64, probs: &[f64; 3]) -> usize {
    if u < probs[0] {
        0
    } else if u < probs[0] + probs[1] {
        1
    } else {
        2
    }
}

/// Draws `n` rounds: the hidden state from the prior, then an outcome from
/// the Born probabilities. Trial `i` uses its own derived seed.
pub fn simulate(inst: &ProblemInstance, m: &ThreeOutcomeMeasurement, n: u64, seed: u64) -> Result<SimReport> {
    if n == 0 {
        return Err(Error::BadParameter("n must be at least 1".into()));
    }
    let dist_rho = outcome_distribution(inst.rho_op(), m)?;
    let dist_sigma = outcome_distribution(inst.sigma_op(), m)?;
    let p_rho = inst.p_rho();
    let counts = (0..n)
        .into_par_iter()
        .fold(
            || [[0u64; 3]; 2],
            |mut acc, i| {
                let mut rng = rng_from_seed(child_seed(seed, i));
                let hidden = if rng.gen::<f64>() < p_rho { 0 } else { 1 };
                let dist = if hidden == 0 { &dist_rho } else { &dist_sigma };
                acc[hidden][pick(rng.gen::<f64>(), dist)] += 1;
                acc
            },
        )
        .reduce(
            || [[0u64; 3]; 2],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b.iter()) {
                    for (x, y) in ra.iter_mut().zip(rb.iter()) {
                        *x += y;
                    }
                }
                a
            },
        );
    let [[rr, rs, rx], [sr, ss, sx]] = counts;
    let accepted = rr + rs + sr + ss;
    let wrong = rs + sr;
    let e = wald(wrong, accepted);
    let a_rho = wald(rr + rs, rr + rs + rx);
    let a_sigma = wald(sr + ss, sr + ss + sx);
    Ok(SimReport {
        n,
        seed,
        counts,
        e_hat: e.map(|x| x.0),
        a_rho_hat: a_rho.map(|x| x.0),
        a_sigma_hat: a_sigma.map(|x| x.0),
        ci95: Ci95 { e: e.map(|x| x.1), a_rho: a_rho.map(|x| x.1), a_sigma: a_sigma.map(|x| x.1) },
        no_accepts: accepted == 0,
    })
}
