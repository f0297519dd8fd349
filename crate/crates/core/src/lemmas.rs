//! Randomized checks of the auxiliary matrix facts the closed forms rest on.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construct::{extremal_subspaces, max_c, ConstructionParams};
use crate::error::{Error, Result};
use crate::linalg::{
    extremal_projector, lambda_max, pseudo_power, support_projector, CMatrix, CVector, Extremum, Hermitian, Projector,
    Tolerances, RANK_TOL,
};
use crate::metrics::critical_prior;
use crate::oracle::random_unitary;
use crate::state::{child_seed, ginibre, random_density_in, rng_from_seed, DensityOperator, ProblemInstance};
use crate::upsilon::{upsilon, upsilon_with, UpsilonOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma {
    /// `Tr(ζν) ≤ ‖ν‖∞`, with equality for `ζ` inside the top eigenspace.
    MaxTraceBound,
    /// `Tr(ζν) ≥` smallest non-zero eigenvalue for `ζ` inside the support.
    MinTraceBound,
    /// `min ‖ψ/Tr(ψσ)‖∞` over `ψ ∈ S(I−Π_σ+P)` is `1/Tr(Pσ)`, reached at `P/Tr P`.
    SingleMin,
    /// `ΠζΠ = 0`, `Πζ = ζΠ = 0` and `ζ ∈ P(I−Π)` hold together or not at all.
    GenProjEquivalence,
    /// `Πν = ν` and `ζ ∈ P(Π_ν)` imply `ζ ∈ P(Π)`.
    ProjectorSubset,
    /// `Υ(kσ, r) = k Υ(σ, r)`.
    UpsilonScaling,
    /// `Υ` at `r ∈ {0, 1}` equals `Tr((σ^{-1/2}Πσ^{-1/2})^{-1})`.
    UpsilonEndpoints,
    /// On rank-one extremal spaces the largest admissible `c` of the mixed
    /// family equals `Υ` of the shorted operator.
    DoubleMin,
}

impl Lemma {
    pub const ALL: [Lemma; 8] = [
        Lemma::MaxTraceBound,
        Lemma::MinTraceBound,
        Lemma::SingleMin,
        Lemma::GenProjEquivalence,
        Lemma::ProjectorSubset,
        Lemma::UpsilonScaling,
        Lemma::UpsilonEndpoints,
        Lemma::DoubleMin,
    ];

    pub fn tolerance(self) -> f64 {
        match self {
            Lemma::SingleMin | Lemma::DoubleMin => 1e-8,
            _ => 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Largest violation of the statement over all samples.
    pub worst_violation: f64,
    /// Closest approach of a random sample to the bound, as a slack
    /// (`None` for statements without a bound).
    pub best_value: Option<f64>,
    pub tolerance: f64,
    /// Samples on which the statement did not hold within tolerance.
    pub failures: usize,
    pub passed: bool,
}

struct Tally {
    worst: f64,
    best: Option<f64>,
    failures: usize,
    tol: f64,
}

impl Tally {
    fn new(tol: f64) -> Self {
        Tally { worst: 0.0, best: None, failures: 0, tol }
    }

    fn violation(&mut self, v: f64) {
        let v = if v.is_nan() { f64::INFINITY } else { v.max(0.0) };
        self.worst = self.worst.max(v);
        if v > self.tol {
            self.failures += 1;
        }
    }

    fn slack(&mut self, s: f64) {
        self.best = Some(self.best.map_or(s, |b: f64| b.min(s)));
    }
}

fn random_psd(dim: usize, rng: &mut ChaCha8Rng) -> Hermitian {
    let u = random_unitary(dim, rng);
    let rank = rng.gen_range(1..=dim);
    // Every third draw has a repeated top eigenvalue.
    let repeated = rng.gen_range(0..3) == 0;
    let mut d = vec![0.0; dim];
    for (i, x) in d.iter_mut().enumerate().take(rank) {
        *x = if repeated && i < 2 { 1.0 } else { rng.gen_range(0.05..1.0) };
    }
    let scale = rng.gen_range(0.1..5.0);
    Hermitian::from_real_diagonal(&d).congruence(&u).scaled(scale)
}

fn random_projector(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> Projector {
    let u = random_unitary(dim, rng);
    let cols: Vec<CVector> = (0..rank).map(|i| u.column(i).into_owned()).collect();
    Projector::from_orthonormal(&cols, dim)
}

fn random_state_in(p: &Projector, rng: &mut ChaCha8Rng) -> Result<DensityOperator> {
    let rank = rng.gen_range(1..=p.rank());
    random_density_in(p, rank, rng)
}

fn full_density(dim: usize, rng: &mut ChaCha8Rng) -> Hermitian {
    let g = ginibre(dim, dim, rng);
    let h = Hermitian::symmetrized(&g * g.adjoint());
    let t = h.trace();
    h.scaled(1.0 / t)
}

fn max_trace_bound(dim: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let nu = random_psd(dim, rng);
    let top = lambda_max(&nu)?;
    let zeta = random_state_in(&Projector::identity(dim), rng)?;
    let v = zeta.op().tr_prod(&nu);
    t.violation(v - top - 1e-12 * top);
    t.slack(top - v);
    let tol = Tolerances::default();
    let pmax = extremal_projector(&nu, Extremum::Max, &tol)?;
    // P^max ν = ‖ν‖ P^max.
    let lhs = pmax.matrix() * nu.matrix();
    let rhs = pmax.matrix() * crate::linalg::c64(top, 0.0);
    t.violation(crate::linalg::max_abs(&(lhs - rhs)) / top.max(1.0));
    let eq = random_state_in(&pmax, rng)?;
    t.violation((eq.op().tr_prod(&nu) - top).abs() / top.max(1.0));
    Ok(())
}

fn min_trace_bound(dim: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let nu = random_psd(dim, rng);
    let tol = Tolerances::default();
    let support = support_projector(&nu, RANK_TOL)?;
    let pmin = extremal_projector(&nu, Extremum::MinNonzero, &tol)?;
    let low = pmin.as_hermitian().tr_prod(&nu) / pmin.rank() as f64;
    let zeta = random_state_in(&support, rng)?;
    let v = zeta.op().tr_prod(&nu);
    let scale = lambda_max(&nu)?.max(1.0);
    t.violation((low - v) / scale);
    t.slack(v - low);
    let eq = random_state_in(&pmin, rng)?;
    t.violation((eq.op().tr_prod(&nu) - low).abs() / scale);
    Ok(())
}

fn single_min(dim: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    // σ with a random support, P a random subspace of that support.
    let k = rng.gen_range(1..=dim);
    let u = random_unitary(dim, rng);
    let support: Vec<CVector> = (0..k).map(|i| u.column(i).into_owned()).collect();
    let support_p = Projector::from_orthonormal(&support, dim);
    let sigma = random_density_in(&support_p, k, rng)?.op().clone();
    let m = rng.gen_range(1..=k);
    let inner = random_unitary(k, rng);
    let basis = CMatrix::from_columns(&support) * inner.columns(0, m);
    let p_cols: Vec<CVector> = (0..m).map(|i| basis.column(i).into_owned()).collect();
    let p = Projector::from_orthonormal(&p_cols, dim);
    let target = 1.0 / p.as_hermitian().tr_prod(&sigma);
    let space = Projector::from_hermitian(&(support_p.complement().as_hermitian() + p.as_hermitian()))?;
    let mut best = f64::INFINITY;
    for _ in 0..20 {
        let psi = random_state_in(&space, rng)?;
        let val = lambda_max(psi.op())? / psi.op().tr_prod(&sigma);
        best = best.min(val);
    }
    t.violation((target - best) / target);
    t.slack((best - target) / target);
    let flat = p.as_hermitian().scaled(1.0 / m as f64);
    let at = lambda_max(&flat)? / flat.tr_prod(&sigma);
    t.violation((at - target).abs() / target);
    Ok(())
}

fn gen_proj(dim: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let k = rng.gen_range(0..dim);
    let pi = random_projector(dim, k, rng);
    let inside = rng.gen_bool(0.5);
    let zeta = if inside {
        random_state_in(&pi.complement(), rng)?.op().clone()
    } else {
        // Generic, or a small leak out of I − Π.
        let base = random_state_in(&pi.complement(), rng)?.op().clone();
        let leak = random_psd(dim, rng);
        let eps = if rng.gen_bool(0.5) { 1.0 } else { 1e-4 };
        &base + &leak.scaled(eps)
    };
    let scale = zeta.norm()?.max(1e-300);
    let r1 = zeta.sandwich(pi.as_hermitian()).norm()? / scale;
    let left = crate::linalg::spectral_norm(&(pi.matrix() * zeta.matrix()))? / scale;
    let right = crate::linalg::spectral_norm(&(zeta.matrix() * pi.matrix()))? / scale;
    let r2 = left.max(right);
    let r3 = pi.complement().confinement_residual(&zeta)? / scale;
    let tol = 1e-9;
    let holds = [r1 <= tol, r2 <= tol, r3 <= tol];
    let agree = holds.iter().all(|&h| h) || holds.iter().all(|&h| !h);
    // A leak can only be invisible when Π misses it entirely (k = 0).
    let expected = inside || k == 0;
    if !agree || holds[0] != expected {
        t.violation(f64::INFINITY);
    } else if holds[0] {
        t.violation(r1.max(r2).max(r3));
    } else {
        t.violation(0.0);
    }
    Ok(())
}

fn projector_subset(dim: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let k = rng.gen_range(1..=dim);
    let pi = random_projector(dim, k, rng);
    let nu = random_state_in(&pi, rng)?.op().scaled(rng.gen_range(0.1..3.0));
    t.violation((pi.matrix() * nu.matrix() - nu.matrix()).norm());
    let support = support_projector(&nu, RANK_TOL)?;
    let zeta = random_state_in(&support, rng)?;
    t.violation(pi.confinement_residual(zeta.op())?);
    Ok(())
}

fn orthogonal_pair(dim: usize, rng: &mut ChaCha8Rng) -> (Projector, Projector) {
    let u = random_unitary(dim, rng);
    let k1 = rng.gen_range(1..dim);
    let k2 = rng.gen_range(1..=dim - k1);
    let cols: Vec<CVector> = (0..k1 + k2).map(|i| u.column(i).into_owned()).collect();
    (Projector::from_orthonormal(&cols[..k1], dim), Projector::from_orthonormal(&cols[k1..], dim))
}

fn upsilon_scaling(dim: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let (p1, p2) = orthogonal_pair(dim, rng);
    let sigma = full_density(dim, rng);
    let r = rng.gen_range(0.0..=1.0);
    let k = 3.0;
    let base = upsilon(&p1, &p2, &sigma, r)?;
    let scaled = upsilon(&p1, &p2, &sigma.scaled(k), r)?;
    let gap = (base.gap * k).max(scaled.gap);
    t.violation(((scaled.value - k * base.value).abs() - gap) / (k * base.value).max(1.0));
    Ok(())
}

fn upsilon_endpoints(dim: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let (p1, p2) = orthogonal_pair(dim, rng);
    let sigma = full_density(dim, rng);
    let inv_half = pseudo_power(&sigma, -0.5, RANK_TOL)?;
    for (r, p) in [(0.0, &p2), (1.0, &p1)] {
        let expect = pseudo_power(&p.as_hermitian().sandwich(&inv_half), -1.0, RANK_TOL)?.trace();
        let got = upsilon(&p1, &p2, &sigma, r)?.value;
        t.violation((got - expect).abs() / expect.max(1.0));
    }
    Ok(())
}

fn double_min(dim: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let rho = full_density(dim, rng);
    let sigma = full_density(dim, rng);
    let (p, _) = critical_prior(&rho, &sigma, RANK_TOL)?;
    let inst = ProblemInstance::from_operators(rho, sigma, p)?;
    let ext = extremal_subspaces(&inst)?;
    if ext.degenerate || ext.p_max.rank() != 1 || ext.p_min.rank() != 1 {
        return Ok(());
    }
    let r = rng.gen_range(0.0..=1.0);
    let unit = |q: &Projector| DensityOperator::new(q.as_hermitian().clone(), &Tolerances::default());
    let params =
        ConstructionParams::EqualC3 { psi_max: unit(&ext.p_max)?, psi_min: unit(&ext.p_min)?, c: None, c_r: r };
    let bound = max_c(&inst, &params)?;
    let join = ext.p_max.join(&ext.p_min)?;
    let shorted = join.as_hermitian().sandwich(&pseudo_power(inst.sigma_op(), 0.5, RANK_TOL)?);
    let opts = UpsilonOptions { force_numeric: true, ..Default::default() };
    let numeric = upsilon_with(&ext.t_max, &ext.t_min, &shorted, r, &opts)?;
    let closed = upsilon(&ext.t_max, &ext.t_min, &shorted, r)?;
    let scale = bound.max(1.0);
    t.violation((closed.value - bound).abs() / scale);
    t.violation(((numeric.value - bound).abs() - numeric.gap) / scale);
    Ok(())
}

/// Runs `trials` random instances of `lemma` in dimension `dim`.
pub fn check_lemma(lemma: Lemma, dim: usize, seed: u64, trials: usize) -> Result<LemmaReport> {
    if !(1..=8).contains(&dim) {
        return Err(Error::BadParameter(format!("lemma checks need 1 <= dim <= 8, got {dim}")));
    }
    let needs_pair = matches!(lemma, Lemma::UpsilonScaling | Lemma::UpsilonEndpoints | Lemma::DoubleMin);
    if needs_pair && dim < 2 {
        return Err(Error::BadParameter(format!("{lemma:?} needs dim >= 2")));
    }
    let mut tally = Tally::new(lemma.tolerance());
    for i in 0..trials {
        let mut rng = rng_from_seed(child_seed(seed, i as u64));
        match lemma {
            Lemma::MaxTraceBound => max_trace_bound(dim, &mut rng, &mut tally)?,
            Lemma::MinTraceBound => min_trace_bound(dim, &mut rng, &mut tally)?,
            Lemma::SingleMin => single_min(dim, &mut rng, &mut tally)?,
            Lemma::GenProjEquivalence => gen_proj(dim, &mut rng, &mut tally)?,
            Lemma::ProjectorSubset => projector_subset(dim, &mut rng, &mut tally)?,
            Lemma::UpsilonScaling => upsilon_scaling(dim, &mut rng, &mut tally)?,
            Lemma::UpsilonEndpoints => upsilon_endpoints(dim, &mut rng, &mut tally)?,
            Lemma::DoubleMin => double_min(dim, &mut rng, &mut tally)?,
        }
    }
    Ok(LemmaReport {
        lemma,
        dim,
        trials,
        seed,
        worst_violation: tally.worst,
        best_value: tally.best,
        tolerance: tally.tol,
        failures: tally.failures,
        passed: tally.failures == 0,
    })
}
