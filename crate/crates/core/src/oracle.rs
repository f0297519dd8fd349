//! Brute-force search used to cross-check the closed forms, plus seeded
//! generators of problem instances.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::accept::max_acceptance;
use crate::construct::{construct, extremal_subspaces, ConstructionParams};
use crate::error::{Error, Result};
use crate::linalg::{c64, lambda_max, CMatrix, Hermitian, Projector};
use crate::metrics::{
    acceptance, critical_prior, min_postselected_error, postselected_error, supports, CaseLabel, SupportRelation,
};
use crate::state::{
    child_seed, ginibre, rng_from_seed, DensityOperator, Prior, ProblemInstance, ThreeOutcomeMeasurement,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub trials: usize,
    pub seed: u64,
    pub refine_steps: usize,
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { trials: 2000, seed: 0, refine_steps: 64, tol: 1e-3 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::BadParameter("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one oracle search compared with the value from theory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub target: String,
    pub trials: usize,
    pub seed: u64,
    pub best_value: f64,
    pub reference: f64,
    /// How far the search got past the theoretical value (0 if it did not).
    pub worst_violation: f64,
}

fn factor<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    if rank == 0 {
        CMatrix::zeros(dim, 0)
    } else {
        ginibre(dim, rank, rng)
    }
}

/// Measurement `s·(FF†, GG†)/λ_max(FF† + GG†)`.
fn from_factors(f: &CMatrix, g: &CMatrix, s: f64) -> Option<ThreeOutcomeMeasurement> {
    let a = Hermitian::symmetrized(f * f.adjoint());
    let b = Hermitian::symmetrized(g * g.adjoint());
    let top = lambda_max(&(&a + &b)).ok()?;
    if top.is_nan() || top <= 0.0 {
        return None;
    }
    let k = s / top;
    ThreeOutcomeMeasurement::new(a.scaled(k), b.scaled(k)).ok()
}

fn random_factors<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> (CMatrix, CMatrix) {
    loop {
        let kf = rng.gen_range(0..=dim);
        let kg = rng.gen_range(0..=dim);
        if kf + kg > 0 {
            return (factor(dim, kf, rng), factor(dim, kg, rng));
        }
    }
}

/// A random valid measurement with effects of random rank.
pub fn sample_measurement(dim: usize, seed: u64) -> ThreeOutcomeMeasurement {
    let mut rng = rng_from_seed(seed);
    sample_measurement_with(dim, &mut rng, None)
}

/// As [`sample_measurement`]; `scale` overrides the uniform draw of `s`.
pub fn sample_measurement_with<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
    scale: Option<f64>,
) -> ThreeOutcomeMeasurement {
    assert!(dim >= 1, "dimension must be at least 1");
    loop {
        let (f, g) = random_factors(dim, rng);
        let s = scale.unwrap_or_else(|| 1.0 - rng.gen::<f64>());
        if let Some(m) = from_factors(&f, &g, s) {
            return m;
        }
    }
}

fn perturb<R: Rng + ?Sized>(m: &CMatrix, eta: f64, rng: &mut R) -> CMatrix {
    if m.ncols() == 0 {
        return m.clone();
    }
    let noise = ginibre(m.nrows(), m.ncols(), rng);
    let scale = m.norm().max(1e-300) / (noise.norm().max(1e-300));
    m + noise * c64(eta * scale, 0.0)
}

/// Local search over factors: accept a perturbation when it improves `score`.
fn climb<S>(start: Vec<CMatrix>, steps: usize, rng: &mut ChaCha8Rng, score: S) -> f64
where
    S: Fn(&[CMatrix]) -> Option<f64>,
{
    let mut cur = start;
    let mut best = score(&cur).unwrap_or(f64::NEG_INFINITY);
    let mut eta = 0.3;
    for _ in 0..steps {
        let mut improved = false;
        for _ in 0..8 {
            // One block, or one entry of it, per proposal; moving everything
            // at once rarely improves near a tie between eigenvalues.
            let block = rng.gen_range(0..cur.len());
            let mut cand = cur.clone();
            let m = &cur[block];
            if m.is_empty() || rng.gen_bool(0.5) {
                cand[block] = perturb(m, eta, rng);
            } else {
                let (i, j) = (rng.gen_range(0..m.nrows()), rng.gen_range(0..m.ncols()));
                let step = eta * m.norm().max(1e-300);
                cand[block][(i, j)] += c64(step * rng.sample::<f64, _>(StandardNormal), 0.0);
            }
            if let Some(v) = score(&cand) {
                // Ties are accepted so the search can drift along plateaus.
                if v >= best {
                    improved = v > best;
                    best = v;
                    cur = cand;
                    if improved {
                        break;
                    }
                }
            }
        }
        if improved {
            eta = (eta * 1.5).min(1.0);
        } else {
            eta *= 0.5;
            // Restart the step so a stalled search can leave a kink.
            if eta < 1e-6 {
                eta = 0.3;
            }
        }
    }
    best
}

/// Random measurements whose error is zero, built from the support
/// structure. Only used for instances with different supports.
fn zero_error_seeds(inst: &ProblemInstance, rng: &mut ChaCha8Rng) -> Result<Vec<(CMatrix, CMatrix)>> {
    let sup = supports(inst)?;
    let mut out = Vec::new();
    let off_sigma = sup.sum.as_hermitian() - sup.sigma.as_hermitian();
    let off_rho = sup.sum.as_hermitian() - sup.rho.as_hermitian();
    for (eff, is_rho) in [(off_sigma, true), (off_rho, false)] {
        let p = Projector::from_hermitian(&eff)?;
        if p.is_zero() {
            continue;
        }
        let w = p.basis()? * ginibre(p.rank(), p.rank(), rng);
        let empty = CMatrix::zeros(inst.dim(), 0);
        out.push(if is_rho { (w, empty) } else { (empty, w) });
    }
    Ok(out)
}

/// Smallest postselected error found by random search and local refinement.
pub fn oracle_min_error(inst: &ProblemInstance, cfg: &OracleConfig) -> Result<f64> {
    cfg.validate()?;
    let dim = inst.dim();
    let draws: Vec<(f64, usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(child_seed(cfg.seed, i as u64));
            let m = sample_measurement_with(dim, &mut rng, None);
            (postselected_error(inst, &m).unwrap_or(f64::INFINITY), i)
        })
        .collect();
    let (mut best, best_idx) =
        draws.iter().copied().fold((f64::INFINITY, 0), |acc, d| if d.0 < acc.0 { d } else { acc });

    let mut rng = rng_from_seed(child_seed(cfg.seed, u64::MAX));
    let mut starts = Vec::new();
    if supports(inst)?.relation != SupportRelation::Equal {
        for (f, g) in zero_error_seeds(inst, &mut rng)? {
            if let Some(m) = from_factors(&f, &g, 1.0) {
                if let Some(e) = postselected_error(inst, &m) {
                    best = best.min(e);
                }
                starts.push(vec![f, g]);
            }
        }
    }
    // Replay the best random draw to recover its factors.
    let mut replay = rng_from_seed(child_seed(cfg.seed, best_idx as u64));
    let (f, g) = random_factors(dim, &mut replay);
    starts.push(vec![f, g]);
    for start in starts {
        let v = climb(start, cfg.refine_steps, &mut rng, |x| {
            from_factors(&x[0], &x[1], 1.0).and_then(|m| postselected_error(inst, &m)).map(|e| -e)
        });
        best = best.min(-v);
    }
    Ok(best)
}

/// One family of error-minimizing measurements: densities drawn inside
/// `spaces`, plus a mixing ratio when there are two.
struct Family {
    spaces: Vec<CMatrix>,
    build: fn(Vec<DensityOperator>, f64) -> ConstructionParams,
}

fn density_from_factor(w: &CMatrix) -> Option<DensityOperator> {
    let h = Hermitian::symmetrized(w * w.adjoint());
    let t = h.trace();
    if t.is_nan() || t <= 0.0 {
        return None;
    }
    DensityOperator::new(h.scaled(1.0 / t), &Default::default()).ok()
}

fn families(inst: &ProblemInstance, case: CaseLabel) -> Result<Vec<Family>> {
    let sup = supports(inst)?;
    let basis = |h: Hermitian| -> Result<CMatrix> { Projector::from_hermitian(&h)?.basis() };
    let kernel = sup.sigma.complement();
    Ok(match case {
        CaseLabel::C1 | CaseLabel::C2 | CaseLabel::C3 => {
            let ext = extremal_subspaces(inst)?;
            let with_max = basis(kernel.as_hermitian() + ext.p_max.as_hermitian())?;
            let with_min = basis(kernel.as_hermitian() + ext.p_min.as_hermitian())?;
            match case {
                CaseLabel::C1 => vec![Family {
                    spaces: vec![with_max],
                    build: |d, _| ConstructionParams::EqualC1 { psi_max: d[0].clone(), c: None, residual_sigma: None },
                }],
                CaseLabel::C2 => vec![Family {
                    spaces: vec![with_min],
                    build: |d, _| ConstructionParams::EqualC2 { psi_min: d[0].clone(), c: None, residual_rho: None },
                }],
                _ if ext.degenerate => vec![Family {
                    spaces: vec![CMatrix::identity(inst.dim(), inst.dim())],
                    build: |d, c_r| ConstructionParams::EqualDegenerate { psi: d[0].clone(), c: None, c_r },
                }],
                _ => vec![Family {
                    spaces: vec![with_max, with_min],
                    build: |d, c_r| ConstructionParams::EqualC3 {
                        psi_max: d[0].clone(),
                        psi_min: d[1].clone(),
                        c: None,
                        c_r,
                    },
                }],
            }
        }
        _ => {
            let off_sigma = basis(sup.sigma.complement().as_hermitian().clone())?;
            let off_rho = basis(sup.rho.complement().as_hermitian().clone())?;
            let e1 = Family {
                spaces: vec![off_sigma.clone()],
                build: |d, _| ConstructionParams::Unequal1 { psi_rho: d[0].clone(), c1: None, residual_sigma: None },
            };
            let e2 = Family {
                spaces: vec![off_rho.clone()],
                build: |d, _| ConstructionParams::Unequal2 { psi_sigma: d[0].clone(), c2: None, residual_rho: None },
            };
            let e3 = Family {
                spaces: vec![off_sigma, off_rho],
                build: |d, c_r| ConstructionParams::Unequal3 {
                    psi_rho: d[0].clone(),
                    psi_sigma: d[1].clone(),
                    c3: None,
                    c_r,
                },
            };
            match case {
                CaseLabel::SigmaInsideRho => vec![e1],
                CaseLabel::RhoInsideSigma => vec![e2],
                _ => vec![e1, e2, e3],
            }
        }
    })
}

/// Maps `R` onto `[0, 1]` smoothly, with both endpoints reachable on open
/// sets.
fn unit(z: f64) -> f64 {
    (0.5 + 0.6 * z.tanh()).clamp(0.0, 1.0)
}

fn unit_inverse(t: f64) -> f64 {
    ((t - 0.5) / 0.6).clamp(-0.999_999, 0.999_999).atanh()
}

/// Density `Q diag(unit(z)) Q† / Σ unit(z)` on the span of `space`, with `Q`
/// the unitary factor of `w`.
fn density_from_weights(space: &CMatrix, w: &CMatrix, z: &CMatrix) -> Option<DensityOperator> {
    let q = w.clone().qr().q();
    let weights: Vec<f64> = z.iter().map(|v| unit(v.re)).collect();
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        weights.len(),
        weights.iter().map(|x| c64(x / total, 0.0)),
    ));
    let inner = space * q;
    let h = Hermitian::symmetrized(&inner * d * inner.adjoint());
    DensityOperator::new(h, &Default::default()).ok()
}

/// Acceptance pair of the measurement built from a search point: per space a
/// square factor and a weight column, then `c_r` as a 1×1 matrix when the
/// family has two spaces.
fn family_acceptance(inst: &ProblemInstance, fam: &Family, x: &[CMatrix]) -> Option<(f64, f64)> {
    let k = fam.spaces.len();
    let mut dens = Vec::with_capacity(k);
    for (j, space) in fam.spaces.iter().enumerate() {
        dens.push(density_from_weights(space, &x[2 * j], &x[2 * j + 1])?);
    }
    let c_r = if k == 2 { unit(x[2 * k][(0, 0)].re) } else { 1.0 };
    let m = construct(inst, &(fam.build)(dens, c_r)).ok()?;
    Some(acceptance(inst, &m))
}

fn random_point<R: Rng + ?Sized>(fam: &Family, rng: &mut R) -> Vec<CMatrix> {
    let mut x = Vec::new();
    for b in &fam.spaces {
        let k = b.ncols();
        let rank = rng.gen_range(1..=k.max(1));
        x.push(ginibre(k, k, rng));
        // Weights beyond `rank` start at zero; refinement can raise them.
        x.push(CMatrix::from_fn(k, 1, |i, _| {
            let z = if i < rank { unit_inverse(rng.gen_range(0.05..1.0)) } else { unit_inverse(0.0) };
            c64(z, 0.0)
        }));
    }
    if fam.spaces.len() == 2 {
        let grid = rng.gen_range(0..=20) as f64 / 20.0;
        x.push(CMatrix::from_element(1, 1, c64(unit_inverse(grid), 0.0)));
    }
    x
}

/// Largest `(A_ρ, A_σ)` found by sampling error-minimizing parameters and
/// refining the best samples.
pub fn oracle_max_acceptance(inst: &ProblemInstance, cfg: &OracleConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let case = crate::metrics::classify(inst)?;
    let fams = families(inst, case)?;
    let mut best = (0.0f64, 0.0f64);
    for (fi, fam) in fams.iter().enumerate() {
        if fam.spaces.iter().any(|b| b.ncols() == 0) {
            continue;
        }
        let base = child_seed(cfg.seed, fi as u64);
        let draws: Vec<(f64, f64, usize)> = (0..cfg.trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_from_seed(child_seed(base, i as u64));
                let x = random_point(fam, &mut rng);
                let (a, b) = family_acceptance(inst, fam, &x).unwrap_or((0.0, 0.0));
                (a, b, i)
            })
            .collect();
        let pick = |which: usize| {
            draws.iter().copied().fold((f64::NEG_INFINITY, 0), |acc, d| {
                let v = if which == 0 { d.0 } else { d.1 };
                if v > acc.0 {
                    (v, d.2)
                } else {
                    acc
                }
            })
        };
        for which in 0..2 {
            let (v, idx) = pick(which);
            let mut rng = rng_from_seed(child_seed(base, idx as u64));
            let start = random_point(fam, &mut rng);
            let mut climb_rng = rng_from_seed(child_seed(base, u64::MAX - which as u64));
            let refined = climb(start, cfg.refine_steps, &mut climb_rng, |x| {
                family_acceptance(inst, fam, x).map(|p| if which == 0 { p.0 } else { p.1 })
            });
            let top = v.max(refined);
            if which == 0 {
                best.0 = best.0.max(top);
            } else {
                best.1 = best.1.max(top);
            }
        }
    }
    Ok(best)
}

/// Runs both searches and compares them with theory.
pub fn oracle_reports(inst: &ProblemInstance, cfg: &OracleConfig) -> Result<Vec<OracleReport>> {
    let e_s = min_postselected_error(inst)?.e_s;
    let e = oracle_min_error(inst, cfg)?;
    let theory = max_acceptance(inst)?;
    let (ar, as_) = oracle_max_acceptance(inst, cfg)?;
    let rep = |target: &str, best: f64, reference: f64, violation: f64| OracleReport {
        target: target.to_string(),
        trials: cfg.trials,
        seed: cfg.seed,
        best_value: best,
        reference,
        worst_violation: violation.max(0.0),
    };
    Ok(vec![
        rep("min_error", e, e_s, e_s - e),
        rep("max_acceptance_rho", ar, theory.a_rho_max, ar - theory.a_rho_max),
        rep("max_acceptance_sigma", as_, theory.a_sigma_max, as_ - theory.a_sigma_max),
    ])
}

/// Haar-like random unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random density of full rank on the span of the given columns.
fn density_on<R: Rng + ?Sized>(cols: &CMatrix, rng: &mut R) -> DensityOperator {
    let k = cols.ncols();
    let g = ginibre(k, k, rng);
    let w = cols * g;
    let h = Hermitian::symmetrized(&w * w.adjoint());
    let t = h.trace();
    DensityOperator::new(h.scaled(1.0 / t), &Default::default()).expect("sampled density is valid")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PriorChoice {
    Fixed(f64),
    /// The critical prior of the sampled pair (equal supports only).
    Critical,
}

/// Random instance with the requested support relation. Equal supports use
/// a random rank in `2..=dim`; the others place the states on overlapping
/// coordinate blocks of a random basis.
pub fn sample_instance(
    dim: usize,
    relation: SupportRelation,
    prior: PriorChoice,
    seed: u64,
) -> Result<ProblemInstance> {
    if dim < 2 {
        return Err(Error::BadRank { dim, rank: 0 });
    }
    let mut rng = rng_from_seed(seed);
    let u = random_unitary(dim, &mut rng);
    let cols = |a: usize, b: usize| u.columns(a, b - a).into_owned();
    let (rho, sigma) = match relation {
        SupportRelation::Equal => {
            let r = rng.gen_range(2..=dim);
            (density_on(&cols(0, r), &mut rng), density_on(&cols(0, r), &mut rng))
        }
        SupportRelation::SigmaInsideRho | SupportRelation::RhoInsideSigma => {
            let big = rng.gen_range(2..=dim);
            let small = rng.gen_range(1..big);
            // The small support is a random subspace of the big one.
            let inner = cols(0, big) * random_unitary(big, &mut rng).columns(0, small);
            let outer = density_on(&cols(0, big), &mut rng);
            let inner = density_on(&inner, &mut rng);
            if relation == SupportRelation::SigmaInsideRho {
                (outer, inner)
            } else {
                (inner, outer)
            }
        }
        SupportRelation::Incomparable => {
            let a = rng.gen_range(1..dim);
            let start = rng.gen_range(1..=a);
            let end = rng.gen_range(a + 1..=dim);
            (density_on(&cols(0, a), &mut rng), density_on(&cols(start, end), &mut rng))
        }
    };
    let p = match prior {
        PriorChoice::Fixed(p) => p,
        PriorChoice::Critical => critical_prior(rho.op(), sigma.op(), crate::linalg::RANK_TOL)?.0,
    };
    ProblemInstance::new(rho, sigma, Prior::new(p)?, Default::default())
}

/// Random density confined to the span of `basis` columns.
pub fn random_density_on<R: Rng + ?Sized>(basis: &CMatrix, rng: &mut R) -> Option<DensityOperator> {
    let k = basis.ncols();
    if k == 0 {
        return None;
    }
    let rank = rng.gen_range(1..=k);
    density_from_factor(&(basis * ginibre(k, rank, rng)))
}

/// Random error-minimizing parameters for the instance's regime.
pub fn sample_params<R: Rng + ?Sized>(inst: &ProblemInstance, rng: &mut R) -> Result<ConstructionParams> {
    let case = crate::metrics::classify(inst)?;
    let fams = families(inst, case)?;
    let usable: Vec<&Family> = fams.iter().filter(|f| f.spaces.iter().all(|b| b.ncols() > 0)).collect();
    if usable.is_empty() {
        return Err(Error::SetEmptyForSupports { set: "any".into(), relation: case.to_string() });
    }
    let fam = usable[rng.gen_range(0..usable.len())];
    let dens =
        fam.spaces.iter().map(|b| random_density_on(b, rng).ok_or(Error::ZeroProjector)).collect::<Result<Vec<_>>>()?;
    let c_r = rng.gen::<f64>();
    let params = (fam.build)(dens, c_r);
    let bound = crate::construct::max_c(inst, &params)?;
    let frac = 1.0 - rng.gen::<f64>();
    Ok(params.with_c(Some(bound * frac)))
}
