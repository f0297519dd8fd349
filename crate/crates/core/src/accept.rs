//! Acceptance of error-minimizing measurements and its maximum.

use rayon::prelude::*;
use serde::Serialize;

use crate::construct::{construct, extremal_subspaces, ConstructionParams, ExtremalSubspaces};
use crate::error::{Error, Result};
use crate::linalg::{lambda_max, pseudo_power, Hermitian};
use crate::metrics::{acceptance, classify, supports, CaseLabel, SupportRelation};
use crate::state::{ProblemInstance, ThreeOutcomeMeasurement};
use crate::upsilon::{upsilon, UpsilonMethod, UpsilonResult};

/// Number of grid points used to bracket the best mixing ratio.
pub const C_R_GRID: usize = 1001;
const GOLDEN_ITERS: usize = 80;

/// `(A_ρ, A_σ)` of the measurement described by `params`, from the
/// parameters alone.
pub fn acceptance_from_params(inst: &ProblemInstance, params: &ConstructionParams) -> Result<(f64, f64)> {
    // Construction performs every validity check and resolves `c = None`.
    construct(inst, params)?;
    let c = match params.c() {
        Some(c) => c,
        None => crate::construct::max_c(inst, params)?,
    };
    let ext = || extremal_subspaces(inst);
    Ok(match params {
        ConstructionParams::EqualC1 { .. } => (c * ext()?.r_max, c),
        ConstructionParams::EqualC2 { .. } => (c * ext()?.r_min, c),
        ConstructionParams::EqualC3 { c_r, .. } => {
            let e = ext()?;
            (c * (c_r * e.r_max + (1.0 - c_r) * e.r_min), c)
        }
        ConstructionParams::EqualDegenerate { .. } => (c, c),
        ConstructionParams::Unequal1 { .. } => (c, 0.0),
        ConstructionParams::Unequal2 { .. } => (0.0, c),
        ConstructionParams::Unequal3 { c_r, .. } => (c * c_r, c * (1.0 - c_r)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AcceptanceMethod {
    ClosedForm,
    NumericUpsilon,
}

/// A measurement maximizing one of the two acceptances, with both of its
/// acceptance values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub a_rho: f64,
    pub a_sigma: f64,
    pub achieving_measurement: Option<ThreeOutcomeMeasurement>,
    pub c_r_star: Option<f64>,
    pub method: AcceptanceMethod,
}

/// Largest acceptance for each state over all error-minimizing measurements.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxAcceptance {
    pub case: CaseLabel,
    pub a_rho_max: f64,
    pub a_sigma_max: f64,
    pub for_rho: AcceptanceReport,
    pub for_sigma: AcceptanceReport,
}

fn closed(a_rho: f64, a_sigma: f64, m: ThreeOutcomeMeasurement) -> AcceptanceReport {
    AcceptanceReport {
        a_rho,
        a_sigma,
        achieving_measurement: Some(m),
        c_r_star: None,
        method: AcceptanceMethod::ClosedForm,
    }
}

fn single(case: CaseLabel, report: AcceptanceReport) -> MaxAcceptance {
    MaxAcceptance {
        case,
        a_rho_max: report.a_rho,
        a_sigma_max: report.a_sigma,
        for_rho: report.clone(),
        for_sigma: report,
    }
}

/// Maximizes `f` over `[0, 1]`: dense grid, then golden section on the
/// interval around the best grid point.
fn maximize_unit(f: &(dyn Fn(f64) -> Result<f64> + Sync)) -> Result<(f64, f64)> {
    let last = (C_R_GRID - 1) as f64;
    let values: Vec<f64> = (0..C_R_GRID).into_par_iter().map(|i| f(i as f64 / last)).collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let mut arg = best as f64 / last;
    let mut top = values[best];
    let (mut a, mut b) = (best.saturating_sub(1) as f64 / last, (best + 1).min(C_R_GRID - 1) as f64 / last);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > top {
            top = v;
            arg = x;
        }
    }
    Ok((arg, top))
}

/// Measurement `c(r σ^{-1/2}ψ1σ^{-1/2}, (1−r) σ^{-1/2}ψ2σ^{-1/2})` from a Υ
/// solution, with `c` capped so that the result is valid.
fn c3_measurement(ext: &ExtremalSubspaces, u: &UpsilonResult, r: f64) -> Result<ThreeOutcomeMeasurement> {
    let n = ext.sigma_inv_sqrt.dim();
    let lift = |psi: &Option<Hermitian>, w: f64| match psi {
        Some(p) if w > 0.0 => p.sandwich(&ext.sigma_inv_sqrt).scaled(w),
        _ => Hermitian::zeros(n),
    };
    let unit_rho = lift(&u.psi1, r);
    let unit_sigma = lift(&u.psi2, 1.0 - r);
    let top = lambda_max(&(&unit_rho + &unit_sigma))?;
    let c = if top > 0.0 { u.value.min(1.0 / top) } else { 0.0 };
    ThreeOutcomeMeasurement::new(unit_rho.scaled(c), unit_sigma.scaled(c))
}

pub fn max_acceptance_equal(inst: &ProblemInstance) -> Result<MaxAcceptance> {
    let ext = extremal_subspaces(inst)?;
    let case = classify(inst)?;
    let sigma = inst.sigma_op();
    let n = inst.dim();
    match case {
        CaseLabel::C1 => {
            let t = ext.p_max.as_hermitian().tr_prod(sigma);
            let m = ThreeOutcomeMeasurement::new(ext.p_max.as_hermitian().clone(), Hermitian::zeros(n))?;
            Ok(single(case, closed(ext.r_max * t, t, m)))
        }
        CaseLabel::C2 => {
            let t = ext.p_min.as_hermitian().tr_prod(sigma);
            let m = ThreeOutcomeMeasurement::new(Hermitian::zeros(n), ext.p_min.as_hermitian().clone())?;
            Ok(single(case, closed(ext.r_min * t, t, m)))
        }
        _ if ext.degenerate => {
            // ρ = σ: every accepting measurement has the minimum error.
            let t = ext.p_max.as_hermitian().tr_prod(sigma);
            let m = ThreeOutcomeMeasurement::new(ext.p_max.as_hermitian().clone(), Hermitian::zeros(n))?;
            Ok(single(case, closed(ext.r_max * t, t, m)))
        }
        _ => max_acceptance_c3(inst, &ext),
    }
}

fn max_acceptance_c3(inst: &ProblemInstance, ext: &ExtremalSubspaces) -> Result<MaxAcceptance> {
    let rank_tol = inst.tolerances.rank_tol;
    let join = ext.p_max.join(&ext.p_min)?;
    let s_half = pseudo_power(inst.sigma_op(), 0.5, rank_tol)?;
    let shorted = join.as_hermitian().sandwich(&s_half);
    let ups = |r: f64| upsilon(&ext.t_max, &ext.t_min, &shorted, r);
    let weight = |r: f64| r * ext.r_max + (1.0 - r) * ext.r_min;

    let (r_sigma, _) = maximize_unit(&|r| Ok(ups(r)?.value))?;
    let (r_rho, _) = maximize_unit(&|r| Ok(weight(r) * ups(r)?.value))?;

    let report = |r: f64| -> Result<AcceptanceReport> {
        let u = ups(r)?;
        let m = c3_measurement(ext, &u, r)?;
        let (a_rho, a_sigma) = acceptance(inst, &m);
        let method = if u.method == UpsilonMethod::Numeric {
            AcceptanceMethod::NumericUpsilon
        } else {
            AcceptanceMethod::ClosedForm
        };
        Ok(AcceptanceReport { a_rho, a_sigma, achieving_measurement: Some(m), c_r_star: Some(r), method })
    };
    let for_sigma = report(r_sigma)?;
    let for_rho = report(r_rho)?;
    Ok(MaxAcceptance {
        case: CaseLabel::C3,
        a_rho_max: for_rho.a_rho,
        a_sigma_max: for_sigma.a_sigma,
        for_rho,
        for_sigma,
    })
}

pub fn max_acceptance_unequal(inst: &ProblemInstance) -> Result<MaxAcceptance> {
    let sup = supports(inst)?;
    let (rho, sigma) = (inst.rho_op(), inst.sigma_op());
    let n = inst.dim();
    let detect_rho = || -> Result<AcceptanceReport> {
        let effect = sup.sum.as_hermitian() - sup.sigma.as_hermitian();
        let m = ThreeOutcomeMeasurement::new(effect, Hermitian::zeros(n))?;
        Ok(closed(1.0 - sup.sigma.as_hermitian().tr_prod(rho), 0.0, m))
    };
    let detect_sigma = || -> Result<AcceptanceReport> {
        let effect = sup.sum.as_hermitian() - sup.rho.as_hermitian();
        let m = ThreeOutcomeMeasurement::new(Hermitian::zeros(n), effect)?;
        Ok(closed(0.0, 1.0 - sup.rho.as_hermitian().tr_prod(sigma), m))
    };
    Ok(match sup.relation {
        SupportRelation::Equal => return Err(Error::EqualSupports),
        SupportRelation::SigmaInsideRho => single(CaseLabel::SigmaInsideRho, detect_rho()?),
        SupportRelation::RhoInsideSigma => single(CaseLabel::RhoInsideSigma, detect_sigma()?),
        SupportRelation::Incomparable => {
            let (for_rho, for_sigma) = (detect_rho()?, detect_sigma()?);
            MaxAcceptance {
                case: CaseLabel::Incomparable,
                a_rho_max: for_rho.a_rho,
                a_sigma_max: for_sigma.a_sigma,
                for_rho,
                for_sigma,
            }
        }
    })
}

pub fn max_acceptance(inst: &ProblemInstance) -> Result<MaxAcceptance> {
    if supports(inst)?.relation == SupportRelation::Equal {
        max_acceptance_equal(inst)
    } else {
        max_acceptance_unequal(inst)
    }
}
