//! Extremal subspaces, error-minimizing measurements and membership tests.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eig, extremal_from_eig, lambda_max, pseudo_power, relative_operator, support_projector, Extremum, Hermitian,
    Projector, MEMBERSHIP_TOL,
};
use crate::metrics::{classify, supports, CaseLabel, SupportRelation, Supports, UNDEFINED_DENOMINATOR};
use crate::state::{DensityOperator, ProblemInstance, ThreeOutcomeMeasurement};

/// Smallest `Tr(ψ ν)` accepted when normalizing an effect.
pub const OVERLAP_TOL: f64 = 1e-12;
/// Largest `Tr(Λ_ρ σ)` or `Tr(Λ_σ ρ)` tolerated for a zero-error measurement.
pub const ZERO_ERROR_TOL: f64 = 1e-8;
const C_SLACK: f64 = 1e-10;

/// `T^max`, `T^min` (extremal eigenspaces of `σ^{-1/2}ρσ^{-1/2}`) and their
/// images `P^max`, `P^min` under `σ^{-1/2}`.
#[derive(Clone, Debug)]
pub struct ExtremalSubspaces {
    pub t_max: Projector,
    pub t_min: Projector,
    pub p_max: Projector,
    pub p_min: Projector,
    /// `R_max(ρ,σ)` and `R_min(ρ,σ)`.
    pub r_max: f64,
    pub r_min: f64,
    /// The relative operator is a multiple of `Π_σ`, so `T^max = T^min`.
    pub degenerate: bool,
    pub support_sigma: Projector,
    pub sigma_inv_sqrt: Hermitian,
}

pub fn extremal_subspaces(inst: &ProblemInstance) -> Result<ExtremalSubspaces> {
    let sup = supports(inst)?;
    if sup.relation != SupportRelation::Equal {
        return Err(Error::UnequalSupports);
    }
    extremal_with(inst, &sup)
}

fn extremal_with(inst: &ProblemInstance, sup: &Supports) -> Result<ExtremalSubspaces> {
    let tol = &inst.tolerances;
    let rel = relative_operator(inst.rho_op(), inst.sigma_op(), tol.rank_tol)?;
    let es = eig(&rel)?;
    let t_max = extremal_from_eig(&es, Extremum::Max, tol)?;
    let t_min = extremal_from_eig(&es, Extremum::MinNonzero, tol)?;
    let r_max = es.values[0];
    let thr = tol.rank_tol * es.norm().max(1.0);
    let r_min = es.values.iter().rev().copied().find(|&x| x > thr).unwrap_or(0.0);
    let degenerate = r_max - r_min <= tol.cluster_tol * es.norm().max(1.0);
    let s_inv = pseudo_power(inst.sigma_op(), -0.5, tol.rank_tol)?;
    let p_max = support_projector(&t_max.as_hermitian().sandwich(&s_inv), tol.rank_tol)?;
    let p_min = support_projector(&t_min.as_hermitian().sandwich(&s_inv), tol.rank_tol)?;
    Ok(ExtremalSubspaces {
        t_max,
        t_min,
        p_max,
        p_min,
        r_max,
        r_min,
        degenerate,
        support_sigma: sup.sigma.clone(),
        sigma_inv_sqrt: s_inv,
    })
}

/// Free parameters of an error-minimizing measurement. `c = None` selects
/// the largest admissible value.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstructionParams {
    EqualC1 {
        psi_max: DensityOperator,
        c: Option<f64>,
        residual_sigma: Option<Hermitian>,
    },
    EqualC2 {
        psi_min: DensityOperator,
        c: Option<f64>,
        residual_rho: Option<Hermitian>,
    },
    EqualC3 {
        psi_max: DensityOperator,
        psi_min: DensityOperator,
        c: Option<f64>,
        c_r: f64,
    },
    /// `ρ = σ` at `p_ρ = 1/2`: both effects share one state `ψ`.
    EqualDegenerate {
        psi: DensityOperator,
        c: Option<f64>,
        c_r: f64,
    },
    Unequal1 {
        psi_rho: DensityOperator,
        c1: Option<f64>,
        residual_sigma: Option<Hermitian>,
    },
    Unequal2 {
        psi_sigma: DensityOperator,
        c2: Option<f64>,
        residual_rho: Option<Hermitian>,
    },
    Unequal3 {
        psi_rho: DensityOperator,
        psi_sigma: DensityOperator,
        c3: Option<f64>,
        c_r: f64,
    },
}

impl ConstructionParams {
    pub fn name(&self) -> &'static str {
        match self {
            ConstructionParams::EqualC1 { .. } => "EqualC1",
            ConstructionParams::EqualC2 { .. } => "EqualC2",
            ConstructionParams::EqualC3 { .. } => "EqualC3",
            ConstructionParams::EqualDegenerate { .. } => "EqualDegenerate",
            ConstructionParams::Unequal1 { .. } => "Unequal1",
            ConstructionParams::Unequal2 { .. } => "Unequal2",
            ConstructionParams::Unequal3 { .. } => "Unequal3",
        }
    }

    pub fn is_equal_support(&self) -> bool {
        matches!(
            self,
            ConstructionParams::EqualC1 { .. }
                | ConstructionParams::EqualC2 { .. }
                | ConstructionParams::EqualC3 { .. }
                | ConstructionParams::EqualDegenerate { .. }
        )
    }

    /// The scale parameter, if fixed.
    pub fn c(&self) -> Option<f64> {
        match self {
            ConstructionParams::EqualC1 { c, .. }
            | ConstructionParams::EqualC2 { c, .. }
            | ConstructionParams::EqualC3 { c, .. }
            | ConstructionParams::EqualDegenerate { c, .. } => *c,
            ConstructionParams::Unequal1 { c1, .. } => *c1,
            ConstructionParams::Unequal2 { c2, .. } => *c2,
            ConstructionParams::Unequal3 { c3, .. } => *c3,
        }
    }

    /// Same parameters with the scale replaced.
    pub fn with_c(&self, value: Option<f64>) -> Self {
        let mut out = self.clone();
        match &mut out {
            ConstructionParams::EqualC1 { c, .. }
            | ConstructionParams::EqualC2 { c, .. }
            | ConstructionParams::EqualC3 { c, .. }
            | ConstructionParams::EqualDegenerate { c, .. } => *c = value,
            ConstructionParams::Unequal1 { c1, .. } => *c1 = value,
            ConstructionParams::Unequal2 { c2, .. } => *c2 = value,
            ConstructionParams::Unequal3 { c3, .. } => *c3 = value,
        }
        out
    }

    /// Every operator carried by the parameters.
    pub fn operators(&self) -> Vec<&Hermitian> {
        let mut out = Vec::new();
        match self {
            ConstructionParams::EqualC1 { psi_max: a, residual_sigma: r, .. }
            | ConstructionParams::EqualC2 { psi_min: a, residual_rho: r, .. }
            | ConstructionParams::Unequal1 { psi_rho: a, residual_sigma: r, .. }
            | ConstructionParams::Unequal2 { psi_sigma: a, residual_rho: r, .. } => {
                out.push(a.op());
                out.extend(r.iter());
            }
            ConstructionParams::EqualC3 { psi_max: a, psi_min: b, .. }
            | ConstructionParams::Unequal3 { psi_rho: a, psi_sigma: b, .. } => {
                out.push(a.op());
                out.push(b.op());
            }
            ConstructionParams::EqualDegenerate { psi, .. } => out.push(psi.op()),
        }
        out
    }

    /// Mixing ratio, where the variant has one.
    pub fn c_r(&self) -> Option<f64> {
        match self {
            ConstructionParams::EqualC3 { c_r, .. }
            | ConstructionParams::EqualDegenerate { c_r, .. }
            | ConstructionParams::Unequal3 { c_r, .. } => Some(*c_r),
            _ => None,
        }
    }
}

/// Effects at unit scale, their norm bound and the fixed residual parts.
struct Prepared {
    unit_rho: Hermitian,
    unit_sigma: Hermitian,
    residual_rho: Option<Hermitian>,
    residual_sigma: Option<Hermitian>,
    bound: f64,
}

fn check_in(psi: &Hermitian, q: &Projector, what: &str) -> Result<()> {
    let residual = q.confinement_residual(psi)?;
    if residual > MEMBERSHIP_TOL {
        return Err(Error::MembershipViolated { what: what.to_string(), residual });
    }
    Ok(())
}

/// `ψ / Tr(ψ ν)`.
fn normalize_against(psi: &Hermitian, nu: &Hermitian, what: &str) -> Result<Hermitian> {
    let t = psi.tr_prod(nu);
    if t <= OVERLAP_TOL {
        return Err(Error::ZeroOverlap { what: what.to_string() });
    }
    Ok(psi.scaled(1.0 / t))
}

fn check_c_r(c_r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&c_r) {
        return Err(Error::BadParameter(format!("c_r = {c_r} must lie in [0, 1]")));
    }
    Ok(())
}

fn projector_sum(a: &Projector, b: &Projector) -> Result<Projector> {
    Projector::from_hermitian(&(a.as_hermitian() + b.as_hermitian()))
}

fn bound_of(a: &Hermitian, b: &Hermitian) -> Result<f64> {
    let top = lambda_max(&(a + b))?;
    if top <= 0.0 {
        return Err(Error::ZeroOperator);
    }
    Ok(1.0 / top)
}

fn mismatch(params: &ConstructionParams, actual: impl std::fmt::Display) -> Error {
    Error::CaseMismatch { requested: params.name().to_string(), actual: actual.to_string() }
}

fn prepare_equal(inst: &ProblemInstance, params: &ConstructionParams) -> Result<Prepared> {
    let sup = supports(inst)?;
    if sup.relation != SupportRelation::Equal {
        return Err(mismatch(params, sup.relation));
    }
    let case = classify(inst)?;
    let ext = extremal_with(inst, &sup)?;
    let sigma = inst.sigma_op();
    let kernel = ext.support_sigma.complement();
    let n = inst.dim();
    let zero = Hermitian::zeros(n);
    let with_max = projector_sum(&kernel, &ext.p_max)?;
    let with_min = projector_sum(&kernel, &ext.p_min)?;
    let expect = |want: CaseLabel| if case == want { Ok(()) } else { Err(mismatch(params, case)) };
    let (unit_rho, unit_sigma, residual_rho, residual_sigma) = match params {
        ConstructionParams::EqualC1 { psi_max, residual_sigma, .. } => {
            expect(CaseLabel::C1)?;
            check_in(psi_max.op(), &with_max, "psi_max")?;
            if let Some(r) = residual_sigma {
                check_in(r, &kernel, "residual_sigma")?;
            }
            let u = normalize_against(psi_max.op(), sigma, "psi_max")?;
            (u, zero, None, residual_sigma.clone())
        }
        ConstructionParams::EqualC2 { psi_min, residual_rho, .. } => {
            expect(CaseLabel::C2)?;
            check_in(psi_min.op(), &with_min, "psi_min")?;
            if let Some(r) = residual_rho {
                check_in(r, &kernel, "residual_rho")?;
            }
            let u = normalize_against(psi_min.op(), sigma, "psi_min")?;
            (zero, u, residual_rho.clone(), None)
        }
        ConstructionParams::EqualC3 { psi_max, psi_min, c_r, .. } => {
            expect(CaseLabel::C3)?;
            if ext.degenerate {
                return Err(Error::Degenerate);
            }
            check_c_r(*c_r)?;
            let ur = if *c_r > 0.0 {
                check_in(psi_max.op(), &with_max, "psi_max")?;
                normalize_against(psi_max.op(), sigma, "psi_max")?.scaled(*c_r)
            } else {
                zero.clone()
            };
            let us = if *c_r < 1.0 {
                check_in(psi_min.op(), &with_min, "psi_min")?;
                normalize_against(psi_min.op(), sigma, "psi_min")?.scaled(1.0 - *c_r)
            } else {
                zero
            };
            (ur, us, None, None)
        }
        ConstructionParams::EqualDegenerate { psi, c_r, .. } => {
            expect(CaseLabel::C3)?;
            if !ext.degenerate {
                return Err(Error::NotDegenerate);
            }
            check_c_r(*c_r)?;
            let u = normalize_against(psi.op(), sigma, "psi")?;
            (u.scaled(*c_r), u.scaled(1.0 - *c_r), None, None)
        }
        _ => return Err(mismatch(params, case)),
    };
    let bound = bound_of(&unit_rho, &unit_sigma)?;
    Ok(Prepared { unit_rho, unit_sigma, residual_rho, residual_sigma, bound })
}

fn prepare_unequal(inst: &ProblemInstance, params: &ConstructionParams) -> Result<Prepared> {
    let sup = supports(inst)?;
    if sup.relation == SupportRelation::Equal {
        return Err(mismatch(params, sup.relation));
    }
    let allowed = match params {
        ConstructionParams::Unequal1 { .. } => {
            matches!(sup.relation, SupportRelation::SigmaInsideRho | SupportRelation::Incomparable)
        }
        ConstructionParams::Unequal2 { .. } => {
            matches!(sup.relation, SupportRelation::RhoInsideSigma | SupportRelation::Incomparable)
        }
        ConstructionParams::Unequal3 { .. } => sup.relation == SupportRelation::Incomparable,
        _ => return Err(mismatch(params, sup.relation)),
    };
    if !allowed {
        let set = match params {
            ConstructionParams::Unequal1 { .. } => "E1",
            ConstructionParams::Unequal2 { .. } => "E2",
            _ => "E3",
        };
        return Err(Error::SetEmptyForSupports { set: set.into(), relation: sup.relation.to_string() });
    }
    let n = inst.dim();
    let zero = Hermitian::zeros(n);
    let off_sigma = sup.sigma.complement();
    let off_rho = sup.rho.complement();
    let outside = sup.sum.complement();
    let (rho, sigma) = (inst.rho_op(), inst.sigma_op());
    let (unit_rho, unit_sigma, residual_rho, residual_sigma) = match params {
        ConstructionParams::Unequal1 { psi_rho, residual_sigma, .. } => {
            check_in(psi_rho.op(), &off_sigma, "psi_rho")?;
            if let Some(r) = residual_sigma {
                check_in(r, &outside, "residual_sigma")?;
            }
            let u = normalize_against(psi_rho.op(), rho, "psi_rho")?;
            (u, zero, None, residual_sigma.clone())
        }
        ConstructionParams::Unequal2 { psi_sigma, residual_rho, .. } => {
            check_in(psi_sigma.op(), &off_rho, "psi_sigma")?;
            if let Some(r) = residual_rho {
                check_in(r, &outside, "residual_rho")?;
            }
            let u = normalize_against(psi_sigma.op(), sigma, "psi_sigma")?;
            (zero, u, residual_rho.clone(), None)
        }
        ConstructionParams::Unequal3 { psi_rho, psi_sigma, c_r, .. } => {
            check_c_r(*c_r)?;
            let ur = if *c_r > 0.0 {
                check_in(psi_rho.op(), &off_sigma, "psi_rho")?;
                normalize_against(psi_rho.op(), rho, "psi_rho")?.scaled(*c_r)
            } else {
                zero.clone()
            };
            let us = if *c_r < 1.0 {
                check_in(psi_sigma.op(), &off_rho, "psi_sigma")?;
                normalize_against(psi_sigma.op(), sigma, "psi_sigma")?.scaled(1.0 - *c_r)
            } else {
                zero
            };
            (ur, us, None, None)
        }
        _ => unreachable!(),
    };
    let bound = bound_of(&unit_rho, &unit_sigma)?;
    Ok(Prepared { unit_rho, unit_sigma, residual_rho, residual_sigma, bound })
}

fn prepare(inst: &ProblemInstance, params: &ConstructionParams) -> Result<Prepared> {
    for op in params.operators() {
        if op.dim() != inst.dim() {
            return Err(Error::DimMismatch { expected: inst.dim(), found: op.dim() });
        }
    }
    if params.is_equal_support() {
        prepare_equal(inst, params)
    } else {
        prepare_unequal(inst, params)
    }
}

fn assemble(prep: Prepared, c: Option<f64>) -> Result<ThreeOutcomeMeasurement> {
    let c = c.unwrap_or(prep.bound);
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::NonPositiveC(c));
    }
    if c > prep.bound * (1.0 + C_SLACK) {
        return Err(Error::CBoundViolated { c, bound: prep.bound });
    }
    let mut lr = prep.unit_rho.scaled(c);
    let mut ls = prep.unit_sigma.scaled(c);
    if let Some(r) = &prep.residual_rho {
        lr = &lr + r;
    }
    if let Some(r) = &prep.residual_sigma {
        ls = &ls + r;
    }
    ThreeOutcomeMeasurement::new(lr, ls)
}

/// The largest admissible scale `c` for the given states `ψ` (and `c_r`).
pub fn max_c(inst: &ProblemInstance, params: &ConstructionParams) -> Result<f64> {
    Ok(prepare(inst, params)?.bound)
}

/// Builds an equal-support error-minimizing measurement.
pub fn construct_equal(inst: &ProblemInstance, params: &ConstructionParams) -> Result<ThreeOutcomeMeasurement> {
    if !params.is_equal_support() {
        return Err(mismatch(params, classify(inst)?));
    }
    assemble(prepare(inst, params)?, params.c())
}

/// Builds a zero-error measurement for states with different supports.
pub fn construct_unequal(inst: &ProblemInstance, params: &ConstructionParams) -> Result<ThreeOutcomeMeasurement> {
    if params.is_equal_support() {
        return Err(mismatch(params, classify(inst)?));
    }
    assemble(prepare(inst, params)?, params.c())
}

pub fn construct(inst: &ProblemInstance, params: &ConstructionParams) -> Result<ThreeOutcomeMeasurement> {
    assemble(prepare(inst, params)?, params.c())
}

/// Which error-minimizing set a measurement belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MinimizingSet {
    /// Minimizes the error for equal supports.
    Es,
    E1,
    E2,
    E3,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub member: bool,
    pub set: Option<MinimizingSet>,
    /// The first condition that failed.
    pub failed_clause: Option<String>,
}

impl MembershipVerdict {
    fn yes(set: MinimizingSet) -> Self {
        MembershipVerdict { member: true, set: Some(set), failed_clause: None }
    }

    fn no(clause: &str) -> Self {
        MembershipVerdict { member: false, set: None, failed_clause: Some(clause.to_string()) }
    }
}

fn accepts(inst: &ProblemInstance, m: &ThreeOutcomeMeasurement) -> bool {
    let acc = m.accept_effect();
    let den = inst.p_rho() * acc.tr_prod(inst.rho_op()) + inst.p_sigma() * acc.tr_prod(inst.sigma_op());
    den >= UNDEFINED_DENOMINATOR
}

fn confined(x: &Hermitian, p: &Projector) -> Result<bool> {
    let tol = MEMBERSHIP_TOL * x.norm()?.max(1.0);
    Ok(p.confinement_residual(x)? <= tol)
}

fn vanishes(x: &Hermitian) -> Result<bool> {
    let n = x.norm()?;
    Ok(n <= MEMBERSHIP_TOL * n.max(1.0))
}

/// Decides whether `m` attains the minimum error on an equal-support instance.
pub fn is_error_minimizing_equal(inst: &ProblemInstance, m: &ThreeOutcomeMeasurement) -> Result<MembershipVerdict> {
    let ext = extremal_subspaces(inst)?;
    if m.dim() != inst.dim() {
        return Err(Error::DimMismatch { expected: inst.dim(), found: m.dim() });
    }
    if !accepts(inst, m) {
        return Ok(MembershipVerdict::no("accepts with non-zero probability"));
    }
    let s_half = pseudo_power(inst.sigma_op(), 0.5, inst.tolerances.rank_tol)?;
    let x_rho = m.lambda_rho().sandwich(&s_half);
    let x_sigma = m.lambda_sigma().sandwich(&s_half);
    const RHO_IN_TMAX: &str = "σ^{1/2}Λ_ρσ^{1/2} ∈ P(T^max)";
    const SIGMA_IN_TMIN: &str = "σ^{1/2}Λ_σσ^{1/2} ∈ P(T^min)";
    match classify(inst)? {
        CaseLabel::C1 => {
            if !confined(&x_rho, &ext.t_max)? {
                return Ok(MembershipVerdict::no(RHO_IN_TMAX));
            }
            if !vanishes(&x_sigma)? {
                return Ok(MembershipVerdict::no("σ^{1/2}Λ_σσ^{1/2} = 0"));
            }
        }
        CaseLabel::C2 => {
            if !vanishes(&x_rho)? {
                return Ok(MembershipVerdict::no("σ^{1/2}Λ_ρσ^{1/2} = 0"));
            }
            if !confined(&x_sigma, &ext.t_min)? {
                return Ok(MembershipVerdict::no(SIGMA_IN_TMIN));
            }
        }
        _ => {
            if !confined(&x_rho, &ext.t_max)? {
                return Ok(MembershipVerdict::no(RHO_IN_TMAX));
            }
            if !confined(&x_sigma, &ext.t_min)? {
                return Ok(MembershipVerdict::no(SIGMA_IN_TMIN));
            }
        }
    }
    Ok(MembershipVerdict::yes(MinimizingSet::Es))
}

/// Decides whether `m` has zero error on an instance with different supports,
/// and which of the three sets it falls in.
pub fn is_error_minimizing_unequal(inst: &ProblemInstance, m: &ThreeOutcomeMeasurement) -> Result<MembershipVerdict> {
    let relation = supports(inst)?.relation;
    if relation == SupportRelation::Equal {
        return Err(Error::EqualSupports);
    }
    if m.dim() != inst.dim() {
        return Err(Error::DimMismatch { expected: inst.dim(), found: m.dim() });
    }
    let (rho, sigma) = (inst.rho_op(), inst.sigma_op());
    if m.lambda_rho().tr_prod(sigma) > ZERO_ERROR_TOL {
        return Ok(MembershipVerdict::no("Tr(Λ_ρσ) = 0"));
    }
    if m.lambda_sigma().tr_prod(rho) > ZERO_ERROR_TOL {
        return Ok(MembershipVerdict::no("Tr(Λ_σρ) = 0"));
    }
    let hit_rho = m.lambda_rho().tr_prod(rho) > OVERLAP_TOL;
    let hit_sigma = m.lambda_sigma().tr_prod(sigma) > OVERLAP_TOL;
    Ok(match (hit_rho, hit_sigma) {
        (true, false) => MembershipVerdict::yes(MinimizingSet::E1),
        (false, true) => MembershipVerdict::yes(MinimizingSet::E2),
        (true, true) => MembershipVerdict::yes(MinimizingSet::E3),
        (false, false) => MembershipVerdict::no("accepts with non-zero probability"),
    })
}

/// Dispatches on the support relation.
pub fn is_error_minimizing(inst: &ProblemInstance, m: &ThreeOutcomeMeasurement) -> Result<MembershipVerdict> {
    if supports(inst)?.relation == SupportRelation::Equal {
        is_error_minimizing_equal(inst, m)
    } else {
        is_error_minimizing_unequal(inst, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{min_postselected_error, postselected_error};
    use approx::assert_abs_diff_eq;

    fn example1(mu: f64) -> ProblemInstance {
        let rho = Hermitian::from_real_diagonal(&[mu / 2.0, mu / 2.0, 1.0 - mu]);
        let sigma = Hermitian::from_real_diagonal(&[mu / 4.0, 3.0 * mu / 4.0, 1.0 - mu]);
        ProblemInstance::from_operators(rho, sigma, 0.5).unwrap()
    }

    fn q1(p: f64) -> ProblemInstance {
        let rho = Hermitian::from_real_rows(&[vec![0.5, 0.25], vec![0.25, 0.5]]);
        let sigma = Hermitian::from_real_diagonal(&[0.75, 0.25]);
        ProblemInstance::from_operators(rho, sigma, p).unwrap()
    }

    fn pure(p: &Projector) -> DensityOperator {
        DensityOperator::new(p.as_hermitian().scaled(1.0 / p.rank() as f64), &Default::default()).unwrap()
    }

    #[test]
    fn example1_subspaces_and_family() {
        let mu = 0.5;
        let inst = example1(mu);
        let ext = extremal_subspaces(&inst).unwrap();
        let e0 = Projector::coordinate(3, &[0]);
        let e1 = Projector::coordinate(3, &[1]);
        assert!(ext.t_max.distance(&e0).unwrap() < 1e-12);
        assert!(ext.t_min.distance(&e1).unwrap() < 1e-12);
        assert!(ext.p_max.distance(&e0).unwrap() < 1e-12);
        assert!(ext.p_min.distance(&e1).unwrap() < 1e-12);
        assert!(!ext.degenerate);

        let params = ConstructionParams::EqualC1 { psi_max: pure(&e0), c: None, residual_sigma: None };
        assert_abs_diff_eq!(max_c(&inst, &params).unwrap(), mu / 4.0, epsilon = 1e-14);
        let m = construct_equal(&inst, &params.with_c(Some(0.1 * mu / 4.0))).unwrap();
        assert_abs_diff_eq!(m.lambda_rho().matrix()[(0, 0)].re, 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(postselected_error(&inst, &m).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert!(is_error_minimizing_equal(&inst, &m).unwrap().member);

        let too_big = params.with_c(Some(mu / 2.0));
        assert!(matches!(construct_equal(&inst, &too_big), Err(Error::CBoundViolated { .. })));
        assert!(matches!(construct_equal(&inst, &params.with_c(Some(0.0))), Err(Error::NonPositiveC(_))));
    }

    #[test]
    fn example1_violation_names_clause() {
        let inst = example1(0.5);
        let m = ThreeOutcomeMeasurement::new(
            Projector::coordinate(3, &[0]).as_hermitian().clone(),
            Projector::coordinate(3, &[1]).as_hermitian().scaled(1e-3),
        )
        .unwrap();
        let v = is_error_minimizing_equal(&inst, &m).unwrap();
        assert!(!v.member);
        assert_eq!(v.failed_clause.as_deref(), Some("σ^{1/2}Λ_σσ^{1/2} = 0"));
        let none = ThreeOutcomeMeasurement::all_reject(3);
        assert!(!is_error_minimizing_equal(&inst, &none).unwrap().member);
    }

    #[test]
    fn q2_bounds() {
        let r7 = 7f64.sqrt();
        let hi = 0.25 * (14.0 + 4.0 * r7) / (12.0 + 4.0 * r7);
        let lo = 0.25 * (14.0 - 4.0 * r7) / (12.0 - 4.0 * r7);
        let inst = q1(0.7);
        let ext = extremal_subspaces(&inst).unwrap();
        let p = ConstructionParams::EqualC1 { psi_max: pure(&ext.p_max), c: None, residual_sigma: None };
        assert_abs_diff_eq!(max_c(&inst, &p).unwrap(), hi, epsilon = 1e-13);
        let m = construct_equal(&inst, &p).unwrap();
        assert!((m.lambda_rho() - ext.p_max.as_hermitian()).norm().unwrap() < 1e-12);

        let inst = q1(0.3);
        let ext = extremal_subspaces(&inst).unwrap();
        let p = ConstructionParams::EqualC2 { psi_min: pure(&ext.p_min), c: None, residual_rho: None };
        assert_abs_diff_eq!(max_c(&inst, &p).unwrap(), lo, epsilon = 1e-13);

        // P^max is spanned by |0> + (2+√7)|1>.
        let v = crate::linalg::CVector::from_vec(vec![crate::linalg::c64(1.0, 0.0), crate::linalg::c64(2.0 + r7, 0.0)]);
        assert!(ext.p_max.distance(&Projector::onto_vector(&v)).unwrap() < 1e-12);
    }

    #[test]
    fn q1_wrong_subspace_is_rejected() {
        let inst = q1(0.5);
        let ext = extremal_subspaces(&inst).unwrap();
        let m = ThreeOutcomeMeasurement::new(ext.p_min.as_hermitian().scaled(0.5), Hermitian::zeros(2)).unwrap();
        let v = is_error_minimizing_equal(&inst, &m).unwrap();
        assert!(!v.member);
        let e = postselected_error(&inst, &m).unwrap();
        assert!(e > min_postselected_error(&inst).unwrap().e_s + 1e-3);
    }

    #[test]
    fn c3_endpoints_and_case_errors() {
        let inst = q1(0.5);
        let ext = extremal_subspaces(&inst).unwrap();
        let c3 =
            |c_r| ConstructionParams::EqualC3 { psi_max: pure(&ext.p_max), psi_min: pure(&ext.p_min), c: None, c_r };
        let m = construct_equal(&inst, &c3(1.0)).unwrap();
        assert_eq!(m.lambda_sigma(), &Hermitian::zeros(2));
        let m = construct_equal(&inst, &c3(0.3)).unwrap();
        assert!(is_error_minimizing_equal(&inst, &m).unwrap().member);
        let e_s = min_postselected_error(&inst).unwrap().e_s;
        assert_abs_diff_eq!(postselected_error(&inst, &m).unwrap(), e_s, epsilon = 1e-12);
        assert!(matches!(construct_equal(&q1(0.7), &c3(0.3)), Err(Error::CaseMismatch { .. })));
        assert!(matches!(construct_equal(&inst, &c3(1.5)), Err(Error::BadParameter(_))));
    }

    #[test]
    fn degenerate_instance() {
        let rho = Hermitian::from_real_diagonal(&[0.3, 0.7]);
        let inst = ProblemInstance::from_operators(rho.clone(), rho, 0.5).unwrap();
        let ext = extremal_subspaces(&inst).unwrap();
        assert!(ext.degenerate);
        assert!(ext.t_max.distance(&Projector::identity(2)).unwrap() < 1e-12);
        let psi = pure(&Projector::identity(2));
        let p = ConstructionParams::EqualC3 { psi_max: psi.clone(), psi_min: psi.clone(), c: None, c_r: 0.5 };
        assert_eq!(construct_equal(&inst, &p), Err(Error::Degenerate));
        let p = ConstructionParams::EqualDegenerate { psi, c: None, c_r: 0.5 };
        let m = construct_equal(&inst, &p).unwrap();
        assert_abs_diff_eq!(postselected_error(&inst, &m).unwrap(), 0.5, epsilon = 1e-14);
        assert!(is_error_minimizing_equal(&inst, &m).unwrap().member);
        assert_eq!(construct_equal(&q1(0.5), &p), Err(Error::NotDegenerate));
    }

    #[test]
    fn unequal_examples() {
        let rho = Projector::coordinate(2, &[0]).as_hermitian().clone();
        let sigma = Hermitian::from_real_diagonal(&[0.5, 0.5]);
        let inst = ProblemInstance::from_operators(rho, sigma, 0.5).unwrap();
        let e0 = pure(&Projector::coordinate(2, &[0]));
        let p = ConstructionParams::Unequal1 { psi_rho: e0, c1: None, residual_sigma: None };
        assert!(matches!(construct_unequal(&inst, &p), Err(Error::SetEmptyForSupports { .. })));

        let rho = Hermitian::from_real_diagonal(&[0.6, 0.4, 0.0]);
        let sigma = Hermitian::from_real_diagonal(&[0.0, 0.4, 0.6]);
        let inst = ProblemInstance::from_operators(rho, sigma, 0.5).unwrap();
        let p = ConstructionParams::Unequal3 {
            psi_rho: pure(&Projector::coordinate(3, &[0])),
            psi_sigma: pure(&Projector::coordinate(3, &[2])),
            c3: Some(0.3),
            c_r: 0.25,
        };
        let m = construct_unequal(&inst, &p).unwrap();
        assert_abs_diff_eq!(m.lambda_rho().matrix()[(0, 0)].re, 0.3 * 0.25 / 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(m.lambda_sigma().matrix()[(2, 2)].re, 0.3 * 0.75 / 0.6, epsilon = 1e-15);
        assert_eq!(postselected_error(&inst, &m), Some(0.0));
        let v = is_error_minimizing_unequal(&inst, &m).unwrap();
        assert_eq!(v.set, Some(MinimizingSet::E3));
        let bound = max_c(&inst, &p).unwrap();
        assert_abs_diff_eq!(bound, 0.6 / 0.75, epsilon = 1e-14);

        let bad = ThreeOutcomeMeasurement::new(Hermitian::identity(3).scaled(0.5), Hermitian::zeros(3)).unwrap();
        assert_eq!(is_error_minimizing_unequal(&inst, &bad).unwrap().failed_clause.as_deref(), Some("Tr(Λ_ρσ) = 0"));
        let none = ThreeOutcomeMeasurement::all_reject(3);
        assert!(!is_error_minimizing_unequal(&inst, &none).unwrap().member);

        let psi_zero = pure(&Projector::coordinate(3, &[0]));
        let rho2 = Hermitian::from_real_diagonal(&[0.0, 1.0, 0.0]);
        let sigma2 = Hermitian::from_real_diagonal(&[0.0, 0.0, 1.0]);
        let inst2 = ProblemInstance::from_operators(rho2, sigma2, 0.5).unwrap();
        let p = ConstructionParams::Unequal1 { psi_rho: psi_zero, c1: None, residual_sigma: None };
        assert!(matches!(construct_unequal(&inst2, &p), Err(Error::ZeroOverlap { .. })));
    }
}
