//! Postselected error, acceptance, minimum error and regime classification.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{r_max, support_projector, Hermitian, Projector};
use crate::state::{ProblemInstance, ThreeOutcomeMeasurement};

/// Denominator below which the postselected error is undefined.
pub const UNDEFINED_DENOMINATOR: f64 = 1e-12;
/// Relative width of the boundary between the C1 and C2 regimes.
pub const CASE_TOL: f64 = 1e-9;

/// How the supports of the two states relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SupportRelation {
    Equal,
    SigmaInsideRho,
    RhoInsideSigma,
    Incomparable,
}

impl fmt::Display for SupportRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SupportRelation::Equal => "Equal",
            SupportRelation::SigmaInsideRho => "SigmaInsideRho",
            SupportRelation::RhoInsideSigma => "RhoInsideSigma",
            SupportRelation::Incomparable => "Incomparable",
        };
        f.write_str(s)
    }
}

/// Regime of an instance. The first three apply to equal supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    C1,
    C2,
    C3,
    SigmaInsideRho,
    RhoInsideSigma,
    Incomparable,
}

impl CaseLabel {
    pub fn is_equal_support(self) -> bool {
        matches!(self, CaseLabel::C1 | CaseLabel::C2 | CaseLabel::C3)
    }

    pub fn relation(self) -> SupportRelation {
        match self {
            CaseLabel::C1 | CaseLabel::C2 | CaseLabel::C3 => SupportRelation::Equal,
            CaseLabel::SigmaInsideRho => SupportRelation::SigmaInsideRho,
            CaseLabel::RhoInsideSigma => SupportRelation::RhoInsideSigma,
            CaseLabel::Incomparable => SupportRelation::Incomparable,
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn serialize_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

/// Minimum error together with the data that determines it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub e_s: f64,
    pub case: CaseLabel,
    pub support: SupportRelation,
    pub p_star: Option<(f64, f64)>,
    #[serde(serialize_with = "serialize_extended")]
    pub xi: f64,
    /// `R_max(ρ,σ)` and `R_max(σ,ρ)`, present for equal supports.
    pub r_max_rho_sigma: Option<f64>,
    pub r_max_sigma_rho: Option<f64>,
}

/// Support projectors of `ρ`, `σ` and `ρ + σ`.
#[derive(Clone, Debug)]
pub struct Supports {
    pub rho: Projector,
    pub sigma: Projector,
    pub sum: Projector,
    pub relation: SupportRelation,
}

pub fn supports(inst: &ProblemInstance) -> Result<Supports> {
    let tol = inst.tolerances.rank_tol;
    let rho = support_projector(inst.rho_op(), tol)?;
    let sigma = support_projector(inst.sigma_op(), tol)?;
    let sum = support_projector(&(inst.rho_op() + inst.sigma_op()), tol)?;
    let (r, s, u) = (rho.rank(), sigma.rank(), sum.rank());
    let relation = if r == u && s == u {
        SupportRelation::Equal
    } else if r == u {
        SupportRelation::SigmaInsideRho
    } else if s == u {
        SupportRelation::RhoInsideSigma
    } else {
        SupportRelation::Incomparable
    };
    Ok(Supports { rho, sigma, sum, relation })
}

/// Structural comparison of the two supports.
pub fn classify_support_relation(inst: &ProblemInstance) -> Result<SupportRelation> {
    Ok(supports(inst)?.relation)
}

/// `(R_max(ρ,σ), R_max(σ,ρ))`; only meaningful for equal supports.
pub fn directed_r_max(rho: &Hermitian, sigma: &Hermitian, rank_tol: f64) -> Result<(f64, f64)> {
    Ok((r_max(rho, sigma, rank_tol)?, r_max(sigma, rho, rank_tol)?))
}

/// `(R_max(p_ρρ, p_σσ), R_max(p_σσ, p_ρρ))` from the unscaled values.
fn scaled(inst: &ProblemInstance, a: f64, b: f64) -> (f64, f64) {
    let (pr, ps) = (inst.p_rho(), inst.p_sigma());
    (pr / ps * a, ps / pr * b)
}

fn equal_case(inst: &ProblemInstance, a: f64, b: f64) -> CaseLabel {
    let (x, y) = scaled(inst, a, b);
    if (x - y).abs() <= CASE_TOL * x.max(y) {
        CaseLabel::C3
    } else if x > y {
        CaseLabel::C1
    } else {
        CaseLabel::C2
    }
}

/// Thompson metric between `p_ρρ` and `p_σσ`; infinite for unequal supports.
pub fn thompson_xi(inst: &ProblemInstance) -> Result<f64> {
    if classify_support_relation(inst)? != SupportRelation::Equal {
        return Ok(f64::INFINITY);
    }
    let (a, b) = directed_r_max(inst.rho_op(), inst.sigma_op(), inst.tolerances.rank_tol)?;
    let (x, y) = scaled(inst, a, b);
    Ok(x.max(y))
}

pub fn classify(inst: &ProblemInstance) -> Result<CaseLabel> {
    let relation = classify_support_relation(inst)?;
    Ok(match relation {
        SupportRelation::Equal => {
            let (a, b) = directed_r_max(inst.rho_op(), inst.sigma_op(), inst.tolerances.rank_tol)?;
            equal_case(inst, a, b)
        }
        SupportRelation::SigmaInsideRho => CaseLabel::SigmaInsideRho,
        SupportRelation::RhoInsideSigma => CaseLabel::RhoInsideSigma,
        SupportRelation::Incomparable => CaseLabel::Incomparable,
    })
}

fn p_star_from(a: f64, b: f64) -> (f64, f64) {
    let p = b.sqrt() / (a.sqrt() + b.sqrt());
    (p, 1.0 - p)
}

/// The prior at which both hypotheses can be detected by an error-minimizing measurement.
pub fn critical_prior(rho: &Hermitian, sigma: &Hermitian, rank_tol: f64) -> Result<(f64, f64)> {
    let inst_like = |h: &Hermitian| support_projector(h, rank_tol);
    let (pr, ps) = (inst_like(rho)?, inst_like(sigma)?);
    let sum = support_projector(&(rho + sigma), rank_tol)?;
    if pr.rank() != sum.rank() || ps.rank() != sum.rank() {
        return Err(Error::UnequalSupports);
    }
    let (a, b) = directed_r_max(rho, sigma, rank_tol)?;
    Ok(p_star_from(a, b))
}

pub fn min_postselected_error(inst: &ProblemInstance) -> Result<MetricsReport> {
    let relation = classify_support_relation(inst)?;
    if relation != SupportRelation::Equal {
        let case = match relation {
            SupportRelation::SigmaInsideRho => CaseLabel::SigmaInsideRho,
            SupportRelation::RhoInsideSigma => CaseLabel::RhoInsideSigma,
            _ => CaseLabel::Incomparable,
        };
        return Ok(MetricsReport {
            e_s: 0.0,
            case,
            support: relation,
            p_star: None,
            xi: f64::INFINITY,
            r_max_rho_sigma: None,
            r_max_sigma_rho: None,
        });
    }
    let (a, b) = directed_r_max(inst.rho_op(), inst.sigma_op(), inst.tolerances.rank_tol)?;
    let (x, y) = scaled(inst, a, b);
    let xi = x.max(y);
    Ok(MetricsReport {
        e_s: 1.0 / (1.0 + xi),
        case: equal_case(inst, a, b),
        support: relation,
        p_star: Some(p_star_from(a, b)),
        xi,
        r_max_rho_sigma: Some(a),
        r_max_sigma_rho: Some(b),
    })
}

/// Postselected symmetric error, `None` when the measurement (almost) never accepts.
pub fn postselected_error(inst: &ProblemInstance, m: &ThreeOutcomeMeasurement) -> Option<f64> {
    let (pr, ps) = (inst.p_rho(), inst.p_sigma());
    let lr_s = m.lambda_rho().tr_prod(inst.sigma_op());
    let ls_r = m.lambda_sigma().tr_prod(inst.rho_op());
    let (a_r, a_s) = acceptance(inst, m);
    let den = pr * a_r + ps * a_s;
    if den < UNDEFINED_DENOMINATOR {
        return None;
    }
    Some((ps * lr_s + pr * ls_r) / den)
}

/// `(A_ρ, A_σ) = (Tr((Λ_ρ+Λ_σ)ρ), Tr((Λ_ρ+Λ_σ)σ))`.
pub fn acceptance(inst: &ProblemInstance, m: &ThreeOutcomeMeasurement) -> (f64, f64) {
    let acc = m.accept_effect();
    (acc.tr_prod(inst.rho_op()), acc.tr_prod(inst.sigma_op()))
}
