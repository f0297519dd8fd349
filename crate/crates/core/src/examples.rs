//! Worked instances and a golden report built from them.

use serde::Serialize;

use crate::accept::{max_acceptance, AcceptanceMethod};
use crate::construct::{construct, ConstructionParams};
use crate::error::Result;
use crate::io::InstanceFile;
use crate::linalg::{eig, pseudo_power, Hermitian, Tolerances, RANK_TOL};
use crate::metrics::{acceptance, min_postselected_error, postselected_error, CaseLabel, MetricsReport};
use crate::state::{DensityOperator, ProblemInstance, ThreeOutcomeMeasurement};

/// `ρ = diag(μ/2, μ/2, 1−μ)`, `σ = diag(μ/4, 3μ/4, 1−μ)` with equal priors.
pub fn example1(mu: f64) -> Result<ProblemInstance> {
    let rho = Hermitian::from_real_diagonal(&[mu / 2.0, mu / 2.0, 1.0 - mu]);
    let sigma = Hermitian::from_real_diagonal(&[mu / 4.0, 3.0 * mu / 4.0, 1.0 - mu]);
    ProblemInstance::from_operators(rho, sigma, 0.5)
}

/// The qubit pair `ρ = [[1/2, 1/4], [1/4, 1/2]]`, `σ = diag(3/4, 1/4)`.
pub fn qubit_pair(p_rho: f64) -> Result<ProblemInstance> {
    let rho = Hermitian::from_real_rows(&[vec![0.5, 0.25], vec![0.25, 0.5]]);
    let sigma = Hermitian::from_real_diagonal(&[0.75, 0.25]);
    ProblemInstance::from_operators(rho, sigma, p_rho)
}

/// Example 1 measurement `Λ_ρ = c(4/μ)|0⟩⟨0|`, `Λ_σ = 0`.
pub fn example1_measurement(inst: &ProblemInstance, c: f64) -> Result<ThreeOutcomeMeasurement> {
    let psi = DensityOperator::new(Hermitian::from_real_diagonal(&[1.0, 0.0, 0.0]), &Tolerances::default())?;
    construct(inst, &ConstructionParams::EqualC1 { psi_max: psi, c: Some(c), residual_sigma: None })
}

#[derive(Serialize)]
struct Acceptance {
    case: CaseLabel,
    a_rho_max: f64,
    a_sigma_max: f64,
    numeric: bool,
}

#[derive(Serialize)]
struct Probe {
    c: f64,
    error: Option<f64>,
    a_rho: f64,
    a_sigma: f64,
}

#[derive(Serialize)]
struct Entry {
    name: String,
    instance: InstanceFile,
    metrics: MetricsReport,
    /// Eigenvalues of `σ^{-1/2}ρσ^{-1/2}`, largest first.
    relative_spectrum: Vec<f64>,
    max_acceptance: Acceptance,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    probes: Vec<Probe>,
}

fn entry(name: String, inst: &ProblemInstance, probes: Vec<Probe>) -> Result<Entry> {
    let inv_half = pseudo_power(inst.sigma_op(), -0.5, RANK_TOL)?;
    let spectrum = eig(&inst.rho_op().sandwich(&inv_half))?.values.to_vec();
    let max = max_acceptance(inst)?;
    Ok(Entry {
        name,
        instance: InstanceFile::from_instance(inst),
        metrics: min_postselected_error(inst)?,
        relative_spectrum: spectrum,
        max_acceptance: Acceptance {
            case: max.case,
            a_rho_max: max.a_rho_max,
            a_sigma_max: max.a_sigma_max,
            numeric: max.for_rho.method == AcceptanceMethod::NumericUpsilon
                || max.for_sigma.method == AcceptanceMethod::NumericUpsilon,
        },
        probes,
    })
}

/// Pretty JSON covering Example 1 for μ ∈ {0.2, 0.5, 0.8} and the qubit pair
/// at `p_ρ ∈ {0.3, 0.4, 0.5, 0.6, 0.7}`. Byte-identical across runs.
pub fn golden_report() -> Result<String> {
    let mut entries = Vec::new();
    for mu in [0.2, 0.5, 0.8] {
        let inst = example1(mu)?;
        let mut probes = Vec::new();
        for c in [0.1 * mu / 4.0, mu / 4.0] {
            let m = example1_measurement(&inst, c)?;
            let (a_rho, a_sigma) = acceptance(&inst, &m);
            probes.push(Probe { c, error: postselected_error(&inst, &m), a_rho, a_sigma });
        }
        entries.push(entry(format!("example1_mu_{mu}"), &inst, probes)?);
    }
    for p in [0.3, 0.4, 0.5, 0.6, 0.7] {
        entries.push(entry(format!("qubit_pair_p_{p}"), &qubit_pair(p)?, Vec::new())?);
    }
    let mut out = serde_json::to_string_pretty(&entries)?;
    out.push('\n');
    Ok(out)
}
