//! JSON encoding of instances, measurements and construction parameters.
//!
//! A complex number is a two-element array `[re, im]` and a matrix is an
//! array of rows. Floats are written in shortest round-trip form, so
//! `parse(serialize(x)) == x` holds bit for bit.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::construct::ConstructionParams;
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, Hermitian, Projector, Tolerances, HERM_TOL};
use crate::state::{DensityOperator, Prior, ProblemInstance, ThreeOutcomeMeasurement};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

/// Entries larger than this are rejected to keep products finite.
pub const MAX_ENTRY: f64 = 1e100;

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::NotSquare { rows: n, cols: row.len() });
        }
        for z in row {
            if !(z[0].abs() <= MAX_ENTRY && z[1].abs() <= MAX_ENTRY) {
                return Err(Error::BadParameter(format!("entry [{}, {}] is out of range", z[0], z[1])));
            }
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c64(rows[i][j][0], rows[i][j][1])))
}

fn hermitian_from_json(rows: &JsonMatrix, dim: usize) -> Result<Hermitian> {
    let m = matrix_from_json(rows)?;
    if m.nrows() != dim {
        return Err(Error::DimMismatch { expected: dim, found: m.nrows() });
    }
    Hermitian::hermitize(&m, HERM_TOL)
}

fn density_from_json(rows: &JsonMatrix, dim: usize, what: &str) -> Result<DensityOperator> {
    DensityOperator::validate(hermitian_from_json(rows, dim)?, &Tolerances::default(), what)
}

impl Serialize for Hermitian {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(self.matrix()).serialize(s)
    }
}

impl Serialize for Projector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_hermitian().serialize(s)
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.op().serialize(s)
    }
}

impl Serialize for ThreeOutcomeMeasurement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ThreeOutcomeMeasurement", 2)?;
        st.serialize_field("lambda_rho", self.lambda_rho())?;
        st.serialize_field("lambda_sigma", self.lambda_sigma())?;
        st.end()
    }
}

/// On-disk form of a [`ProblemInstance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dim: usize,
    pub rho: JsonMatrix,
    pub sigma: JsonMatrix,
    pub p_rho: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl InstanceFile {
    pub fn from_instance(inst: &ProblemInstance) -> Self {
        InstanceFile {
            dim: inst.dim(),
            rho: matrix_to_json(inst.rho_op().matrix()),
            sigma: matrix_to_json(inst.sigma_op().matrix()),
            p_rho: inst.p_rho(),
            tolerances: inst.tolerances,
        }
    }

    pub fn into_instance(self) -> Result<ProblemInstance> {
        if self.dim == 0 {
            return Err(Error::EmptyDimension);
        }
        self.tolerances.validate()?;
        let rho = hermitian_from_json(&self.rho, self.dim)?;
        let sigma = hermitian_from_json(&self.sigma, self.dim)?;
        let rho = DensityOperator::validate(rho, &self.tolerances, "rho")?;
        let sigma = DensityOperator::validate(sigma, &self.tolerances, "sigma")?;
        ProblemInstance::new(rho, sigma, Prior::new(self.p_rho)?, self.tolerances)
    }
}

pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    serde_json::from_str::<InstanceFile>(text)?.into_instance()
}

pub fn instance_to_json(inst: &ProblemInstance) -> String {
    serde_json::to_string(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFile {
    pub lambda_rho: JsonMatrix,
    pub lambda_sigma: JsonMatrix,
}

/// Parses and validates a measurement. `dim`, when given, must match.
pub fn parse_measurement(text: &str, dim: Option<usize>) -> Result<ThreeOutcomeMeasurement> {
    let file: MeasurementFile = serde_json::from_str(text)?;
    let n = dim.unwrap_or(file.lambda_rho.len());
    let lr = hermitian_from_json(&file.lambda_rho, n)?;
    let ls = hermitian_from_json(&file.lambda_sigma, n)?;
    ThreeOutcomeMeasurement::new(lr, ls)
}

pub fn measurement_to_json(m: &ThreeOutcomeMeasurement) -> String {
    serde_json::to_string(m).expect("measurement serializes")
}

/// On-disk form of [`ConstructionParams`], tagged by `"variant"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", deny_unknown_fields)]
pub enum ParamsFile {
    EqualC1 {
        psi_max: JsonMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        residual_sigma: Option<JsonMatrix>,
    },
    EqualC2 {
        psi_min: JsonMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        residual_rho: Option<JsonMatrix>,
    },
    EqualC3 {
        psi_max: JsonMatrix,
        psi_min: JsonMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        c_r: f64,
    },
    EqualDegenerate {
        psi: JsonMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        c_r: f64,
    },
    Unequal1 {
        psi_rho: JsonMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c1: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        residual_sigma: Option<JsonMatrix>,
    },
    Unequal2 {
        psi_sigma: JsonMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c2: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        residual_rho: Option<JsonMatrix>,
    },
    Unequal3 {
        psi_rho: JsonMatrix,
        psi_sigma: JsonMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c3: Option<f64>,
        c_r: f64,
    },
}

fn check_scalar(name: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if !x.is_finite() => Err(Error::BadParameter(format!("{name} must be finite"))),
        _ => Ok(v),
    }
}

impl ParamsFile {
    pub fn from_params(p: &ConstructionParams) -> Self {
        let j = |h: &Hermitian| matrix_to_json(h.matrix());
        let d = |h: &DensityOperator| matrix_to_json(h.op().matrix());
        match p {
            ConstructionParams::EqualC1 { psi_max, c, residual_sigma } => {
                ParamsFile::EqualC1 { psi_max: d(psi_max), c: *c, residual_sigma: residual_sigma.as_ref().map(j) }
            }
            ConstructionParams::EqualC2 { psi_min, c, residual_rho } => {
                ParamsFile::EqualC2 { psi_min: d(psi_min), c: *c, residual_rho: residual_rho.as_ref().map(j) }
            }
            ConstructionParams::EqualC3 { psi_max, psi_min, c, c_r } => {
                ParamsFile::EqualC3 { psi_max: d(psi_max), psi_min: d(psi_min), c: *c, c_r: *c_r }
            }
            ConstructionParams::EqualDegenerate { psi, c, c_r } => {
                ParamsFile::EqualDegenerate { psi: d(psi), c: *c, c_r: *c_r }
            }
            ConstructionParams::Unequal1 { psi_rho, c1, residual_sigma } => {
                ParamsFile::Unequal1 { psi_rho: d(psi_rho), c1: *c1, residual_sigma: residual_sigma.as_ref().map(j) }
            }
            ConstructionParams::Unequal2 { psi_sigma, c2, residual_rho } => {
                ParamsFile::Unequal2 { psi_sigma: d(psi_sigma), c2: *c2, residual_rho: residual_rho.as_ref().map(j) }
            }
            ConstructionParams::Unequal3 { psi_rho, psi_sigma, c3, c_r } => {
                ParamsFile::Unequal3 { psi_rho: d(psi_rho), psi_sigma: d(psi_sigma), c3: *c3, c_r: *c_r }
            }
        }
    }

    /// Validates every operator; `dim`, when given, must match.
    pub fn into_params(self, dim: Option<usize>) -> Result<ConstructionParams> {
        let first = match &self {
            ParamsFile::EqualC1 { psi_max, .. } | ParamsFile::EqualC3 { psi_max, .. } => psi_max.len(),
            ParamsFile::EqualC2 { psi_min, .. } => psi_min.len(),
            ParamsFile::EqualDegenerate { psi, .. } => psi.len(),
            ParamsFile::Unequal1 { psi_rho, .. } | ParamsFile::Unequal3 { psi_rho, .. } => psi_rho.len(),
            ParamsFile::Unequal2 { psi_sigma, .. } => psi_sigma.len(),
        };
        let n = dim.unwrap_or(first);
        let d = |m: &JsonMatrix, what: &str| density_from_json(m, n, what);
        let h = |m: &Option<JsonMatrix>| m.as_ref().map(|x| hermitian_from_json(x, n)).transpose();
        Ok(match self {
            ParamsFile::EqualC1 { psi_max, c, residual_sigma } => ConstructionParams::EqualC1 {
                psi_max: d(&psi_max, "psi_max")?,
                c: check_scalar("c", c)?,
                residual_sigma: h(&residual_sigma)?,
            },
            ParamsFile::EqualC2 { psi_min, c, residual_rho } => ConstructionParams::EqualC2 {
                psi_min: d(&psi_min, "psi_min")?,
                c: check_scalar("c", c)?,
                residual_rho: h(&residual_rho)?,
            },
            ParamsFile::EqualC3 { psi_max, psi_min, c, c_r } => ConstructionParams::EqualC3 {
                psi_max: d(&psi_max, "psi_max")?,
                psi_min: d(&psi_min, "psi_min")?,
                c: check_scalar("c", c)?,
                c_r,
            },
            ParamsFile::EqualDegenerate { psi, c, c_r } => {
                ConstructionParams::EqualDegenerate { psi: d(&psi, "psi")?, c: check_scalar("c", c)?, c_r }
            }
            ParamsFile::Unequal1 { psi_rho, c1, residual_sigma } => ConstructionParams::Unequal1 {
                psi_rho: d(&psi_rho, "psi_rho")?,
                c1: check_scalar("c1", c1)?,
                residual_sigma: h(&residual_sigma)?,
            },
            ParamsFile::Unequal2 { psi_sigma, c2, residual_rho } => ConstructionParams::Unequal2 {
                psi_sigma: d(&psi_sigma, "psi_sigma")?,
                c2: check_scalar("c2", c2)?,
                residual_rho: h(&residual_rho)?,
            },
            ParamsFile::Unequal3 { psi_rho, psi_sigma, c3, c_r } => ConstructionParams::Unequal3 {
                psi_rho: d(&psi_rho, "psi_rho")?,
                psi_sigma: d(&psi_sigma, "psi_sigma")?,
                c3: check_scalar("c3", c3)?,
                c_r,
            },
        })
    }
}

pub fn parse_params(text: &str, dim: Option<usize>) -> Result<ConstructionParams> {
    serde_json::from_str::<ParamsFile>(text)?.into_params(dim)
}

pub fn params_to_json(p: &ConstructionParams) -> String {
    serde_json::to_string(&ParamsFile::from_params(p)).expect("params serialize")
}
