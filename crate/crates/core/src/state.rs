//! Validated domain objects and seeded random generators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c64, eig, loewner_leq, CMatrix, Hermitian, Projector, Tolerances, HERM_TOL, LOEWNER_TOL};

/// Derives an independent child seed from `(seed, index)` with the splitmix64 finalizer.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator used everywhere in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows × cols` matrix with independent standard-normal real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

/// A positive semidefinite operator with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    op: Hermitian,
}

impl DensityOperator {
    pub fn new(op: Hermitian, tol: &Tolerances) -> Result<Self> {
        Self::validate(op, tol, "density operator")
    }

    pub(crate) fn validate(op: Hermitian, tol: &Tolerances, what: &str) -> Result<Self> {
        let es = eig(&op)?;
        let min = *es.values.last().unwrap();
        if min < -tol.rank_tol * es.norm().max(1.0) {
            return Err(Error::NotPsd { what: what.to_string(), min_eig: min });
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::BadTrace { what: what.to_string(), trace: tr });
        }
        Ok(DensityOperator { op })
    }

    /// Normalizes a non-zero PSD operator by its trace without further checks.
    pub(crate) fn normalized(op: Hermitian) -> Self {
        let tr = op.trace();
        DensityOperator { op: Hermitian::symmetrized(op.matrix().map(|z| z / tr)) }
    }

    pub fn op(&self) -> &Hermitian {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.op.tr_prod(&self.op)
    }
}

/// Prior probability of the first hypothesis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prior {
    p_rho: f64,
}

impl Prior {
    pub fn new(p_rho: f64) -> Result<Self> {
        if !(p_rho.is_finite() && p_rho > 1e-12 && p_rho < 1.0 - 1e-12) {
            return Err(Error::BadPrior(p_rho));
        }
        Ok(Prior { p_rho })
    }

    pub fn p_rho(&self) -> f64 {
        self.p_rho
    }

    pub fn p_sigma(&self) -> f64 {
        1.0 - self.p_rho
    }
}

/// The pair `(Λ_ρ, Λ_σ)`; the reject effect is `I − Λ_ρ − Λ_σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeOutcomeMeasurement {
    lambda_rho: Hermitian,
    lambda_sigma: Hermitian,
}

/// Which effect failed validation.
fn check_effect(h: &Hermitian, what: &str) -> Result<()> {
    let es = eig(h)?;
    let min = *es.values.last().unwrap();
    if min < -LOEWNER_TOL * es.norm().max(1.0) {
        return Err(Error::NotPsd { what: what.to_string(), min_eig: min });
    }
    Ok(())
}

impl ThreeOutcomeMeasurement {
    pub fn new(lambda_rho: Hermitian, lambda_sigma: Hermitian) -> Result<Self> {
        if lambda_rho.dim() != lambda_sigma.dim() {
            return Err(Error::DimMismatch { expected: lambda_rho.dim(), found: lambda_sigma.dim() });
        }
        check_effect(&lambda_rho, "lambda_rho")?;
        check_effect(&lambda_sigma, "lambda_sigma")?;
        let accept = &lambda_rho + &lambda_sigma;
        if !loewner_leq(&accept, &Hermitian::identity(accept.dim()), LOEWNER_TOL)? {
            return Err(Error::SumExceedsIdentity { max_eig: eig(&accept)?.values[0] });
        }
        Ok(ThreeOutcomeMeasurement { lambda_rho, lambda_sigma })
    }

    pub fn lambda_rho(&self) -> &Hermitian {
        &self.lambda_rho
    }

    pub fn lambda_sigma(&self) -> &Hermitian {
        &self.lambda_sigma
    }

    pub fn dim(&self) -> usize {
        self.lambda_rho.dim()
    }

    /// `Λ_ρ + Λ_σ`.
    pub fn accept_effect(&self) -> Hermitian {
        &self.lambda_rho + &self.lambda_sigma
    }

    /// `I − Λ_ρ − Λ_σ`.
    pub fn reject_effect(&self) -> Hermitian {
        &Hermitian::identity(self.dim()) - &self.accept_effect()
    }

    /// The measurement that always rejects.
    pub fn all_reject(dim: usize) -> Self {
        ThreeOutcomeMeasurement { lambda_rho: Hermitian::zeros(dim), lambda_sigma: Hermitian::zeros(dim) }
    }
}

/// Validates a raw operator pair.
pub fn validate_measurement(raw_rho: &CMatrix, raw_sigma: &CMatrix) -> Result<ThreeOutcomeMeasurement> {
    let lr = Hermitian::hermitize(raw_rho, HERM_TOL)?;
    let ls = Hermitian::hermitize(raw_sigma, HERM_TOL)?;
    ThreeOutcomeMeasurement::new(lr, ls)
}

/// Two hypotheses with their prior and the thresholds used to analyse them.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub rho: DensityOperator,
    pub sigma: DensityOperator,
    pub prior: Prior,
    pub tolerances: Tolerances,
}

impl ProblemInstance {
    pub fn new(rho: DensityOperator, sigma: DensityOperator, prior: Prior, tolerances: Tolerances) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::DimMismatch { expected: rho.dim(), found: sigma.dim() });
        }
        tolerances.validate()?;
        Ok(ProblemInstance { rho, sigma, prior, tolerances })
    }

    /// Builds from raw operators with default tolerances.
    pub fn from_operators(rho: Hermitian, sigma: Hermitian, p_rho: f64) -> Result<Self> {
        let tol = Tolerances::default();
        let rho = DensityOperator::validate(rho, &tol, "rho")?;
        let sigma = DensityOperator::validate(sigma, &tol, "sigma")?;
        Self::new(rho, sigma, Prior::new(p_rho)?, tol)
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho_op(&self) -> &Hermitian {
        self.rho.op()
    }

    pub fn sigma_op(&self) -> &Hermitian {
        self.sigma.op()
    }

    pub fn p_rho(&self) -> f64 {
        self.prior.p_rho()
    }

    pub fn p_sigma(&self) -> f64 {
        self.prior.p_sigma()
    }

    /// Same states with a different prior.
    pub fn with_prior(&self, p_rho: f64) -> Result<Self> {
        Ok(ProblemInstance { prior: Prior::new(p_rho)?, ..self.clone() })
    }
}

/// `G G† / Tr(G G†)` for a `dim × rank` complex Gaussian `G`.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::BadRank { dim, rank });
    }
    let mut rng = rng_from_seed(seed);
    let g = ginibre(dim, rank, &mut rng);
    Ok(DensityOperator::normalized(Hermitian::symmetrized(&g * g.adjoint())))
}

/// Random density confined to the range of `p`, full rank inside it.
pub fn random_psd_in_subspace(p: &Projector, seed: u64) -> Result<DensityOperator> {
    let mut rng = rng_from_seed(seed);
    random_density_in(p, p.rank(), &mut rng)
}

/// Random density of the given rank confined to the range of `p`.
pub fn random_density_in<R: Rng + ?Sized>(p: &Projector, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    if p.is_zero() {
        return Err(Error::ZeroProjector);
    }
    if rank == 0 || rank > p.rank() {
        return Err(Error::BadRank { dim: p.rank(), rank });
    }
    let basis = p.basis()?;
    let g = ginibre(p.rank(), rank, rng);
    let w = &basis * g;
    Ok(DensityOperator::normalized(Hermitian::symmetrized(&w * w.adjoint())))
}
