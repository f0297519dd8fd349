//! Dense complex Hermitian linear algebra for small dimensions.
//!
//! Everything here is a pure function of its inputs. The eigensolver is a
//! cyclic complex Jacobi iteration, which is accurate to a few ulps at the
//! dimensions this crate targets (up to about 16).

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative threshold below which an eigenvalue counts as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Relative width of an eigenvalue cluster.
pub const CLUSTER_TOL: f64 = 1e-9;
/// Relative slack for Loewner comparisons.
pub const LOEWNER_TOL: f64 = 1e-10;
/// Largest accepted `‖M − M†‖∞` when ingesting a raw matrix.
pub const HERM_TOL: f64 = 1e-8;
/// Slack for "X lies in P(Π)" tests: `‖ΠXΠ − X‖∞ ≤ MEMBERSHIP_TOL`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;
const CONVERGED_REL: f64 = 1e-12;

/// Numerical thresholds carried by a problem instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub cluster_tol: f64,
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank_tol: RANK_TOL, cluster_tol: CLUSTER_TOL, psd_tol: LOEWNER_TOL }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rank_tol", self.rank_tol), ("cluster_tol", self.cluster_tol), ("psd_tol", self.psd_tol)] {
            if !(v.is_finite() && (0.0..1.0).contains(&v)) {
                return Err(Error::BadParameter(format!("{name} = {v} must lie in [0, 1)")));
            }
        }
        Ok(())
    }
}

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm of an arbitrary square matrix, `sqrt(λ_max(A†A))`.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    let gram = Hermitian::symmetrized(m.adjoint() * m);
    Ok(eig(&gram)?.values[0].max(0.0).sqrt())
}

/// A complex Hermitian matrix. The stored entries are exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian {
    m: CMatrix,
    herm_defect: f64,
}

impl Hermitian {
    /// Returns `(raw + raw†)/2`, rejecting inputs whose anti-Hermitian part is
    /// larger than `tol` in spectral norm.
    pub fn hermitize(raw: &CMatrix, tol: f64) -> Result<Self> {
        let (rows, cols) = raw.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyDimension);
        }
        if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::BadParameter("matrix has non-finite entries".into()));
        }
        let diff = raw - raw.adjoint();
        let defect = if max_abs(&diff) == 0.0 { 0.0 } else { spectral_norm(&diff)? };
        if defect > tol {
            return Err(Error::HermDefectTooLarge { defect, tol });
        }
        let mut h = Self::symmetrized(raw.clone());
        h.herm_defect = defect;
        Ok(h)
    }

    /// Symmetrizes without a tolerance check. Meant for matrices that are
    /// Hermitian up to rounding, such as products `A·B·A`.
    pub fn symmetrized(m: CMatrix) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "symmetrized: matrix must be square");
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = c64(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        Hermitian { m: out, herm_defect: 0.0 }
    }

    pub fn zeros(n: usize) -> Self {
        Hermitian { m: CMatrix::zeros(n, n), herm_defect: 0.0 }
    }

    pub fn identity(n: usize) -> Self {
        Hermitian { m: CMatrix::identity(n, n), herm_defect: 0.0 }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Hermitian {
            m: CMatrix::from_fn(n, n, |i, j| if i == j { c64(d[i], 0.0) } else { c64(0.0, 0.0) }),
            herm_defect: 0.0,
        }
    }

    /// Builds from real row-major rows, symmetrizing.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::symmetrized(CMatrix::from_fn(n, n, |i, j| c64(rows[i][j], 0.0)))
    }

    /// `v v†`.
    pub fn outer(v: &CVector) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn herm_defect(&self) -> f64 {
        self.herm_defect
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// `Re Tr(A·B)`; exact for Hermitian arguments up to rounding.
    pub fn tr_prod(&self, other: &Hermitian) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.m[(i, j)] * other.m[(j, i)]).re;
            }
        }
        acc
    }

    /// `A·self·A`, re-symmetrized.
    pub fn sandwich(&self, a: &Hermitian) -> Hermitian {
        Self::symmetrized(&a.m * &self.m * &a.m)
    }

    /// `B·self·B†` for an arbitrary (possibly rectangular) `B`.
    pub fn congruence(&self, b: &CMatrix) -> Hermitian {
        Self::symmetrized(b * &self.m * b.adjoint())
    }

    pub fn scaled(&self, k: f64) -> Hermitian {
        Hermitian { m: &self.m * c64(k, 0.0), herm_defect: 0.0 }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    /// Spectral norm `‖M‖∞ = max |λ|`.
    pub fn norm(&self) -> Result<f64> {
        let es = eig(self)?;
        Ok(es.norm())
    }

    pub fn eig(&self) -> Result<EigenSystem> {
        eig(self)
    }

    fn check_dim(&self, other: &Hermitian) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

impl Add for &Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: &Hermitian) -> Hermitian {
        Hermitian { m: &self.m + &rhs.m, herm_defect: 0.0 }
    }
}

impl Sub for &Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: &Hermitian) -> Hermitian {
        Hermitian { m: &self.m - &rhs.m, herm_defect: 0.0 }
    }
}

impl Mul<f64> for &Hermitian {
    type Output = Hermitian;
    fn mul(self, k: f64) -> Hermitian {
        self.scaled(k)
    }
}

/// Eigen-decomposition with eigenvalues sorted in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
    /// Relative clustering width used by the projector helpers.
    pub cluster_tol: f64,
}

impl EigenSystem {
    /// `max |λ|`.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Σ_{i∈idx} v_i v_i†`.
    pub fn projector_onto(&self, idx: &[usize]) -> Projector {
        let cols: Vec<CVector> = idx.iter().map(|&i| self.vectors.column(i).into_owned()).collect();
        Projector::from_orthonormal(&cols, self.dim())
    }

    /// `Σ f(λ_i) v_i v_i†` over the indices in `idx`.
    pub fn compose(&self, idx: &[usize], f: impl Fn(f64) -> f64) -> Hermitian {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for &i in idx {
            let v = self.vectors.column(i);
            let w = f(self.values[i]);
            m += (v * v.adjoint()) * c64(w, 0.0);
        }
        Hermitian::symmetrized(m)
    }

    pub fn reconstruct(&self) -> Hermitian {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.compose(&all, |x| x)
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
pub fn eig(m: &Hermitian) -> Result<EigenSystem> {
    let n = m.dim();
    let mut a = m.m.clone();
    let mut v = CMatrix::identity(n, n);
    let scale = frobenius(&a);
    // ‖M‖_F/√n never exceeds the spectral norm, so this is at least as strict
    // as a threshold on ‖M‖∞.
    let target = CONVERGED_REL * scale / (n as f64).sqrt();

    let mut converged = scale == 0.0 || n == 1;
    for sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, sweep);
            }
        }
        let off = off_diagonal(&a);
        if off == 0.0 || off <= f64::EPSILON * 1e-3 * scale {
            converged = true;
        }
    }
    let off = off_diagonal(&a);
    if off > target {
        return Err(Error::ConvergenceFailure { off_diag: off });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = v.column(i).into_owned();
        fix_phase(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(EigenSystem { values, vectors, cluster_tol: CLUSTER_TOL })
}

fn off_diagonal(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, sweep: usize) {
    let n = a.nrows();
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if sweep > 3 && app.abs() + 100.0 * g == app.abs() && aqq.abs() + 100.0 * g == aqq.abs() {
        a[(p, q)] = c64(0.0, 0.0);
        a[(q, p)] = c64(0.0, 0.0);
        return;
    }
    let theta = (aqq - app) / (2.0 * g);
    let t =
        if theta.abs() > 1e150 { 0.5 / theta } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e = apq / g;
    // G = diag(1, ē) · [[c, s], [−s, c]] on the (p, q) block.
    let gpp = c64(c, 0.0);
    let gpq = c64(s, 0.0);
    let gqp = e.conj() * (-s);
    let gqq = e.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = c64(0.0, 0.0);
    a[(q, p)] = c64(0.0, 0.0);
    a[(p, p)] = c64(a[(p, p)].re, 0.0);
    a[(q, q)] = c64(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
}

/// Rotates a unit vector so that its first significant component is real and positive.
fn fix_phase(v: &mut CVector) {
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-8) {
        let ph = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
        if let Some(first) = v.iter_mut().find(|z| z.norm() > 1e-8) {
            first.im = 0.0;
        }
    }
}

/// Orthogonal projector.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    base: Hermitian,
    rank: usize,
}

impl Projector {
    /// `Σ v_i v_i†` for orthonormal `cols`.
    pub fn from_orthonormal(cols: &[CVector], dim: usize) -> Projector {
        let mut m = CMatrix::zeros(dim, dim);
        for v in cols {
            m += v * v.adjoint();
        }
        Projector { base: Hermitian::symmetrized(m), rank: cols.len() }
    }

    pub fn zero(dim: usize) -> Projector {
        Projector { base: Hermitian::zeros(dim), rank: 0 }
    }

    pub fn identity(dim: usize) -> Projector {
        Projector { base: Hermitian::identity(dim), rank: dim }
    }

    /// Projector onto the span of the standard basis vectors in `idx`.
    pub fn coordinate(dim: usize, idx: &[usize]) -> Projector {
        let mut d = vec![0.0; dim];
        for &i in idx {
            d[i] = 1.0;
        }
        let rank = d.iter().filter(|&&x| x == 1.0).count();
        Projector { base: Hermitian::from_real_diagonal(&d), rank }
    }

    /// Projector onto the line through `v` (need not be normalized).
    pub fn onto_vector(v: &CVector) -> Projector {
        let u = v / c64(v.norm(), 0.0);
        Projector::from_orthonormal(&[u], v.len())
    }

    /// Interprets a Hermitian matrix that should be a projector, rounding its
    /// spectrum to {0, 1}.
    pub fn from_hermitian(h: &Hermitian) -> Result<Projector> {
        let es = eig(h)?;
        let idx: Vec<usize> = (0..es.dim()).filter(|&i| es.values[i] > 0.5).collect();
        Ok(es.projector_onto(&idx))
    }

    pub fn as_hermitian(&self) -> &Hermitian {
        &self.base
    }

    pub fn matrix(&self) -> &CMatrix {
        self.base.matrix()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// `I − P`.
    pub fn complement(&self) -> Projector {
        let n = self.dim();
        Projector { base: &Hermitian::identity(n) - &self.base, rank: n - self.rank }
    }

    /// Orthonormal basis of the range, as a `dim × rank` matrix.
    pub fn basis(&self) -> Result<CMatrix> {
        let es = eig(&self.base)?;
        let n = self.dim();
        let mut b = CMatrix::zeros(n, self.rank);
        for k in 0..self.rank {
            b.set_column(k, &es.vectors.column(k));
        }
        Ok(b)
    }

    /// Projector onto the span of both ranges.
    pub fn join(&self, other: &Projector) -> Result<Projector> {
        let sum = &self.base + &other.base;
        support_projector(&sum, RANK_TOL)
    }

    /// Projector onto the intersection of both ranges.
    pub fn meet(&self, other: &Projector) -> Result<Projector> {
        let sum = &self.base + &other.base;
        let es = eig(&sum)?;
        let idx: Vec<usize> = (0..es.dim()).filter(|&i| es.values[i] > 2.0 - 1e-9).collect();
        Ok(es.projector_onto(&idx))
    }

    /// `‖Π X Π − X‖∞`: zero exactly when `X` is supported inside the range.
    pub fn confinement_residual(&self, x: &Hermitian) -> Result<f64> {
        let inside = x.sandwich(&self.base);
        (&inside - x).norm()
    }

    /// `Tr(P1 P2)`.
    pub fn overlap(&self, other: &Projector) -> f64 {
        self.base.tr_prod(&other.base)
    }

    /// `‖P − Q‖∞`.
    pub fn distance(&self, other: &Projector) -> Result<f64> {
        (&self.base - &other.base).norm()
    }
}

fn zero_threshold(es: &EigenSystem, rank_tol: f64) -> f64 {
    rank_tol * es.norm().max(1.0)
}

fn check_psd(es: &EigenSystem, rank_tol: f64, what: &str) -> Result<f64> {
    let thr = zero_threshold(es, rank_tol);
    let min = *es.values.last().unwrap_or(&0.0);
    if min < -thr {
        return Err(Error::NotPsd { what: what.to_string(), min_eig: min });
    }
    Ok(thr)
}

/// Projector onto the span of eigenvectors with non-negligible eigenvalue.
pub fn support_projector(m: &Hermitian, rank_tol: f64) -> Result<Projector> {
    let es = eig(m)?;
    let thr = check_psd(&es, rank_tol, "operator")?;
    let idx: Vec<usize> = (0..es.dim()).filter(|&i| es.values[i] > thr).collect();
    Ok(es.projector_onto(&idx))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extremum {
    Max,
    MinNonzero,
}

/// Projector onto the eigenspace of the largest (or smallest non-zero)
/// eigenvalue, including every eigenvalue within the cluster width.
pub fn extremal_projector(m: &Hermitian, which: Extremum, tol: &Tolerances) -> Result<Projector> {
    let es = eig(m)?;
    extremal_from_eig(&es, which, tol)
}

pub(crate) fn extremal_from_eig(es: &EigenSystem, which: Extremum, tol: &Tolerances) -> Result<Projector> {
    let thr = check_psd(es, tol.rank_tol, "operator")?;
    let nonzero: Vec<usize> = (0..es.dim()).filter(|&i| es.values[i] > thr).collect();
    if nonzero.is_empty() {
        return Err(Error::ZeroOperator);
    }
    let width = tol.cluster_tol * es.norm().max(1.0);
    let target = match which {
        Extremum::Max => es.values[nonzero[0]],
        Extremum::MinNonzero => es.values[*nonzero.last().unwrap()],
    };
    let idx: Vec<usize> = nonzero.into_iter().filter(|&i| (es.values[i] - target).abs() <= width).collect();
    Ok(es.projector_onto(&idx))
}

/// `M^p` on the support of `M`, zero elsewhere.
pub fn pseudo_power(m: &Hermitian, p: f64, rank_tol: f64) -> Result<Hermitian> {
    let es = eig(m)?;
    let thr = check_psd(&es, rank_tol, "operator")?;
    let idx: Vec<usize> = (0..es.dim()).filter(|&i| es.values[i] > thr).collect();
    Ok(es.compose(&idx, |x| x.powf(p)))
}

/// `ν2^{-1/2} ν1 ν2^{-1/2}`.
pub fn relative_operator(nu1: &Hermitian, nu2: &Hermitian, rank_tol: f64) -> Result<Hermitian> {
    nu1.check_dim(nu2)?;
    let es1 = eig(nu1)?;
    check_psd(&es1, rank_tol, "first operator")?;
    let inv_sqrt = pseudo_power(nu2, -0.5, rank_tol)?;
    Ok(nu1.sandwich(&inv_sqrt))
}

fn relative_spectrum(nu1: &Hermitian, nu2: &Hermitian, rank_tol: f64) -> Result<EigenSystem> {
    let es2 = eig(nu2)?;
    check_psd(&es2, rank_tol, "second operator")?;
    if es2.values[0] <= zero_threshold(&es2, rank_tol) {
        return Err(Error::ZeroOperator);
    }
    eig(&relative_operator(nu1, nu2, rank_tol)?)
}

/// Largest eigenvalue of `ν2^{-1/2} ν1 ν2^{-1/2}`.
pub fn r_max(nu1: &Hermitian, nu2: &Hermitian, rank_tol: f64) -> Result<f64> {
    let es = relative_spectrum(nu1, nu2, rank_tol)?;
    Ok(es.values[0].max(0.0))
}

/// Smallest non-zero eigenvalue of `ν2^{-1/2} ν1 ν2^{-1/2}`, or 0 when it vanishes.
pub fn r_min(nu1: &Hermitian, nu2: &Hermitian, rank_tol: f64) -> Result<f64> {
    let es = relative_spectrum(nu1, nu2, rank_tol)?;
    let thr = zero_threshold(&es, rank_tol);
    Ok(es.values.iter().rev().copied().find(|&x| x > thr).unwrap_or(0.0))
}

/// `A ⪯ B` up to `tol·max(1, ‖B − A‖∞)`.
pub fn loewner_leq(a: &Hermitian, b: &Hermitian, tol: f64) -> Result<bool> {
    a.check_dim(b)?;
    let es = eig(&(b - a))?;
    let min = *es.values.last().unwrap();
    Ok(min >= -tol * es.norm().max(1.0))
}

/// Smallest eigenvalue.
pub fn lambda_min(m: &Hermitian) -> Result<f64> {
    Ok(*eig(m)?.values.last().unwrap())
}

/// Largest eigenvalue.
pub fn lambda_max(m: &Hermitian) -> Result<f64> {
    Ok(eig(m)?.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn q1_relative() -> Hermitian {
        let s = 1.0 / 3f64.sqrt();
        Hermitian::from_real_rows(&[vec![2.0 / 3.0, s], vec![s, 2.0]])
    }

    #[test]
    fn hermitize_examples() {
        let raw = Hermitian::from_real_diagonal(&[1.0, 2.0]).into_matrix();
        let h = Hermitian::hermitize(&raw, HERM_TOL).unwrap();
        assert_eq!(h.herm_defect(), 0.0);
        assert_eq!(h.matrix(), &raw);

        let mut raw = CMatrix::zeros(2, 2);
        raw[(0, 1)] = c64(1.0, 0.0);
        let h = Hermitian::hermitize(&raw, 2.0).unwrap();
        assert_eq!(h.matrix()[(0, 1)], c64(0.5, 0.0));
        assert_eq!(h.matrix()[(1, 0)], c64(0.5, 0.0));

        let mut raw = CMatrix::identity(2, 2);
        raw[(0, 1)] = c64(0.0, 1e-3);
        match Hermitian::hermitize(&raw, 1e-8) {
            Err(Error::HermDefectTooLarge { defect, .. }) => assert_abs_diff_eq!(defect, 1e-3, epsilon = 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eig_diagonal_and_q1() {
        let es = eig(&Hermitian::from_real_diagonal(&[0.25, 0.25, 0.5])).unwrap();
        assert_eq!(es.values, vec![0.5, 0.25, 0.25]);

        let es = eig(&q1_relative()).unwrap();
        let r7 = 7f64.sqrt();
        assert_abs_diff_eq!(es.values[0], (4.0 + r7) / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(es.values[1], (4.0 - r7) / 3.0, epsilon = 1e-13);

        let es = eig(&Hermitian::identity(3)).unwrap();
        assert_eq!(es.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn eig_complex_entries() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c64(1.0, 0.0);
        m[(1, 1)] = c64(1.0, 0.0);
        m[(0, 1)] = c64(0.0, 1.0);
        m[(1, 0)] = c64(0.0, -1.0);
        let h = Hermitian::hermitize(&m, HERM_TOL).unwrap();
        let es = eig(&h).unwrap();
        assert_abs_diff_eq!(es.values[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(es.values[1], 0.0, epsilon = 1e-14);
        assert!(max_abs(&(es.reconstruct().into_matrix() - m)) < 1e-14);
        // first significant component is real-positive
        assert!(es.vectors[(0, 0)].im == 0.0 && es.vectors[(0, 0)].re > 0.0);
    }

    #[test]
    fn support_examples() {
        let p = support_projector(&Hermitian::from_real_diagonal(&[0.5, 0.5, 0.0]), RANK_TOL).unwrap();
        assert_eq!(p.rank(), 2);
        assert!(max_abs(&(p.matrix() - Hermitian::from_real_diagonal(&[1.0, 1.0, 0.0]).into_matrix())) < 1e-15);

        let mu = 0.5;
        let sigma = Hermitian::from_real_diagonal(&[mu / 4.0, 3.0 * mu / 4.0, 1.0 - mu]);
        assert_eq!(support_projector(&sigma, RANK_TOL).unwrap().rank(), 3);

        let plus = CVector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0)]);
        let pp = Projector::onto_vector(&plus);
        let sp = support_projector(pp.as_hermitian(), RANK_TOL).unwrap();
        assert!(sp.distance(&pp).unwrap() < 1e-14);

        let bad = Hermitian::from_real_diagonal(&[1.0, -0.1]);
        assert!(matches!(support_projector(&bad, RANK_TOL), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn extremal_examples() {
        let m = Hermitian::from_real_diagonal(&[2.0, 2.0 / 3.0, 1.0]);
        let tol = Tolerances::default();
        let pmax = extremal_projector(&m, Extremum::Max, &tol).unwrap();
        assert_eq!(pmax.distance(&Projector::coordinate(3, &[0])).unwrap(), 0.0);
        let pmin = extremal_projector(&m, Extremum::MinNonzero, &tol).unwrap();
        assert_eq!(pmin.distance(&Projector::coordinate(3, &[1])).unwrap(), 0.0);
        let id = extremal_projector(&Hermitian::identity(2), Extremum::Max, &tol).unwrap();
        assert_eq!(id.rank(), 2);
        assert_eq!(extremal_projector(&Hermitian::zeros(2), Extremum::Max, &tol), Err(Error::ZeroOperator));
    }

    #[test]
    fn pseudo_power_examples() {
        let m = pseudo_power(&Hermitian::from_real_diagonal(&[4.0, 0.0]), -0.5, RANK_TOL).unwrap();
        assert_abs_diff_eq!(m.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_eq!(m.matrix()[(1, 1)].re, 0.0);

        let s = pseudo_power(&Hermitian::from_real_diagonal(&[0.125, 0.375, 0.5]), -0.5, RANK_TOL).unwrap();
        assert_abs_diff_eq!(s.matrix()[(0, 0)].re, 8f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(s.matrix()[(1, 1)].re, (8.0f64 / 3.0).sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(s.matrix()[(2, 2)].re, 2f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn relative_operator_examples() {
        let mu = 0.5;
        let rho = Hermitian::from_real_diagonal(&[mu / 2.0, mu / 2.0, 1.0 - mu]);
        let sigma = Hermitian::from_real_diagonal(&[mu / 4.0, 3.0 * mu / 4.0, 1.0 - mu]);
        let r = relative_operator(&rho, &sigma, RANK_TOL).unwrap();
        let expect = Hermitian::from_real_diagonal(&[2.0, 2.0 / 3.0, 1.0]);
        assert!((&r - &expect).max_abs() < 1e-14);
        assert_abs_diff_eq!(r_max(&rho, &sigma, RANK_TOL).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r_max(&sigma, &rho, RANK_TOL).unwrap(), 1.5, epsilon = 1e-14);

        let q_rho = Hermitian::from_real_rows(&[vec![0.5, 0.25], vec![0.25, 0.5]]);
        let q_sigma = Hermitian::from_real_diagonal(&[0.75, 0.25]);
        let r = relative_operator(&q_rho, &q_sigma, RANK_TOL).unwrap();
        assert!((&r - &q1_relative()).max_abs() < 1e-14);
        let r7 = 7f64.sqrt();
        assert_abs_diff_eq!(r_max(&q_rho, &q_sigma, RANK_TOL).unwrap(), (4.0 + r7) / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r_min(&q_rho, &q_sigma, RANK_TOL).unwrap(), (4.0 - r7) / 3.0, epsilon = 1e-13);

        let nu = Hermitian::from_real_diagonal(&[0.7, 0.3, 0.0]);
        let self_rel = relative_operator(&nu, &nu, RANK_TOL).unwrap();
        assert!((&self_rel - &Hermitian::from_real_diagonal(&[1.0, 1.0, 0.0])).max_abs() < 1e-14);
        assert_abs_diff_eq!(r_max(&nu, &nu, RANK_TOL).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(r_max(&nu, &Hermitian::zeros(3), RANK_TOL), Err(Error::ZeroOperator));
    }

    #[test]
    fn loewner_examples() {
        let i2 = Hermitian::identity(2);
        assert!(loewner_leq(&i2.scaled(0.5), &i2, LOEWNER_TOL).unwrap());
        let a = Hermitian::from_real_diagonal(&[1.0, 0.0]);
        let b = Hermitian::from_real_diagonal(&[0.0, 1.0]);
        assert!(!loewner_leq(&a, &b, LOEWNER_TOL).unwrap());
        assert!(matches!(loewner_leq(&a, &Hermitian::identity(3), LOEWNER_TOL), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn meet_and_join() {
        let a = Projector::coordinate(3, &[0, 1]);
        let b = Projector::coordinate(3, &[1, 2]);
        let m = a.meet(&b).unwrap();
        assert_eq!(m.rank(), 1);
        assert!(m.distance(&Projector::coordinate(3, &[1])).unwrap() < 1e-14);
        assert_eq!(a.join(&b).unwrap().rank(), 3);
    }
}
