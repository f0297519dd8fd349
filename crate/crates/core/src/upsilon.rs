//! `Υ_{Π1,Π2}(σ, r)`: the largest `c` with `c(rψ1 + (1−r)ψ2) ⪯ σ` for
//! densities `ψ1 ∈ S(Π1)`, `ψ2 ∈ S(Π2)`.
//!
//! Both projectors are first intersected with the support of `σ`, and `σ` is
//! replaced by its shorted operator on the span of the two ranges. Closed
//! forms cover the endpoints `r ∈ {0,1}`, the case where both ranges are
//! lines, and the block-diagonal case; anything else goes to a log-barrier
//! interior-point solver.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, lambda_min, pseudo_power, support_projector, CMatrix, Hermitian, Projector, RANK_TOL};

/// Largest `Tr(Π1 Π2)` for the projectors to count as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
/// Relative size of the off-diagonal block below which the block form applies.
pub const BLOCK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UpsilonMethod {
    Endpoint,
    RankOne,
    Block,
    Numeric,
    /// One of the required subspaces misses the support of `σ`.
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpsilonOptions {
    /// Target duality gap of the numeric solver, relative to `Tr σ`.
    pub tol: f64,
    /// Skip the closed forms when `0 < r < 1`.
    pub force_numeric: bool,
}

impl Default for UpsilonOptions {
    fn default() -> Self {
        UpsilonOptions { tol: 1e-12, force_numeric: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonResult {
    pub value: f64,
    /// Optimal densities in the full space; `None` where the weight is zero
    /// or the problem is infeasible.
    pub psi1: Option<Hermitian>,
    pub psi2: Option<Hermitian>,
    pub method: UpsilonMethod,
    /// Upper bound on `Υ − value` (zero for closed forms).
    pub gap: f64,
}

impl UpsilonResult {
    fn infeasible() -> Self {
        UpsilonResult { value: 0.0, psi1: None, psi2: None, method: UpsilonMethod::Infeasible, gap: 0.0 }
    }
}

pub fn upsilon(pi1: &Projector, pi2: &Projector, sigma: &Hermitian, r: f64) -> Result<UpsilonResult> {
    upsilon_with(pi1, pi2, sigma, r, &UpsilonOptions::default())
}

pub fn upsilon_with(
    pi1: &Projector,
    pi2: &Projector,
    sigma: &Hermitian,
    r: f64,
    opts: &UpsilonOptions,
) -> Result<UpsilonResult> {
    let n = sigma.dim();
    for p in [pi1, pi2] {
        if p.dim() != n {
            return Err(Error::DimMismatch { expected: n, found: p.dim() });
        }
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::BadParameter(format!("r = {r} must lie in [0, 1]")));
    }
    let overlap = pi1.overlap(pi2);
    if overlap > ORTHOGONALITY_TOL {
        return Err(Error::ProjectorsNotOrthogonal { overlap });
    }
    let supp = support_projector(sigma, RANK_TOL)?;
    let q1 = pi1.meet(&supp)?;
    let q2 = pi2.meet(&supp)?;
    if (r > 0.0 && q1.is_zero()) || (r < 1.0 && q2.is_zero()) {
        return Ok(UpsilonResult::infeasible());
    }
    let sigma_pinv = pseudo_power(sigma, -1.0, RANK_TOL)?;
    let shorted = |v: &CMatrix| -> Result<Hermitian> {
        let inner = sigma_pinv.congruence(&v.adjoint());
        pseudo_power(&inner, -1.0, RANK_TOL)
    };

    if r == 0.0 || r == 1.0 {
        let v = if r == 0.0 { q2.basis()? } else { q1.basis()? };
        let m = shorted(&v)?;
        let value = m.trace();
        let psi = m.congruence(&v).scaled(1.0 / value);
        let (psi1, psi2) = if r == 0.0 { (None, Some(psi)) } else { (Some(psi), None) };
        return Ok(UpsilonResult { value, psi1, psi2, method: UpsilonMethod::Endpoint, gap: 0.0 });
    }

    let v1 = q1.basis()?;
    let v2 = q2.basis()?;
    let (k1, k2) = (v1.ncols(), v2.ncols());
    let mut v = CMatrix::zeros(n, k1 + k2);
    v.columns_mut(0, k1).copy_from(&v1);
    v.columns_mut(k1, k2).copy_from(&v2);
    let s = shorted(&v)?;
    let embed = |phi: &Hermitian, vi: &CMatrix| phi.congruence(vi);

    if !opts.force_numeric {
        if k1 == 1 && k2 == 1 {
            let d = Hermitian::from_real_diagonal(&[1.0 / r.sqrt(), 1.0 / (1.0 - r).sqrt()]);
            let value = lambda_min(&s.sandwich(&d))?.max(0.0);
            let one = Hermitian::identity(1);
            return Ok(UpsilonResult {
                value,
                psi1: Some(embed(&one, &v1)),
                psi2: Some(embed(&one, &v2)),
                method: UpsilonMethod::RankOne,
                gap: 0.0,
            });
        }
        let off = s.matrix().view((0, k1), (k1, k2)).into_owned();
        let off_norm = crate::linalg::spectral_norm(&off.adjoint())?;
        if off_norm <= BLOCK_TOL * s.norm()?.max(1.0) {
            let s11 = Hermitian::symmetrized(s.matrix().view((0, 0), (k1, k1)).into_owned());
            let s22 = Hermitian::symmetrized(s.matrix().view((k1, k1), (k2, k2)).into_owned());
            let (t1, t2) = (s11.trace(), s22.trace());
            return Ok(UpsilonResult {
                value: (t1 / r).min(t2 / (1.0 - r)),
                psi1: Some(embed(&s11.scaled(1.0 / t1), &v1)),
                psi2: Some(embed(&s22.scaled(1.0 / t2), &v2)),
                method: UpsilonMethod::Block,
                gap: 0.0,
            });
        }
    }

    let sol = barrier_solve(&s, k1, k2, r, opts.tol)?;
    Ok(UpsilonResult {
        value: sol.value,
        psi1: Some(embed(&sol.phi1, &v1)),
        psi2: Some(embed(&sol.phi2, &v2)),
        method: UpsilonMethod::Numeric,
        gap: sol.gap,
    })
}

/// Orthonormal basis of `k × k` Hermitian matrices under `⟨A,B⟩ = Tr(AB)`.
/// Diagonal units come first.
fn hermitian_basis(k: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        let mut e = CMatrix::zeros(k, k);
        e[(i, i)] = c64(1.0, 0.0);
        out.push(e);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..k {
        for j in (i + 1)..k {
            let mut e = CMatrix::zeros(k, k);
            e[(i, j)] = c64(h, 0.0);
            e[(j, i)] = c64(h, 0.0);
            out.push(e);
            let mut f = CMatrix::zeros(k, k);
            f[(i, j)] = c64(0.0, h);
            f[(j, i)] = c64(0.0, -h);
            out.push(f);
        }
    }
    out
}

struct BarrierSolution {
    phi1: Hermitian,
    phi2: Hermitian,
    value: f64,
    gap: f64,
}

/// Variables `x = (x1, x2)` parameterize `X1 = Σ x1_j B_j` and `X2` likewise.
struct Problem {
    s: CMatrix,
    k1: usize,
    k2: usize,
    b1: Vec<CMatrix>,
    b2: Vec<CMatrix>,
    /// Objective `Tr X1 + Tr X2`.
    obj: DVector<f64>,
    /// Equality `(1−r) Tr X1 − r Tr X2 = 0`.
    eq: DVector<f64>,
}

struct Eval {
    f: f64,
    grad: DVector<f64>,
    /// Hessian factor: `H = JᵀJ`.
    jac: DMatrix<f64>,
}

/// Real coordinates of a complex matrix, so that dot products of Hermitian
/// matrices give `Tr(AB)`.
fn push_real(col: &mut Vec<f64>, m: &CMatrix) {
    for z in m.iter() {
        col.push(z.re);
        col.push(z.im);
    }
}

impl Problem {
    fn blocks(&self, x: &DVector<f64>) -> (CMatrix, CMatrix) {
        let m1 = self.b1.len();
        let mut x1 = CMatrix::zeros(self.k1, self.k1);
        for (j, b) in self.b1.iter().enumerate() {
            x1 += b * c64(x[j], 0.0);
        }
        let mut x2 = CMatrix::zeros(self.k2, self.k2);
        for (j, b) in self.b2.iter().enumerate() {
            x2 += b * c64(x[m1 + j], 0.0);
        }
        (x1, x2)
    }

    fn slack(&self, x1: &CMatrix, x2: &CMatrix) -> CMatrix {
        let mut z = self.s.clone();
        let (k1, k2) = (self.k1, self.k2);
        let mut v = z.view_mut((0, 0), (k1, k1));
        v -= x1;
        let mut v = z.view_mut((k1, k1), (k2, k2));
        v -= x2;
        z
    }

    /// `(−log det, L⁻¹)` for the Cholesky factor `L`, or `None` when not
    /// positive definite. Pivots are taken from real parts so that roundoff
    /// cannot turn a negative pivot into a complex square root.
    fn factor(m: &CMatrix) -> Option<(f64, CMatrix)> {
        let n = m.nrows();
        let mut l = CMatrix::zeros(n, n);
        let mut logdet = 0.0;
        for j in 0..n {
            let mut d = m[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d.is_finite() && d > 0.0) {
                return None;
            }
            let ljj = d.sqrt();
            l[(j, j)] = c64(ljj, 0.0);
            logdet += 2.0 * ljj.ln();
            for i in (j + 1)..n {
                let mut v = m[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = v / ljj;
            }
        }
        let l_inv = l.solve_lower_triangular(&CMatrix::identity(n, n))?;
        Some((-logdet, l_inv))
    }

    /// `(−log det, inverse)` or `None` when not positive definite.
    fn chol(m: &CMatrix) -> Option<(f64, CMatrix)> {
        let (ld, l_inv) = Self::factor(m)?;
        Some((ld, l_inv.adjoint() * l_inv))
    }

    fn value(&self, x: &DVector<f64>, tau: f64) -> Option<f64> {
        let (x1, x2) = self.blocks(x);
        let (a, _) = Self::factor(&x1)?;
        let (b, _) = Self::factor(&x2)?;
        let (c, _) = Self::factor(&self.slack(&x1, &x2))?;
        Some(-tau * self.obj.dot(x) + a + b + c)
    }

    fn eval(&self, x: &DVector<f64>, tau: f64) -> Option<Eval> {
        let (x1, x2) = self.blocks(x);
        let (a, c1) = Self::factor(&x1)?;
        let (b, c2) = Self::factor(&x2)?;
        let z = self.slack(&x1, &x2);
        let (c, cz) = Self::factor(&z)?;
        let (m1, m2) = (self.b1.len(), self.b2.len());
        let m = m1 + m2;
        let (k1, k2) = (self.k1, self.k2);
        let k = k1 + k2;
        let rows = 2 * (k1 * k1 + k2 * k2 + k * k);
        let mut jac = DMatrix::zeros(rows, m);
        let mut grad = DVector::zeros(m);
        for j in 0..m {
            let (own, embedded) = if j < m1 {
                let w = &c1 * &self.b1[j] * c1.adjoint();
                let mut f = CMatrix::zeros(k, k);
                f.view_mut((0, 0), (k1, k1)).copy_from(&self.b1[j]);
                (w, f)
            } else {
                let w = &c2 * &self.b2[j - m1] * c2.adjoint();
                let mut f = CMatrix::zeros(k, k);
                f.view_mut((k1, k1), (k2, k2)).copy_from(&self.b2[j - m1]);
                (w, f)
            };
            let wz = &cz * embedded * cz.adjoint();
            let trace = |a: &CMatrix| (0..a.nrows()).map(|i| a[(i, i)].re).sum::<f64>();
            grad[j] = -tau * self.obj[j] - trace(&own) + trace(&wz);
            let mut col = Vec::with_capacity(rows);
            let zeros1 = CMatrix::zeros(k1, k1);
            let zeros2 = CMatrix::zeros(k2, k2);
            if j < m1 {
                push_real(&mut col, &own);
                push_real(&mut col, &zeros2);
            } else {
                push_real(&mut col, &zeros1);
                push_real(&mut col, &own);
            }
            push_real(&mut col, &wz);
            jac.set_column(j, &DVector::from_vec(col));
        }
        Some(Eval { f: -tau * self.obj.dot(x) + a + b + c, grad, jac })
    }

    /// Newton step on the equality-constrained barrier problem, solved as a
    /// least-squares problem on the null space of the constraint.
    fn newton(&self, ev: &Eval) -> Option<DVector<f64>> {
        let m = ev.grad.len();
        // Householder reflector mapping the constraint onto e₀; its other
        // columns span the null space.
        let mut v = self.eq.clone();
        let norm = v.norm();
        v[0] += if v[0] >= 0.0 { norm } else { -norm };
        let h = DMatrix::identity(m, m) - &v * v.transpose() * (2.0 / v.norm_squared());
        let n = h.columns(1, m - 1).into_owned();
        let b = &ev.jac * &n;
        let qr = b.qr();
        let rmat = qr.r();
        let rhs = -(n.transpose() * &ev.grad);
        let w = rmat.transpose().solve_lower_triangular(&rhs)?;
        let y = rmat.solve_upper_triangular(&w)?;
        Some(n * y)
    }
}

fn barrier_solve(s: &Hermitian, k1: usize, k2: usize, r: f64, tol: f64) -> Result<BarrierSolution> {
    // Work with unit trace; the value scales linearly with S.
    let trace_s = s.trace();
    let s = s.scaled(1.0 / trace_s);
    let b1 = hermitian_basis(k1);
    let b2 = hermitian_basis(k2);
    let (m1, m2) = (b1.len(), b2.len());
    let mut obj = DVector::zeros(m1 + m2);
    let mut eq = DVector::zeros(m1 + m2);
    for i in 0..k1 {
        obj[i] = 1.0;
        eq[i] = 1.0 - r;
    }
    for i in 0..k2 {
        obj[m1 + i] = 1.0;
        eq[m1 + i] = -r;
    }
    let prob = Problem { s: s.matrix().clone(), k1, k2, b1, b2, obj, eq };

    let alpha = 0.5 * lambda_min(&s)? / (r / k1 as f64).max((1.0 - r) / k2 as f64);
    let mut x = DVector::zeros(m1 + m2);
    for i in 0..k1 {
        x[i] = alpha * r / k1 as f64;
    }
    for i in 0..k2 {
        x[m1 + i] = alpha * (1.0 - r) / k2 as f64;
    }

    let barrier_weight = (k1 + k2 + k1 + k2) as f64;
    let mut tau = barrier_weight;
    let fail = || Error::ConvergenceFailure { off_diag: f64::NAN };
    let s_inv_half = pseudo_power(&s, -0.5, RANK_TOL)?;
    let mut best = certify(&prob, &x, r, &s_inv_half)?;
    let mut upper = f64::INFINITY;
    loop {
        let mut last_dec = f64::INFINITY;
        for _ in 0..200 {
            let ev = prob.eval(&x, tau).ok_or_else(fail)?;
            let dx = match prob.newton(&ev) {
                Some(d) if d.iter().all(|v| v.is_finite()) => d,
                _ => break,
            };
            let slope = ev.grad.dot(&dx);
            last_dec = -slope / 2.0;
            if last_dec <= 1e-8 {
                break;
            }
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-14 {
                let cand = &x + &dx * t;
                if let Some(fv) = prob.value(&cand, tau) {
                    if fv <= ev.f + 0.25 * t * slope {
                        x = cand;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let sol = certify(&prob, &x, r, &s_inv_half)?;
        if sol.value > best.value {
            best = sol;
        }
        upper = upper.min(dual_bound(&prob, &x, r)?);
        let done = upper - best.value <= tol;
        // Past this point Newton steps are no longer accurate.
        if done || last_dec > 1e-6 || tau > 1e15 {
            break;
        }
        tau *= 10.0;
    }
    best.gap = (upper - best.value).max(0.0) * trace_s;
    best.value *= trace_s;
    Ok(best)
}

/// Value of the direction of `x`, rescaled onto the boundary of `X ⪯ S` so
/// that it is certainly feasible.
fn certify(prob: &Problem, x: &DVector<f64>, r: f64, s_inv_half: &Hermitian) -> Result<BarrierSolution> {
    let (k1, k2) = (prob.k1, prob.k2);
    let (x1, x2) = prob.blocks(x);
    let phi1 = Hermitian::symmetrized(x1);
    let phi2 = Hermitian::symmetrized(x2);
    let phi1 = phi1.scaled(1.0 / phi1.trace());
    let phi2 = phi2.scaled(1.0 / phi2.trace());
    let mut mix = CMatrix::zeros(k1 + k2, k1 + k2);
    mix.view_mut((0, 0), (k1, k1)).copy_from(&(phi1.matrix() * c64(r, 0.0)));
    mix.view_mut((k1, k1), (k2, k2)).copy_from(&(phi2.matrix() * c64(1.0 - r, 0.0)));
    let top = crate::linalg::lambda_max(&Hermitian::symmetrized(mix).sandwich(s_inv_half))?;
    Ok(BarrierSolution { phi1, phi2, value: 1.0 / top, gap: f64::INFINITY })
}

/// Upper bound on the optimum from the dual point `Y = (S − X)^{-1}`: for
/// any `Y ⪰ 0`, `Tr(SY) / (r λ_min(Y11) + (1−r) λ_min(Y22))` bounds it.
fn dual_bound(prob: &Problem, x: &DVector<f64>, r: f64) -> Result<f64> {
    let (x1, x2) = prob.blocks(x);
    let z = prob.slack(&x1, &x2);
    let y = match Problem::chol(&z) {
        Some((_, inv)) => Hermitian::symmetrized(inv),
        None => return Ok(f64::INFINITY),
    };
    let (k1, k2) = (prob.k1, prob.k2);
    let y11 = Hermitian::symmetrized(y.matrix().view((0, 0), (k1, k1)).into_owned());
    let y22 = Hermitian::symmetrized(y.matrix().view((k1, k1), (k2, k2)).into_owned());
    let kappa = r * lambda_min(&y11)? + (1.0 - r) * lambda_min(&y22)?;
    let s = Hermitian::symmetrized(prob.s.clone());
    if kappa.is_nan() || kappa <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(s.tr_prod(&y) / kappa)
}
