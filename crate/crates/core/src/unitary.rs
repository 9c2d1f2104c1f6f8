// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Special unitary matrices: spectra, the involutions `τ(u) = ū` and
//! `τ⁻(u) = uᵗ`, Haar sampling, and Takagi factorization of symmetric
//! unitaries.

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::alcove::{alcove_project, AlcovePoint};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Per-dimension tolerance on `‖U†U − I‖_F`, `|det U − 1|` and `‖U − Uᵗ‖_F`.
pub const UNITARY_TOL: f64 = 1e-10;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues within this distance are treated as one eigenspace before the
/// real basis is extracted.
const TAKAGI_CLUSTER_TOL: f64 = 1e-6;

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

/// `diag(e^{iθ_1}, …)`.
pub fn diag_phases(theta: &[f64]) -> CMatrix {
    let v: Vec<Complex64> = theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    CMatrix::from_diagonal(&DVector::from_vec(v))
}

/// `exp(x) = diag(e^{2πi x_k})` for alcove coordinates.
pub fn exp_alcove(x: &AlcovePoint) -> CMatrix {
    let theta: Vec<f64> = x.coords().iter().map(|v| TAU * v).collect();
    diag_phases(&theta)
}

/// Element of SU(n).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tol(m, UNITARY_TOL)
    }

    pub fn with_tol(m: CMatrix, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(Error::NotUnitary(format!("shape {}x{}", m.nrows(), m.ncols())));
        }
        let defect = (m.adjoint() * &m - identity(n)).norm();
        if !(defect <= tol * n as f64) {
            return Err(Error::NotUnitary(format!("‖U†U − I‖ = {defect:e}")));
        }
        let det = m.determinant();
        if !((det - Complex64::new(1.0, 0.0)).norm() <= tol.max(UNITARY_TOL)) {
            return Err(Error::NotUnitary(format!("det = {det}")));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix known to be special unitary by construction.
    pub(crate) fn from_raw(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(identity(n))
    }

    /// `diag(e^{iθ})`, rejected unless `Σθ ∈ 2πℤ`.
    pub fn diagonal(theta: &[f64]) -> Result<Self> {
        Self::new(diag_phases(theta))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.conjugate())
    }

    /// `k · self · k⁻¹`.
    pub fn conjugated_by(&self, k: &UnitaryMatrix) -> Self {
        Self(&k.0 * &self.0 * k.0.adjoint())
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.0 - self.0.transpose()).norm()
    }

    pub fn dist(&self, other: &UnitaryMatrix) -> f64 {
        dist(&self.0, &other.0)
    }

    /// Re-projects onto SU(n) (polar factor, then determinant phase). Used to
    /// wash out rounding drift after long products.
    pub fn reunitarize(&self) -> Self {
        Self(project_su(&self.0))
    }
}

impl Mul<&UnitaryMatrix> for &UnitaryMatrix {
    type Output = UnitaryMatrix;
    fn mul(self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }
}

impl Serialize for UnitaryMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let m = matrix_from_rows(&rows).map_err(D::Error::custom)?;
        UnitaryMatrix::with_tol(m, 1e-8).map_err(D::Error::custom)
    }
}

/// Row-major `[[ [re, im], … ], …]`.
pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Element of `Fix(τ⁻)`: a symmetric special unitary matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SymmetricUnitary(UnitaryMatrix);

impl SymmetricUnitary {
    pub fn new(u: UnitaryMatrix) -> Result<Self> {
        Self::with_tol(u, UNITARY_TOL)
    }

    pub fn with_tol(u: UnitaryMatrix, tol: f64) -> Result<Self> {
        let d = u.symmetry_defect();
        if !(d <= tol * u.n() as f64) {
            return Err(Error::NotSymmetric(d));
        }
        Ok(Self(u))
    }

    pub(crate) fn from_raw(m: CMatrix) -> Self {
        Self(UnitaryMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(UnitaryMatrix::identity(n))
    }

    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.0
    }

    pub fn into_unitary(self) -> UnitaryMatrix {
        self.0
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0 .0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }
}

impl<'de> Deserialize<'de> for SymmetricUnitary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let u = UnitaryMatrix::deserialize(d)?;
        SymmetricUnitary::with_tol(u, 1e-8).map_err(D::Error::custom)
    }
}

/// Conjugacy class of SU(n) labelled by its alcove point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConjClassSpec {
    pub lambda: AlcovePoint,
}

impl ConjClassSpec {
    pub fn new(lambda: AlcovePoint) -> Self {
        Self { lambda }
    }

    pub fn from_coords(x: Vec<f64>) -> Result<Self> {
        Ok(Self { lambda: AlcovePoint::with_default_tol(x)? })
    }

    pub fn identity(n: usize) -> Self {
        Self { lambda: AlcovePoint::origin(n) }
    }

    pub fn n(&self) -> usize {
        self.lambda.n()
    }

    /// The diagonal representative `exp(λ)`.
    pub fn representative(&self) -> UnitaryMatrix {
        UnitaryMatrix(exp_alcove(&self.lambda))
    }
}

/// Entrywise conjugation, an involutive automorphism of SU(n).
pub fn tau(u: &UnitaryMatrix) -> UnitaryMatrix {
    u.conjugate()
}

/// `τ⁻(u) = τ(u⁻¹) = uᵗ`; fixes the diagonal torus pointwise.
pub fn tau_minus(u: &UnitaryMatrix) -> UnitaryMatrix {
    u.transpose()
}

/// `a b a⁻¹ b⁻¹`.
pub fn commutator(a: &UnitaryMatrix, b: &UnitaryMatrix) -> UnitaryMatrix {
    UnitaryMatrix(&a.0 * &b.0 * a.0.adjoint() * b.0.adjoint())
}

/// Eigenvalues and Schur vectors of a unitary (hence normal) matrix.
pub fn unitary_eigen(m: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let schur = Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER).ok_or(Error::EigenFailure)?;
    let (q, t) = schur.unpack();
    let vals: Vec<Complex64> = (0..t.nrows()).map(|k| t[(k, k)]).collect();
    if vals.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok((vals, q))
}

/// Eigenphases `arg(λ)/2π` in `(−1/2, 1/2]`, in solver order.
pub fn eigenphases(u: &UnitaryMatrix) -> Result<Vec<f64>> {
    let (vals, _) = unitary_eigen(&u.0)?;
    Ok(vals.iter().map(|z| z.arg() / TAU).collect())
}

/// Alcove label of the conjugacy class of `u`.
pub fn spectrum_to_alcove(u: &UnitaryMatrix) -> Result<AlcovePoint> {
    alcove_project(&eigenphases(u)?, 1e-6)
}

/// Haar-distributed element of SU(n): QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`, then the determinant phase removed.
pub fn haar_su<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    UnitaryMatrix(fix_det(q))
}

/// Random element of SO(n), used to build symmetric test matrices.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RMatrix {
    let z = RMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Random symmetric special unitary `V diag(e^{iφ}) Vᵗ` with `V ∈ SO(n)`.
pub fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymmetricUnitary {
    let v = haar_orthogonal(n, rng);
    let mut phi: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
    let s: f64 = phi.iter().sum();
    for p in phi.iter_mut() {
        *p -= s / n as f64;
    }
    let vc = v.map(|x| Complex64::new(x, 0.0));
    SymmetricUnitary::from_raw(&vc * diag_phases(&phi) * vc.transpose())
}

/// Divides out `det(m)^{1/n}` (principal branch).
fn fix_det(m: CMatrix) -> CMatrix {
    let n = m.nrows();
    let det = m.determinant();
    let corr = Complex64::from_polar(1.0, -det.arg() / n as f64);
    m * corr
}

/// Nearest special unitary (polar factor, then determinant phase).
pub fn project_su(m: &CMatrix) -> CMatrix {
    let svd = svd_jacobi(m);
    fix_det(svd.u * svd.v.adjoint())
}

/// Thin singular value decomposition `a = u · diag(s) · v†`, singular values
/// in descending order. `u` is `m × n`; its columns for zero singular values
/// are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Used instead of the bidiagonal QR iteration, which can fail to converge
/// on the highly structured operators built from commuting matrices.
pub fn svd_jacobi(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = identity(n);
    // columns below this squared norm are left alone
    let negligible = 1e-40 * a.norm_squared();
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if alpha <= negligible || beta <= negligible || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // make the off-diagonal entry real, then rotate
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for (mat, rows) in [(&mut w, m), (&mut v, n)] {
                    for r in 0..rows {
                        let xp = mat[(r, p)];
                        let xq = mat[(r, q)] * phase.conj();
                        mat[(r, p)] = xp * c - xq * sn;
                        mat[(r, q)] = xp * sn + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut u = CMatrix::zeros(m, n);
    let mut vs = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        if norms[j] > 0.0 {
            u.set_column(k, &(w.column(j) / Complex64::new(norms[j], 0.0)));
        }
        vs.set_column(k, &v.column(j));
    }
    Svd { u, s, v: vs }
}

/// Sample of the class `spec`: `k exp(λ) k⁻¹` with `k` Haar on SU(n).
pub fn sample_class(spec: &ConjClassSpec, seed: u64) -> UnitaryMatrix {
    let mut rng = rng::stream(seed, Purpose::Sample, 0);
    sample_class_with(spec, &mut rng)
}

pub fn sample_class_with<R: Rng + ?Sized>(spec: &ConjClassSpec, rng: &mut R) -> UnitaryMatrix {
    let k = haar_su(spec.n(), rng);
    spec.representative().conjugated_by(&k)
}

/// `exp(H)` for skew-Hermitian `H`, through the eigendecomposition of the
/// Hermitian matrix `−iH`. The result is unitary to rounding.
pub fn expm_skew(h: &CMatrix) -> CMatrix {
    let i = Complex64::new(0.0, 1.0);
    let herm = h.map(|z| -i * z);
    let herm = (&herm + herm.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let v = eig.eigenvectors;
    let d: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    &v * diag_phases(&d) * v.adjoint()
}

/// Takagi factorization `w = O diag(e^{iφ}) Oᵗ` of a symmetric unitary.
#[derive(Debug, Clone)]
pub struct Takagi {
    /// Real orthogonal factor.
    pub o: RMatrix,
    /// Phases in `(−π, π]`.
    pub phi: Vec<f64>,
}

impl Takagi {
    pub fn reconstruct(&self) -> CMatrix {
        let oc = self.o.map(|x| Complex64::new(x, 0.0));
        &oc * diag_phases(&self.phi) * oc.transpose()
    }
}

pub fn takagi(w: &SymmetricUnitary) -> Result<Takagi> {
    takagi_raw(w.matrix(), UNITARY_TOL)
}

/// Takagi factorization of a matrix that is symmetric unitary within `tol`
/// (per dimension).
///
/// The eigenspaces of a symmetric unitary are closed under conjugation, so
/// each spectral projector is real; its dominant eigenvectors give a real
/// orthonormal basis of the eigenspace. A few real Jacobi sweeps on
/// `(Re Oᵗ w O, Im Oᵗ w O)` then remove what rounding leaves off the diagonal.
pub fn takagi_raw(w: &CMatrix, tol: f64) -> Result<Takagi> {
    let n = w.nrows();
    let defect = (w - w.transpose()).norm();
    if !(defect <= tol * n as f64) {
        return Err(Error::NotSymmetric(defect));
    }
    let ws = (w + w.transpose()) * Complex64::new(0.5, 0.0);
    let (vals, q) = unitary_eigen(&ws)?;

    // group eigenvalues that agree within the cluster tolerance
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].arg().total_cmp(&vals[b].arg()));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(c) if (vals[*c.last().unwrap()] - vals[k]).norm() <= TAKAGI_CLUSTER_TOL => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    // wrap-around at arg = ±π
    if clusters.len() > 1 {
        let first = clusters[0][0];
        let last = *clusters.last().unwrap().last().unwrap();
        if (vals[first] - vals[last]).norm() <= TAKAGI_CLUSTER_TOL {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }

    let mut basis = RMatrix::zeros(n, n);
    let mut col = 0;
    for c in &clusters {
        let v = q.select_columns(c.iter());
        let proj = &v * v.adjoint();
        let real = proj.map(|z| z.re);
        let real = (&real + real.transpose()) * 0.5;
        let eig = SymmetricEigen::new(real);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for &k in idx.iter().take(c.len()) {
            basis.set_column(col, &eig.eigenvectors.column(k));
            col += 1;
        }
    }
    // re-orthonormalize across clusters
    let qr = basis.qr();
    let (mut o, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            o.column_mut(j).neg_mut();
        }
    }

    let mut b = {
        let oc = o.map(|x| Complex64::new(x, 0.0));
        oc.transpose() * &ws * &oc
    };
    jacobi_polish(&mut b, &mut o);

    let phi: Vec<f64> = (0..n)
        .map(|k| {
            let a = b[(k, k)].arg();
            if a <= -PI {
                a + TAU
            } else {
                a
            }
        })
        .collect();
    Ok(Takagi { o, phi })
}

/// Real Jacobi rotations that minimize the off-diagonal part of the complex
/// symmetric matrix `b`; rotations are accumulated into `o`.
fn jacobi_polish(b: &mut CMatrix, o: &mut RMatrix) {
    let n = b.nrows();
    for _sweep in 0..30 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += b[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let bpq = b[(p, q)];
                if bpq.norm() <= 1e-300 {
                    continue;
                }
                let h = (b[(p, p)] - b[(q, q)]) * 0.5;
                // off-diagonal after rotation by θ: bpq cos 2θ + h sin 2θ;
                // minimize its modulus over real θ.
                let m11 = bpq.norm_sqr();
                let m22 = h.norm_sqr();
                let m12 = (bpq * h.conj()).re;
                let tr = 0.5 * (m11 + m22);
                let det = m11 * m22 - m12 * m12;
                let lmin = tr - (tr * tr - det).max(0.0).sqrt();
                // eigenvector of the smallest eigenvalue
                let (ex, ey) = if m12.abs() > 1e-300 {
                    (m12, lmin - m11)
                } else if m11 <= m22 {
                    (1.0, 0.0)
                } else {
                    (0.0, 1.0)
                };
                let phi2 = ey.atan2(ex);
                let theta = 0.5 * phi2;
                let (s, c) = theta.sin_cos();
                // b ← Gᵗ b G with G the rotation in the (p, q) plane
                for k in 0..n {
                    let bkp = b[(k, p)];
                    let bkq = b[(k, q)];
                    b[(k, p)] = bkp * c - bkq * s;
                    b[(k, q)] = bkp * s + bkq * c;
                }
                for k in 0..n {
                    let bpk = b[(p, k)];
                    let bqk = b[(q, k)];
                    b[(p, k)] = bpk * c - bqk * s;
                    b[(q, k)] = bpk * s + bqk * c;
                }
                for k in 0..n {
                    let okp = o[(k, p)];
                    let okq = o[(k, q)];
                    o[(k, p)] = okp * c - okq * s;
                    o[(k, q)] = okp * s + okq * c;
                }
            }
        }
    }
}

/// Symmetric square root with determinant one: `A = O diag(e^{iφ/2}) Oᵗ`.
/// When `Σφ/2π` is odd, the largest phase (last one among ties) is moved
/// down by 2π before halving.
pub fn sqrt_symmetric(w: &SymmetricUnitary) -> Result<SymmetricUnitary> {
    sqrt_symmetric_raw(w.matrix(), UNITARY_TOL)
}

pub fn sqrt_symmetric_raw(w: &CMatrix, tol: f64) -> Result<SymmetricUnitary> {
    let Takagi { o, mut phi } = takagi_raw(w, tol)?;
    let turns = (phi.iter().sum::<f64>() / TAU).round() as i64;
    if turns.rem_euclid(2) == 1 {
        let mut top = 0;
        for k in 1..phi.len() {
            if phi[k] >= phi[top] {
                top = k;
            }
        }
        phi[top] -= TAU;
    }
    let half: Vec<f64> = phi.iter().map(|p| 0.5 * p).collect();
    let oc = o.map(|x| Complex64::new(x, 0.0));
    let a = &oc * diag_phases(&half) * oc.transpose();
    let a = (&a + a.transpose()) * Complex64::new(0.5, 0.0);
    Ok(SymmetricUnitary::from_raw(a))
}
