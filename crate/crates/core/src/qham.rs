// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! The space `M = (SU(n) × SU(n))^g × C_1 × … × C_l`, its group-valued
//! momentum map `μ = [a_1,b_1]⋯[a_g,b_g] c_1 ⋯ c_l`, the involution `β` on
//! genus-zero configurations, and witnesses of decomposability.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::transfer::transfer_to_symmetric;
use crate::unitary::{
    commutator, identity, project_su, svd_jacobi, spectrum_to_alcove, sqrt_symmetric, CMatrix, ConjClassSpec,
    SymmetricUnitary, UnitaryMatrix,
};

/// Tolerance for `spectrum(c_j) = λ_j` on configurations.
pub const CLASS_TOL: f64 = 1e-8;

/// Relative singular-value threshold deciding the kernel of the intertwiner
/// system.
pub const KERNEL_REL_TOL: f64 = 1e-8;

/// Rank, genus and puncture classes of a punctured surface group problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGroupData {
    pub n: usize,
    pub genus: usize,
    pub classes: Vec<ConjClassSpec>,
}

impl SurfaceGroupData {
    pub fn new(n: usize, genus: usize, classes: Vec<ConjClassSpec>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidData(format!("n must be at least 2, got {n}")));
        }
        if genus == 0 && classes.is_empty() {
            return Err(Error::InvalidData("genus 0 needs at least one class".into()));
        }
        if let Some(c) = classes.iter().find(|c| c.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: c.n() });
        }
        Ok(Self { n, genus, classes })
    }

    /// Genus-zero data from alcove coordinates.
    pub fn punctured_sphere(classes: Vec<Vec<f64>>) -> Result<Self> {
        let n = classes.first().map(Vec::len).unwrap_or(0);
        let classes = classes.into_iter().map(ConjClassSpec::from_coords).collect::<Result<Vec<_>>>()?;
        Self::new(n, 0, classes)
    }

    pub fn l(&self) -> usize {
        self.classes.len()
    }
}

/// A point `(a_1, b_1, …, a_g, b_g, c_1, …, c_l)` of `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigurationJson", into = "ConfigurationJson")]
pub struct Configuration {
    handles: Vec<UnitaryMatrix>,
    punctures: Vec<UnitaryMatrix>,
    data: SurfaceGroupData,
}

#[derive(Serialize, Deserialize)]
struct ConfigurationJson {
    n: usize,
    genus: usize,
    classes: Vec<ConjClassSpec>,
    handles: Vec<UnitaryMatrix>,
    punctures: Vec<UnitaryMatrix>,
}

impl TryFrom<ConfigurationJson> for Configuration {
    type Error = Error;
    fn try_from(j: ConfigurationJson) -> Result<Self> {
        let data = SurfaceGroupData::new(j.n, j.genus, j.classes)?;
        Configuration::new(data, j.handles, j.punctures)
    }
}

impl From<Configuration> for ConfigurationJson {
    fn from(c: Configuration) -> Self {
        ConfigurationJson {
            n: c.data.n,
            genus: c.data.genus,
            classes: c.data.classes,
            handles: c.handles,
            punctures: c.punctures,
        }
    }
}

impl Configuration {
    /// Validates shapes and class membership of every puncture.
    pub fn new(data: SurfaceGroupData, handles: Vec<UnitaryMatrix>, punctures: Vec<UnitaryMatrix>) -> Result<Self> {
        Self::with_class_tol(data, handles, punctures, CLASS_TOL)
    }

    pub fn with_class_tol(
        data: SurfaceGroupData,
        handles: Vec<UnitaryMatrix>,
        punctures: Vec<UnitaryMatrix>,
        tol: f64,
    ) -> Result<Self> {
        if handles.len() != 2 * data.genus {
            return Err(Error::DimensionMismatch { expected: 2 * data.genus, got: handles.len() });
        }
        if punctures.len() != data.l() {
            return Err(Error::DimensionMismatch { expected: data.l(), got: punctures.len() });
        }
        if let Some(m) = handles.iter().chain(&punctures).find(|m| m.n() != data.n) {
            return Err(Error::DimensionMismatch { expected: data.n, got: m.n() });
        }
        for (index, (c, spec)) in punctures.iter().zip(&data.classes).enumerate() {
            let got = spectrum_to_alcove(c)?;
            let deviation = got
                .coords()
                .iter()
                .zip(spec.lambda.coords())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if deviation > tol {
                return Err(Error::NotInClass { index, deviation });
            }
        }
        Ok(Self { handles, punctures, data })
    }

    /// Genus-zero configuration `(c_1, …, c_l)`.
    pub fn genus0(data: SurfaceGroupData, punctures: Vec<UnitaryMatrix>) -> Result<Self> {
        Self::new(data, Vec::new(), punctures)
    }

    /// Skips the class check; for matrices built as `k exp(λ) k⁻¹`.
    pub(crate) fn from_parts(data: SurfaceGroupData, handles: Vec<UnitaryMatrix>, punctures: Vec<UnitaryMatrix>) -> Self {
        Self { handles, punctures, data }
    }

    /// The diagonal configuration `(exp λ_1, …, exp λ_l)` (handles = identity).
    pub fn diagonal(data: &SurfaceGroupData) -> Self {
        let handles = vec![UnitaryMatrix::identity(data.n); 2 * data.genus];
        let punctures = data.classes.iter().map(ConjClassSpec::representative).collect();
        Self::from_parts(data.clone(), handles, punctures)
    }

    /// Independent Haar conjugates of the class representatives and Haar
    /// handles, from one stream.
    pub fn random<R: rand::Rng + ?Sized>(data: &SurfaceGroupData, rng: &mut R) -> Self {
        let n = data.n;
        let handles = (0..2 * data.genus).map(|_| crate::unitary::haar_su(n, rng)).collect();
        let punctures = data
            .classes
            .iter()
            .map(|c| crate::unitary::sample_class_with(c, rng))
            .collect();
        Self::from_parts(data.clone(), handles, punctures)
    }

    pub fn data(&self) -> &SurfaceGroupData {
        &self.data
    }

    pub fn handles(&self) -> &[UnitaryMatrix] {
        &self.handles
    }

    pub fn punctures(&self) -> &[UnitaryMatrix] {
        &self.punctures
    }

    pub fn n(&self) -> usize {
        self.data.n
    }

    /// Diagonal conjugation action `u · x`.
    pub fn act(&self, u: &UnitaryMatrix) -> Self {
        Self {
            handles: self.handles.iter().map(|m| m.conjugated_by(u)).collect(),
            punctures: self.punctures.iter().map(|m| m.conjugated_by(u)).collect(),
            data: self.data.clone(),
        }
    }

    /// Largest Frobenius distance between corresponding components.
    pub fn max_dist(&self, other: &Configuration) -> f64 {
        self.handles
            .iter()
            .chain(&self.punctures)
            .zip(other.handles.iter().chain(&other.punctures))
            .map(|(a, b)| a.dist(b))
            .fold(0.0, f64::max)
    }
}

/// `μ = [a_1, b_1] ⋯ [a_g, b_g] c_1 ⋯ c_l`.
pub fn moment(cfg: &Configuration) -> UnitaryMatrix {
    let n = cfg.n();
    let mut acc = UnitaryMatrix::identity(n);
    for pair in cfg.handles.chunks(2) {
        acc = &acc * &commutator(&pair[0], &pair[1]);
    }
    for c in &cfg.punctures {
        acc = &acc * c;
    }
    acc
}

/// `β` on raw puncture matrices: component `j` is
/// `τ⁻(P_j) τ⁻(c_j) τ(P_j)` with `P_j = c_{j+1} ⋯ c_l`.
pub fn beta_matrices(c: &[CMatrix]) -> Vec<CMatrix> {
    let l = c.len();
    let n = c.first().map(|m| m.nrows()).unwrap_or(0);
    let mut out = vec![CMatrix::zeros(n, n); l];
    let mut p = identity(n);
    for j in (0..l).rev() {
        out[j] = p.transpose() * c[j].transpose() * p.conjugate();
        p = &c[j] * p;
    }
    out
}

/// The involution `β` (genus 0 only).
pub fn beta(cfg: &Configuration) -> Result<Configuration> {
    if cfg.data.genus != 0 {
        return Err(Error::GenusUnsupported(cfg.data.genus));
    }
    let raw: Vec<CMatrix> = cfg.punctures.iter().map(|m| m.matrix().clone()).collect();
    let punctures = beta_matrices(&raw).into_iter().map(UnitaryMatrix::from_raw).collect();
    Ok(Configuration::from_parts(cfg.data.clone(), Vec::new(), punctures))
}

/// `max_j ‖β(c)_j − c_j‖_F`.
pub fn beta_defect(cfg: &Configuration) -> Result<f64> {
    Ok(beta(cfg)?.max_dist(cfg))
}

/// Finds `φ ∈ Fix(τ⁻)` with `β(c) = φ · c`, i.e. `β(c)_j φ = φ c_j` for all
/// `j`.
pub fn twist_witness(cfg: &Configuration, tol: f64) -> Result<SymmetricUnitary> {
    twist_witness_with(cfg, tol, KERNEL_REL_TOL)
}

pub fn twist_witness_with(cfg: &Configuration, tol: f64, kernel_rel_tol: f64) -> Result<SymmetricUnitary> {
    let n = cfg.n();
    let b = beta(cfg)?;
    let id = identity(n);
    if intertwine_residual(b.punctures(), cfg.punctures(), &id) <= tol {
        return Ok(SymmetricUnitary::identity(n));
    }

    // vec(Bφ − φc) = (I ⊗ B − cᵗ ⊗ I) vec φ, column-major vec
    let l = cfg.punctures.len();
    let nn = n * n;
    let mut system = CMatrix::zeros(l * nn, nn);
    for (j, (bj, cj)) in b.punctures().iter().zip(cfg.punctures()).enumerate() {
        let block = id.kronecker(bj.matrix()) - cj.matrix().transpose().kronecker(&id);
        system.view_mut((j * nn, 0), (nn, nn)).copy_from(&block);
    }
    let kernel = null_space(&system, kernel_rel_tol, 0.0);
    if kernel.is_empty() {
        return Err(Error::NoWitness { tol });
    }
    let mats: Vec<CMatrix> = kernel.iter().map(|v| CMatrix::from_column_slice(n, n, v.as_slice())).collect();

    // symmetric elements of the kernel
    let mut antisym = CMatrix::zeros(nn, mats.len());
    for (k, m) in mats.iter().enumerate() {
        let d = m - m.transpose();
        antisym.set_column(k, &DVector::from_column_slice(d.as_slice()));
    }
    let coeffs = null_space(&antisym, 0.0, kernel_rel_tol);
    if coeffs.is_empty() {
        return Err(Error::NoWitness { tol });
    }
    let sym_basis: Vec<CMatrix> = coeffs
        .iter()
        .map(|x| {
            mats.iter().zip(x.iter()).fold(CMatrix::zeros(n, n), |acc, (m, &c)| acc + m * c)
        })
        .collect();

    let mut rng = rng::stream(0, Purpose::Misc, 0);
    let mut candidates = sym_basis.clone();
    for _ in 0..4 {
        let combo = sym_basis.iter().fold(CMatrix::zeros(n, n), |acc, m| {
            acc + m * Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        candidates.push(combo);
    }
    for cand in candidates {
        let s = (&cand + cand.transpose()) * Complex64::new(0.5, 0.0);
        if s.norm() < 1e-300 {
            continue;
        }
        let phi = project_su(&s);
        let phi = (&phi + phi.transpose()) * Complex64::new(0.5, 0.0);
        let sym = (&phi - phi.transpose()).norm();
        let res = intertwine_residual(b.punctures(), cfg.punctures(), &phi);
        let unit = (phi.adjoint() * &phi - &id).norm();
        if res <= tol && sym <= tol && unit <= tol {
            return Ok(SymmetricUnitary::from_raw(phi));
        }
    }
    Err(Error::NoWitness { tol })
}

fn intertwine_residual(b: &[UnitaryMatrix], c: &[UnitaryMatrix], phi: &CMatrix) -> f64 {
    b.iter()
        .zip(c)
        .map(|(bj, cj)| (bj.matrix() * phi - phi * cj.matrix()).norm())
        .fold(0.0, f64::max)
}

/// Orthonormal basis of the numerical kernel of `a`: right singular vectors
/// with `σ ≤ max(rel · σ_max, abs)`.
fn null_space(a: &CMatrix, rel: f64, abs: f64) -> Vec<DVector<Complex64>> {
    let svd = svd_jacobi(a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let thresh = (rel * smax).max(abs);
    (0..a.ncols()).filter(|&k| svd.s[k] <= thresh).map(|k| svd.v.column(k).into_owned()).collect()
}

/// Symmetric `w_1, …, w_l` with `c_j = w_j w_{j+1}⁻¹` (cyclically), for a
/// configuration in the fiber over the identity.
///
/// Beta-fixed configurations go through the square-root recursion
/// directly. Otherwise a twist `φ` is found, `ψ = √φ` makes `ψ c ψ⁻¹`
/// beta-fixed, and the resulting chain is conjugated back.
pub fn decompose_witness(cfg: &Configuration, tol: f64) -> Result<Vec<SymmetricUnitary>> {
    if cfg.data.genus != 0 {
        return Err(Error::GenusUnsupported(cfg.data.genus));
    }
    let n = cfg.n();
    let mu_defect = (moment(cfg).matrix() - identity(n)).norm();
    if mu_defect > tol {
        return Err(Error::NotInFiber(mu_defect));
    }

    let chain = if beta_defect(cfg)? <= tol {
        fixed_chain(cfg.punctures(), tol)?
    } else {
        let phi = twist_witness(cfg, tol)?;
        let psi = sqrt_symmetric(&phi)?;
        let psi_inv = psi.matrix().adjoint();
        let shifted: Vec<UnitaryMatrix> =
            cfg.punctures.iter().map(|c| c.conjugated_by(psi.unitary())).collect();
        let inner = fixed_chain(&shifted, tol.max(1e-10)).map_err(|_| Error::NoWitness { tol })?;
        inner
            .iter()
            .map(|w| {
                let m = &psi_inv * w.matrix() * &psi_inv;
                SymmetricUnitary::from_raw((&m + m.transpose()) * Complex64::new(0.5, 0.0))
            })
            .collect()
    };

    let res = chain_residual(cfg.punctures(), &chain);
    if res > tol {
        return Err(Error::NoWitness { tol });
    }
    Ok(chain)
}

/// `max_j ‖c_j − w_j w_{j+1}⁻¹‖` with `w_{l+1} = w_1`.
pub fn chain_residual(c: &[UnitaryMatrix], w: &[SymmetricUnitary]) -> f64 {
    let l = w.len();
    (0..l)
        .map(|j| {
            let next = &w[(j + 1) % l];
            (c[j].matrix() - w[j].matrix() * next.matrix().adjoint()).norm()
        })
        .fold(0.0, f64::max)
}

/// `w_j = B_jᵗ B_j` with `B_j = A_j ⋯ A_l` from the square-root recursion.
fn fixed_chain(c: &[UnitaryMatrix], tol: f64) -> Result<Vec<SymmetricUnitary>> {
    let a = transfer_to_symmetric(c, tol)?;
    let l = a.len();
    let n = c[0].n();
    let mut out = vec![SymmetricUnitary::identity(n); l];
    let mut suffix = identity(n);
    for j in (0..l).rev() {
        suffix = a[j].matrix() * &suffix;
        let w = suffix.transpose() * &suffix;
        out[j] = SymmetricUnitary::from_raw((&w + w.transpose()) * Complex64::new(0.5, 0.0));
    }
    Ok(out)
}
