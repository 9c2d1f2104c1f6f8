// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Feasibility solvers for momentum fibers.
//!
//! A configuration is parametrized by free handles `a_i, b_i` and by
//! conjugators `k_j` with `c_j = k_j exp(λ_j) k_j⁻¹`, so every iterate stays
//! in the prescribed classes. Each variable moves by left translation
//! `X ← exp(H) X` with `H ∈ su(n)`. The objective is a sum of squared
//! Frobenius norms of matrix words:
//!
//! ```text
//! f = ‖μ(x) − exp(t)‖²                      (solve_fiber)
//! f = ‖μ(x) − exp(t)‖² + Σ_j ‖β(x)_j − c_j‖²  (solve_fiber_symmetric)
//! ```
//!
//! The Jacobian of the stacked residual is assembled analytically from the
//! words; steps are Levenberg–Marquardt (damping `‖r‖²`) or plain gradient
//! steps, both with Armijo backtracking.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alcove::AlcovePoint;
use crate::error::{Error, Result};
use crate::qham::{beta, moment, Configuration, SurfaceGroupData};
use crate::rng::{self, Purpose};
use crate::unitary::{exp_alcove, expm_skew, haar_su, project_su, unitary_eigen, CMatrix, UnitaryMatrix};

pub use crate::transfer::{transfer_from_symmetric, transfer_to_symmetric};

const ARMIJO: f64 = 1e-4;
const STEP_FLOOR: f64 = 1e-12;
/// Iterates polish down to `residual_tol · POLISH` before stopping.
const POLISH: f64 = 1e-3;
const STALL_WINDOW: usize = 50;
const REUNITARIZE_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Descent {
    /// Levenberg–Marquardt direction `−(JᵀJ + ‖r‖² I)⁻¹ Jᵀ r`.
    #[default]
    GaussNewton,
    /// Steepest descent `−∇f`.
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub restarts: usize,
    pub step_init: f64,
    pub grad_tol: f64,
    pub residual_tol: f64,
    pub seed: u64,
    #[serde(default)]
    pub descent: Descent,
    /// Restarts run in parallel batches of this size.
    #[serde(default = "one")]
    pub jobs: usize,
    /// Keep the accepted objective values of the reported restart.
    #[serde(default)]
    pub record_history: bool,
}

fn one() -> usize {
    1
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            restarts: 8,
            step_init: 1.0,
            grad_tol: 1e-13,
            residual_tol: 1e-8,
            seed: 0,
            descent: Descent::GaussNewton,
            jobs: 1,
            record_history: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOptions(m.to_string()));
        if self.max_iters == 0 || self.restarts == 0 || self.jobs == 0 {
            return bad("max_iters, restarts and jobs must be positive");
        }
        if !(self.step_init > 0.0) || !(self.grad_tol > 0.0) {
            return bad("step_init and grad_tol must be positive");
        }
        if !(self.residual_tol > 0.0 && self.residual_tol < 1.0) {
            return bad("residual_tol must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    NonConvergent,
}

/// Outcome of a fiber solve. `NonConvergent` is the absence of a
/// certificate, not a proof of infeasibility.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Configuration>,
    /// `sqrt(f)` at the reported iterate.
    pub residual: f64,
    /// `‖μ − exp(t)‖_F`.
    pub momentum_residual: f64,
    /// `max_j ‖β(x)_j − c_j‖_F` for symmetric solves.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_residual: Option<f64>,
    pub iterations: usize,
    pub restarts_used: usize,
    /// Index of the reported restart.
    pub restart: usize,
    pub residual_tol: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

impl FeasibilityReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Id,
    Adj,
    Trans,
    Conj,
}

#[derive(Debug, Clone)]
enum Factor {
    Var(usize, Op),
    Const(CMatrix),
}

type Word = Vec<Factor>;

/// `Σ sign · word`, contributing `‖·‖²` to the objective.
#[derive(Debug, Clone)]
struct Term {
    parts: Vec<(f64, Word)>,
}

/// Which objective a problem minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Fiber,
    SymmetricFiber,
}

/// Residual words over the variables `(a_1, b_1, …, a_g, b_g, k_1, …, k_l)`.
#[derive(Debug, Clone)]
pub struct Problem {
    data: SurfaceGroupData,
    objective: Objective,
    n: usize,
    nvars: usize,
    diag: Vec<CMatrix>,
    terms: Vec<Term>,
    basis: Vec<CMatrix>,
}

/// Orthonormal basis of `su(n)` for `⟨A, B⟩ = Re tr(A†B)`.
pub fn su_basis(n: usize) -> Vec<CMatrix> {
    let i = Complex64::new(0.0, 1.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n - 1);
    for p in 0..n {
        for q in (p + 1)..n {
            let mut re = CMatrix::zeros(n, n);
            re[(p, q)] = Complex64::new(s, 0.0);
            re[(q, p)] = Complex64::new(-s, 0.0);
            out.push(re);
            let mut im = CMatrix::zeros(n, n);
            im[(p, q)] = i * s;
            im[(q, p)] = i * s;
            out.push(im);
        }
    }
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut d = CMatrix::zeros(n, n);
        for m in 0..k {
            d[(m, m)] = i / norm;
        }
        d[(k, k)] = -i * (k as f64) / norm;
        out.push(d);
    }
    out
}

impl Problem {
    pub fn new(data: &SurfaceGroupData, target: &AlcovePoint, objective: Objective) -> Result<Self> {
        if target.n() != data.n {
            return Err(Error::DimensionMismatch { expected: data.n, got: target.n() });
        }
        if objective == Objective::SymmetricFiber && data.genus != 0 {
            return Err(Error::GenusUnsupported(data.genus));
        }
        let n = data.n;
        let g = data.genus;
        let l = data.l();
        let diag: Vec<CMatrix> = data.classes.iter().map(|c| c.representative().into_matrix()).collect();
        let kv = |j: usize| 2 * g + j;

        let mut mu: Word = Vec::new();
        for h in 0..g {
            let (a, b) = (2 * h, 2 * h + 1);
            mu.extend([Factor::Var(a, Op::Id), Factor::Var(b, Op::Id), Factor::Var(a, Op::Adj), Factor::Var(b, Op::Adj)]);
        }
        for (j, d) in diag.iter().enumerate() {
            mu.extend([Factor::Var(kv(j), Op::Id), Factor::Const(d.clone()), Factor::Var(kv(j), Op::Adj)]);
        }
        let target_m = exp_alcove(target);
        let mut terms = vec![Term { parts: vec![(1.0, mu), (-1.0, vec![Factor::Const(target_m)])] }];

        if objective == Objective::SymmetricFiber {
            // cᵗ = k̄ D kᵗ and c̄ = k̄ D̄ kᵗ
            let c_trans = |m: usize| {
                vec![Factor::Var(kv(m), Op::Conj), Factor::Const(diag[m].clone()), Factor::Var(kv(m), Op::Trans)]
            };
            let c_conj = |m: usize| {
                vec![
                    Factor::Var(kv(m), Op::Conj),
                    Factor::Const(diag[m].conjugate()),
                    Factor::Var(kv(m), Op::Trans),
                ]
            };
            #[allow(clippy::needless_range_loop)]
            for j in 0..l {
                // β_j = c_lᵗ ⋯ c_{j+1}ᵗ · c_jᵗ · c̄_{j+1} ⋯ c̄_l
                let mut word: Word = Vec::new();
                for m in ((j + 1)..l).rev() {
                    word.extend(c_trans(m));
                }
                word.extend(c_trans(j));
                for m in (j + 1)..l {
                    word.extend(c_conj(m));
                }
                let cj =
                    vec![Factor::Var(kv(j), Op::Id), Factor::Const(diag[j].clone()), Factor::Var(kv(j), Op::Adj)];
                terms.push(Term { parts: vec![(1.0, word), (-1.0, cj)] });
            }
        }

        Ok(Self {
            data: data.clone(),
            objective,
            n,
            nvars: 2 * g + l,
            diag,
            terms,
            basis: su_basis(n),
        })
    }

    /// Number of real parameters of a tangent direction.
    pub fn dim(&self) -> usize {
        self.nvars * (self.n * self.n - 1)
    }

    fn factor(&self, f: &Factor, x: &[CMatrix]) -> CMatrix {
        match f {
            Factor::Const(m) => m.clone(),
            Factor::Var(v, op) => match op {
                Op::Id => x[*v].clone(),
                Op::Adj => x[*v].adjoint(),
                Op::Trans => x[*v].transpose(),
                Op::Conj => x[*v].conjugate(),
            },
        }
    }

    fn term_value(&self, t: &Term, x: &[CMatrix]) -> CMatrix {
        let mut g = CMatrix::zeros(self.n, self.n);
        for (s, w) in &t.parts {
            let mut acc = CMatrix::identity(self.n, self.n);
            for f in w {
                acc *= self.factor(f, x);
            }
            g += acc * Complex64::new(*s, 0.0);
        }
        g
    }

    pub fn objective_value(&self, x: &[CMatrix]) -> f64 {
        self.terms.iter().map(|t| self.term_value(t, x).norm_squared()).sum()
    }

    fn term_values(&self, x: &[CMatrix]) -> Vec<CMatrix> {
        self.terms.iter().map(|t| self.term_value(t, x)).collect()
    }

    /// Stacked residual `r` (real and imaginary parts of each term) and its
    /// Jacobian with respect to the `su(n)` coordinates of every variable.
    pub fn jacobian(&self, x: &[CMatrix]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let nn = n * n;
        let nb = self.basis.len();
        let rows = self.terms.len() * 2 * nn;
        let mut r = DVector::zeros(rows);
        let mut jac = DMatrix::zeros(rows, self.dim());

        for (ti, t) in self.terms.iter().enumerate() {
            let off = ti * 2 * nn;
            let g = self.term_value(t, x);
            for (k, z) in g.iter().enumerate() {
                r[off + k] = z.re;
                r[off + nn + k] = z.im;
            }
            for (s, w) in &t.parts {
                let vals: Vec<CMatrix> = w.iter().map(|f| self.factor(f, x)).collect();
                let len = vals.len();
                let mut prefix = Vec::with_capacity(len + 1);
                prefix.push(CMatrix::identity(n, n));
                for v in &vals {
                    let next = prefix.last().unwrap() * v;
                    prefix.push(next);
                }
                let mut suffix = vec![CMatrix::identity(n, n); len + 1];
                for p in (0..len).rev() {
                    suffix[p] = &vals[p] * &suffix[p + 1];
                }
                for (p, f) in w.iter().enumerate() {
                    let Factor::Var(v, op) = f else { continue };
                    let xv = &x[*v];
                    let (left, right) = (&prefix[p], &suffix[p + 1]);
                    for (a, h) in self.basis.iter().enumerate() {
                        let df = match op {
                            Op::Id => h * xv,
                            Op::Adj => -(xv.adjoint() * h),
                            Op::Trans => xv.transpose() * h.transpose(),
                            Op::Conj => h.conjugate() * xv.conjugate(),
                        };
                        let d = left * df * right;
                        let col = v * nb + a;
                        for (k, z) in d.iter().enumerate() {
                            jac[(off + k, col)] += s * z.re;
                            jac[(off + nn + k, col)] += s * z.im;
                        }
                    }
                }
            }
        }
        (r, jac)
    }

    /// `∇f = 2 Jᵀ r` in `su(n)` coordinates.
    pub fn gradient(&self, x: &[CMatrix]) -> DVector<f64> {
        let (r, j) = self.jacobian(x);
        j.transpose() * r * 2.0
    }

    /// `X_v ← exp(Σ_a δ_{v,a} E_a) X_v`.
    pub fn retract(&self, x: &[CMatrix], delta: &DVector<f64>) -> Vec<CMatrix> {
        let nb = self.basis.len();
        x.iter()
            .enumerate()
            .map(|(v, xv)| {
                let mut h = CMatrix::zeros(self.n, self.n);
                for (a, e) in self.basis.iter().enumerate() {
                    let c = delta[v * nb + a];
                    if c != 0.0 {
                        h += e * Complex64::new(c, 0.0);
                    }
                }
                expm_skew(&h) * xv
            })
            .collect()
    }

    pub fn random_point<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<CMatrix> {
        (0..self.nvars).map(|_| haar_su(self.n, rng).into_matrix()).collect()
    }

    /// Variables reproducing `cfg`: handles verbatim, and conjugators `k_j`
    /// with `k_j exp(λ_j) k_j⁻¹ = c_j` from the eigenvectors of `c_j`.
    pub fn lift(&self, cfg: &Configuration) -> Result<Vec<CMatrix>> {
        let mut x: Vec<CMatrix> = cfg.handles().iter().map(|h| h.matrix().clone()).collect();
        for (c, d) in cfg.punctures().iter().zip(&self.diag) {
            x.push(conjugator(c.matrix(), d)?);
        }
        Ok(x)
    }

    /// Configuration for the variables `x`.
    pub fn configuration(&self, x: &[CMatrix]) -> Configuration {
        let g = self.data.genus;
        let handles = x[..2 * g].iter().map(|m| UnitaryMatrix::from_raw(m.clone())).collect();
        let punctures = x[2 * g..]
            .iter()
            .zip(&self.diag)
            .map(|(k, d)| UnitaryMatrix::from_raw(k * d * k.adjoint()))
            .collect();
        Configuration::from_parts(self.data.clone(), handles, punctures)
    }

    fn momentum_residual(&self, x: &[CMatrix]) -> f64 {
        self.term_values(x)[0].norm()
    }

    fn beta_residual(&self, x: &[CMatrix]) -> Option<f64> {
        (self.objective == Objective::SymmetricFiber)
            .then(|| self.term_values(x)[1..].iter().map(|g| g.norm()).fold(0.0, f64::max))
    }
}

/// `k ∈ SU(n)` with `k d k⁻¹ = c` for diagonal `d` conjugate to `c`.
fn conjugator(c: &CMatrix, d: &CMatrix) -> Result<CMatrix> {
    let n = c.nrows();
    let (vals, q) = unitary_eigen(c)?;
    let mut used = vec![false; n];
    let mut k = CMatrix::zeros(n, n);
    for i in 0..n {
        let target = d[(i, i)];
        let best = (0..n)
            .filter(|&m| !used[m])
            .min_by(|&a, &b| (vals[a] - target).norm().total_cmp(&(vals[b] - target).norm()))
            .expect("as many eigenvalues as diagonal entries");
        used[best] = true;
        k.set_column(i, &q.column(best));
    }
    let det = k.determinant();
    let fix = Complex64::from_polar(1.0, -det.arg());
    for r in 0..n {
        k[(r, 0)] *= fix;
    }
    Ok(k)
}

struct RestartOutcome {
    x: Vec<CMatrix>,
    f: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn descend(problem: &Problem, mut x: Vec<CMatrix>, opts: &SolveOptions) -> RestartOutcome {
    let stop_f = (opts.residual_tol * POLISH).powi(2);
    let mut f = problem.objective_value(&x);
    let mut history = if opts.record_history { vec![f] } else { Vec::new() };
    let mut recent: Vec<f64> = Vec::new();
    let mut step = opts.step_init;
    let mut iterations = 0;

    while iterations < opts.max_iters && f > stop_f {
        let (r, jac) = problem.jacobian(&x);
        let jt_r = jac.transpose() * &r;
        let grad = &jt_r * 2.0;
        if grad.norm() <= opts.grad_tol {
            break;
        }
        let dir = match opts.descent {
            Descent::GaussNewton => {
                let mut normal = jac.transpose() * &jac;
                let scale = normal.diagonal().max().max(1.0);
                let damping = f.max(1e-14 * scale);
                for k in 0..normal.nrows() {
                    normal[(k, k)] += damping;
                }
                match normal.cholesky() {
                    Some(ch) => -ch.solve(&jt_r),
                    None => -grad.clone(),
                }
            }
            Descent::Gradient => -grad.clone(),
        };
        let slope = grad.dot(&dir);
        if !(slope < 0.0) {
            break;
        }
        let mut t = match opts.descent {
            Descent::GaussNewton => opts.step_init,
            Descent::Gradient => (2.0 * step).min(opts.step_init),
        };
        let mut accepted = None;
        while t >= STEP_FLOOR {
            let trial = problem.retract(&x, &(&dir * t));
            let ft = problem.objective_value(&trial);
            if ft <= f + ARMIJO * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = accepted else { break };
        iterations += 1;
        step = t;
        x = next;
        f = fnext;
        if iterations % REUNITARIZE_EVERY == 0 {
            x = x.iter().map(project_su).collect();
            f = problem.objective_value(&x);
        }
        if opts.record_history {
            history.push(f);
        }
        recent.push(f);
        if recent.len() > STALL_WINDOW {
            let old = recent[recent.len() - 1 - STALL_WINDOW];
            if old - f <= 1e-12 * old {
                break;
            }
        }
    }
    RestartOutcome { x, f, iterations, history }
}

/// Multi-restart minimization. Restarts run in batches of `opts.jobs`; the
/// lowest-index restart that converges is reported, otherwise the one with
/// the smallest objective (ties to the lowest index).
pub fn solve(problem: &Problem, opts: &SolveOptions) -> Result<FeasibilityReport> {
    opts.validate()?;
    let tol2 = opts.residual_tol * opts.residual_tol;
    let mut best: Option<(usize, RestartOutcome)> = None;
    let mut start = 0;
    while start < opts.restarts {
        let end = (start + opts.jobs).min(opts.restarts);
        let run = |r: usize| {
            let mut rng = rng::stream(opts.seed, Purpose::Restart, r as u64);
            let x0 = problem.random_point(&mut rng);
            (r, descend(problem, x0, opts))
        };
        let batch: Vec<(usize, RestartOutcome)> = if opts.jobs > 1 {
            (start..end).into_par_iter().map(run).collect()
        } else {
            (start..end).map(run).collect()
        };
        for (r, out) in batch {
            let better = match &best {
                None => true,
                Some((_, b)) => {
                    let b_conv = b.f < tol2;
                    let o_conv = out.f < tol2;
                    if b_conv {
                        false
                    } else {
                        o_conv || out.f < b.f
                    }
                }
            };
            if better {
                best = Some((r, out));
            }
        }
        if best.as_ref().is_some_and(|(_, b)| b.f < tol2) {
            break;
        }
        start = end;
    }
    let (r, out) = best.expect("at least one restart");
    Ok(report(problem, r, out, opts))
}

fn report(problem: &Problem, restart: usize, out: RestartOutcome, opts: &SolveOptions) -> FeasibilityReport {
    let converged = out.f < opts.residual_tol * opts.residual_tol;
    FeasibilityReport {
        status: if converged { Status::Converged } else { Status::NonConvergent },
        witness: converged.then(|| problem.configuration(&out.x)),
        residual: out.f.sqrt(),
        momentum_residual: problem.momentum_residual(&out.x),
        beta_residual: problem.beta_residual(&out.x),
        iterations: out.iterations,
        restart,
        // independent of batching: every restart ran unless one converged
        restarts_used: if converged { restart + 1 } else { opts.restarts },
        residual_tol: opts.residual_tol,
        history: out.history,
    }
}

/// Searches `μ⁻¹(exp t)`.
pub fn solve_fiber(data: &SurfaceGroupData, target: &AlcovePoint, opts: &SolveOptions) -> Result<FeasibilityReport> {
    solve(&Problem::new(data, target, Objective::Fiber)?, opts)
}

/// Searches `μ⁻¹(exp t) ∩ Fix(β)` (genus 0).
pub fn solve_fiber_symmetric(
    data: &SurfaceGroupData,
    target: &AlcovePoint,
    opts: &SolveOptions,
) -> Result<FeasibilityReport> {
    solve(&Problem::new(data, target, Objective::SymmetricFiber)?, opts)
}

/// Largest relative discrepancy between the analytic directional derivative
/// of the fiber objective and a central finite difference, over a few random
/// unit directions (seeded).
pub fn gradient_check(data: &SurfaceGroupData, target: &AlcovePoint, cfg: &Configuration, eps: f64) -> Result<f64> {
    gradient_check_with(data, target, cfg, eps, Objective::Fiber, 0)
}

pub fn gradient_check_with(
    data: &SurfaceGroupData,
    target: &AlcovePoint,
    cfg: &Configuration,
    eps: f64,
    objective: Objective,
    seed: u64,
) -> Result<f64> {
    if !(eps > 1e-8 && eps < 1e-3) {
        return Err(Error::InvalidOptions(format!("eps = {eps} outside (1e-8, 1e-3)")));
    }
    let problem = Problem::new(data, target, objective)?;
    let x = problem.lift(cfg)?;
    let grad = problem.gradient(&x);
    let scale = grad.norm().max(1.0);
    let mut rng = rng::stream(seed, Purpose::Directions, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..6 {
        let mut h = DVector::from_fn(problem.dim(), |_, _| rng.random_range(-1.0..1.0));
        let norm = h.norm();
        h /= norm;
        let fp = problem.objective_value(&problem.retract(&x, &(&h * eps)));
        let fm = problem.objective_value(&problem.retract(&x, &(&h * -eps)));
        let fd = (fp - fm) / (2.0 * eps);
        worst = worst.max((fd - grad.dot(&h)).abs() / scale);
    }
    Ok(worst)
}

/// Momentum and beta residuals of an arbitrary configuration against a
/// target.
pub fn residuals(cfg: &Configuration, target: &AlcovePoint) -> Result<(f64, Option<f64>)> {
    let mu = (moment(cfg).matrix() - exp_alcove(target)).norm();
    let b = if cfg.data().genus == 0 { Some(beta(cfg)?.max_dist(cfg)) } else { None };
    Ok((mu, b))
}
