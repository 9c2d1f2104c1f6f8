// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Python bindings for `qhconvex`.
//!
//! Matrices cross the boundary as lists of rows of Python `complex`; reports
//! come back as plain dicts.

use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qhconvex::alcove::{self, AlcovePoint as CoreAlcovePoint};
use qhconvex::polytope::{self, AlcoveCloud};
use qhconvex::qham::{self, Configuration as CoreConfiguration, SurfaceGroupData as CoreData};
use qhconvex::solver::{self, Descent, SolveOptions};
use qhconvex::unitary::{self, CMatrix};
use qhconvex::{rng, ConjClassSpec, SymmetricUnitary, UnitaryMatrix};

type Rows = Vec<Vec<Complex64>>;

fn err(e: qhconvex::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {}", e.kind(), e))
}

fn to_py_json<T: serde::Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn rows(m: &CMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn matrix(r: &Rows) -> PyResult<CMatrix> {
    let n = r.len();
    if n == 0 || r.iter().any(|row| row.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| r[i][j]))
}

fn unitary(r: &Rows, tol: f64) -> PyResult<UnitaryMatrix> {
    UnitaryMatrix::with_tol(matrix(r)?, tol).map_err(err)
}

#[pyclass(name = "AlcovePoint", module = "qhconvex_py", from_py_object)]
#[derive(Clone)]
struct AlcovePoint {
    inner: CoreAlcovePoint,
}

#[pymethods]
impl AlcovePoint {
    #[new]
    #[pyo3(signature = (coords, tol = 1e-9))]
    fn new(coords: Vec<f64>, tol: f64) -> PyResult<Self> {
        Ok(Self { inner: CoreAlcovePoint::new(coords, tol).map_err(err)? })
    }

    #[getter]
    fn coords(&self) -> Vec<f64> {
        self.inner.coords().to_vec()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn distance(&self, other: &AlcovePoint) -> f64 {
        self.inner.distance(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!("AlcovePoint({:?})", self.inner.coords())
    }
}

#[pyclass(name = "SurfaceGroupData", module = "qhconvex_py", from_py_object)]
#[derive(Clone)]
struct SurfaceGroupData {
    inner: CoreData,
}

#[pymethods]
impl SurfaceGroupData {
    #[new]
    #[pyo3(signature = (n, classes, genus = 0))]
    fn new(n: usize, classes: Vec<Vec<f64>>, genus: usize) -> PyResult<Self> {
        let classes = classes.into_iter().map(ConjClassSpec::from_coords).collect::<Result<Vec<_>, _>>().map_err(err)?;
        Ok(Self { inner: CoreData::new(n, genus, classes).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn genus(&self) -> usize {
        self.inner.genus
    }

    #[getter]
    fn classes(&self) -> Vec<Vec<f64>> {
        self.inner.classes.iter().map(|c| c.lambda.coords().to_vec()).collect()
    }

    fn __repr__(&self) -> String {
        format!("SurfaceGroupData(n={}, genus={}, classes={:?})", self.inner.n, self.inner.genus, self.classes())
    }
}

#[pyclass(name = "Configuration", module = "qhconvex_py", from_py_object)]
#[derive(Clone)]
struct Configuration {
    inner: CoreConfiguration,
}

#[pymethods]
impl Configuration {
    #[new]
    #[pyo3(signature = (data, punctures, handles = Vec::new(), class_tol = 1e-8))]
    fn new(data: &SurfaceGroupData, punctures: Vec<Rows>, handles: Vec<Rows>, class_tol: f64) -> PyResult<Self> {
        let u = |ms: Vec<Rows>| ms.iter().map(|m| unitary(m, 1e-8)).collect::<PyResult<Vec<_>>>();
        let cfg = CoreConfiguration::with_class_tol(data.inner.clone(), u(handles)?, u(punctures)?, class_tol)
            .map_err(err)?;
        Ok(Self { inner: cfg })
    }

    #[staticmethod]
    #[pyo3(signature = (data, seed = 0))]
    fn random(data: &SurfaceGroupData, seed: u64) -> Self {
        Self { inner: CoreConfiguration::random(&data.inner, &mut rng::from_seed(seed)) }
    }

    #[staticmethod]
    fn diagonal(data: &SurfaceGroupData) -> Self {
        Self { inner: CoreConfiguration::diagonal(&data.inner) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn handles(&self) -> Vec<Rows> {
        self.inner.handles().iter().map(|u| rows(u.matrix())).collect()
    }

    #[getter]
    fn punctures(&self) -> Vec<Rows> {
        self.inner.punctures().iter().map(|u| rows(u.matrix())).collect()
    }

    fn moment(&self) -> Rows {
        rows(qham::moment(&self.inner).matrix())
    }

    fn beta(&self) -> PyResult<Self> {
        Ok(Self { inner: qham::beta(&self.inner).map_err(err)? })
    }

    fn beta_defect(&self) -> PyResult<f64> {
        qham::beta_defect(&self.inner).map_err(err)
    }

    /// Symmetric `w_j` with `c_j = w_j w_{j+1}⁻¹`, or a `NoWitness` error.
    #[pyo3(signature = (tol = 1e-8))]
    fn decompose(&self, tol: f64) -> PyResult<Vec<Rows>> {
        let w = qham::decompose_witness(&self.inner, tol).map_err(err)?;
        Ok(w.iter().map(|s| rows(s.matrix())).collect())
    }
}

#[pyfunction]
#[pyo3(signature = (coords, tol = 1e-8))]
fn classify(py: Python<'_>, coords: Vec<f64>, tol: f64) -> PyResult<Py<PyAny>> {
    let x = CoreAlcovePoint::new(coords, 1e-9).map_err(err)?;
    let sig = alcove::classify(&x, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("signature", to_py_json(py, &sig)?)?;
    d.set_item("stabilizer_dim", alcove::stabilizer_dim(&sig, x.n()))?;
    d.set_item("orbit_dim", alcove::orbit_dim(&sig, x.n()))?;
    Ok(d.into_any().unbind())
}

#[pyfunction]
#[pyo3(signature = (phases, tol = 1e-9))]
fn alcove_project(phases: Vec<f64>, tol: f64) -> PyResult<AlcovePoint> {
    Ok(AlcovePoint { inner: alcove::alcove_project(&phases, tol).map_err(err)? })
}

/// Alcove point of the conjugacy class of a special unitary matrix.
#[pyfunction]
fn spectrum(m: Rows) -> PyResult<AlcovePoint> {
    let u = unitary(&m, 1e-8)?;
    Ok(AlcovePoint { inner: unitary::spectrum_to_alcove(&u).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (n, seed = 0))]
fn haar_su(n: usize, seed: u64) -> Rows {
    rows(unitary::haar_su(n, &mut rng::from_seed(seed)).matrix())
}

#[pyfunction]
#[pyo3(signature = (coords, seed = 0))]
fn sample_class(coords: Vec<f64>, seed: u64) -> PyResult<Rows> {
    let spec = ConjClassSpec::from_coords(coords).map_err(err)?;
    Ok(rows(unitary::sample_class(&spec, seed).matrix()))
}

/// `(O, phi)` with `w = O diag(e^{i phi}) Oᵗ` and `O` real orthogonal.
#[pyfunction]
fn takagi(w: Rows) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let s = SymmetricUnitary::new(unitary(&w, 1e-8)?).map_err(err)?;
    let t = unitary::takagi(&s).map_err(err)?;
    let o = (0..t.o.nrows()).map(|i| (0..t.o.ncols()).map(|j| t.o[(i, j)]).collect()).collect();
    Ok((o, t.phi))
}

#[pyfunction]
fn sqrt_symmetric(w: Rows) -> PyResult<Rows> {
    let s = SymmetricUnitary::new(unitary(&w, 1e-8)?).map_err(err)?;
    Ok(rows(unitary::sqrt_symmetric(&s).map_err(err)?.matrix()))
}

#[pyfunction]
fn transfer_from_symmetric(a: Vec<Rows>) -> PyResult<Vec<Rows>> {
    let a = a.iter().map(|m| unitary(m, 1e-8)).collect::<PyResult<Vec<_>>>()?;
    Ok(solver::transfer_from_symmetric(&a).iter().map(|u| rows(u.matrix())).collect())
}

#[pyfunction]
#[pyo3(signature = (w, tol = 1e-8))]
fn transfer_to_symmetric(w: Vec<Rows>, tol: f64) -> PyResult<Vec<Rows>> {
    let w = w.iter().map(|m| unitary(m, 1e-8)).collect::<PyResult<Vec<_>>>()?;
    let a = solver::transfer_to_symmetric(&w, tol).map_err(err)?;
    Ok(a.iter().map(|u| rows(u.matrix())).collect())
}

fn options(seed: u64, restarts: usize, max_iters: usize, residual_tol: f64, jobs: usize) -> PyResult<SolveOptions> {
    let o = SolveOptions { seed, restarts, max_iters, residual_tol, jobs, descent: Descent::GaussNewton, ..Default::default() };
    o.validate().map_err(err)?;
    Ok(o)
}

/// Searches the fiber over `target`; returns the feasibility report.
#[pyfunction]
#[pyo3(signature = (data, target, symmetric = false, seed = 0, restarts = 8, max_iters = 2000, residual_tol = 1e-8, jobs = 1))]
#[allow(clippy::too_many_arguments)]
fn solve_fiber(
    py: Python<'_>,
    data: &SurfaceGroupData,
    target: Vec<f64>,
    symmetric: bool,
    seed: u64,
    restarts: usize,
    max_iters: usize,
    residual_tol: f64,
    jobs: usize,
) -> PyResult<Py<PyAny>> {
    let opts = options(seed, restarts, max_iters, residual_tol, jobs)?;
    let t = CoreAlcovePoint::with_default_tol(target).map_err(err)?;
    let rep = py
        .detach(|| {
            if symmetric {
                solver::solve_fiber_symmetric(&data.inner, &t, &opts)
            } else {
                solver::solve_fiber(&data.inner, &t, &opts)
            }
        })
        .map_err(err)?;
    to_py_json(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (data, target, seed = 0, eps = 1e-6, symmetric = false))]
fn gradient_check(data: &SurfaceGroupData, target: Vec<f64>, seed: u64, eps: f64, symmetric: bool) -> PyResult<f64> {
    let t = CoreAlcovePoint::with_default_tol(target).map_err(err)?;
    let cfg = CoreConfiguration::random(&data.inner, &mut rng::from_seed(seed));
    let objective = if symmetric { solver::Objective::SymmetricFiber } else { solver::Objective::Fiber };
    solver::gradient_check_with(&data.inner, &t, &cfg, eps, objective, seed).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (s1, s2, samples = 1_000_000, seed = 0))]
fn su2_interval(s1: f64, s2: f64, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let r = polytope::su2_interval(s1, s2, samples, seed).map_err(err)?;
    Ok((r.lo, r.hi))
}

fn cloud_points(c: &AlcoveCloud) -> Vec<Vec<f64>> {
    c.points.iter().map(|p| p.coords().to_vec()).collect()
}

/// Momentum image sample: one alcove point per accepted configuration.
#[pyfunction]
#[pyo3(signature = (data, samples, seed = 0))]
fn sample_polytope(py: Python<'_>, data: &SurfaceGroupData, samples: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let c = py.detach(|| polytope::sample_polytope(&data.inner, samples, seed)).map_err(err)?;
    Ok(cloud_points(&c))
}

#[pyfunction]
#[pyo3(signature = (data, samples, seed = 0, residual_tol = 1e-8))]
fn sample_real_polytope(
    py: Python<'_>,
    data: &SurfaceGroupData,
    samples: usize,
    seed: u64,
    residual_tol: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let opts = options(seed, 8, 2000, residual_tol, 1)?;
    let c = py.detach(|| polytope::sample_real_polytope(&data.inner, samples, seed, &opts)).map_err(err)?;
    Ok(cloud_points(&c))
}

#[pyfunction]
#[pyo3(signature = (data, samples = 5000, pairs = 200, seed = 0, residual_tol = 1e-6))]
fn verify_convexity(
    py: Python<'_>,
    data: &SurfaceGroupData,
    samples: usize,
    pairs: usize,
    seed: u64,
    residual_tol: f64,
) -> PyResult<Py<PyAny>> {
    let opts = options(seed, 8, 2000, residual_tol, 1)?;
    let rep = py
        .detach(|| {
            let cloud = polytope::sample_polytope(&data.inner, samples, seed)?;
            polytope::verify_convexity(&cloud, pairs, &opts)
        })
        .map_err(err)?;
    to_py_json(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (data, samples = 5000, seed = 0, tol = 1e-6))]
fn dominant_cell(py: Python<'_>, data: &SurfaceGroupData, samples: usize, seed: u64, tol: f64) -> PyResult<Py<PyAny>> {
    let dom = py
        .detach(|| {
            let cloud = polytope::sample_polytope(&data.inner, samples, seed)?;
            polytope::dominant_cell(&cloud, tol)
        })
        .map_err(err)?;
    to_py_json(py, &dom)
}

#[pymodule]
fn qhconvex_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<AlcovePoint>()?;
    m.add_class::<SurfaceGroupData>()?;
    m.add_class::<Configuration>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(alcove_project, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(haar_su, m)?)?;
    m.add_function(wrap_pyfunction!(sample_class, m)?)?;
    m.add_function(wrap_pyfunction!(takagi, m)?)?;
    m.add_function(wrap_pyfunction!(sqrt_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_from_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_to_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fiber, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_check, m)?)?;
    m.add_function(wrap_pyfunction!(su2_interval, m)?)?;
    m.add_function(wrap_pyfunction!(sample_polytope, m)?)?;
    m.add_function(wrap_pyfunction!(sample_real_polytope, m)?)?;
    m.add_function(wrap_pyfunction!(verify_convexity, m)?)?;
    m.add_function(wrap_pyfunction!(dominant_cell, m)?)?;
    Ok(())
}
