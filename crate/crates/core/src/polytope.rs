// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Sampled momentum polytopes and the checks run on them.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng as _, RngCore};
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::Serialize;

use crate::alcove::{classify, orbit_dim, AlcovePoint, CellSignature, RootIndex};
use crate::error::{Error, Result};
use crate::qham::{moment, Configuration, SurfaceGroupData};
use crate::rng::{self, Purpose};
use crate::solver::{solve_fiber, solve_fiber_symmetric, residuals, SolveOptions};
use crate::unitary::spectrum_to_alcove;

/// Attached to every solver-backed report.
pub const CERTIFICATE_NOTE: &str = "converged targets are certified feasible; non-convergence is not a proof of infeasibility";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CloudKind {
    Full,
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudMeta {
    pub samples: usize,
    pub seed: u64,
    pub data: SurfaceGroupData,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlcoveCloud {
    pub points: Vec<AlcovePoint>,
    pub meta: CloudMeta,
    pub kind: CloudKind,
}

impl AlcoveCloud {
    pub fn n(&self) -> usize {
        self.meta.data.n
    }

    /// Coordinate-wise minimum and maximum.
    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let first = self.points.first()?.coords().to_vec();
        let mut lo = first.clone();
        let mut hi = first;
        for p in &self.points {
            for (k, &v) in p.coords().iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        Some((lo, hi))
    }

    pub fn centroid(&self) -> Option<Vec<f64>> {
        let m = self.points.len();
        if m == 0 {
            return None;
        }
        let mut c = vec![0.0; self.n()];
        for p in &self.points {
            for (k, v) in p.coords().iter().enumerate() {
                c[k] += v / m as f64;
            }
        }
        Some(c)
    }

    /// CSV with columns `x1..xn, cell_Z0, cell_Z1`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.n()).map(|k| format!("x{k}")).collect();
        header.push("cell_Z0".into());
        header.push("cell_Z1".into());
        w.write_record(&header).map_err(csv_err)?;
        for p in &self.points {
            let sig = classify(p, p.tol())?;
            let mut row: Vec<String> = p.coords().iter().map(|v| format!("{v:.17e}")).collect();
            row.push(root_list(&sig.z0));
            row.push(root_list(&sig.z1));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::InvalidData(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidData(e.to_string())
}

fn root_list<'a>(roots: impl IntoIterator<Item = &'a RootIndex>) -> String {
    roots.into_iter().map(|r| format!("{}-{}", r.i(), r.j())).collect::<Vec<_>>().join(";")
}

/// Solver seed for the `i`-th target of a batch.
fn target_seed(seed: u64, i: usize) -> u64 {
    rng::stream(seed, Purpose::Targets, i as u64).next_u64()
}

fn sample_point(data: &SurfaceGroupData, seed: u64, i: usize) -> Option<AlcovePoint> {
    let mut r = rng::stream(seed, Purpose::Sample, i as u64);
    let cfg = Configuration::random(data, &mut r);
    spectrum_to_alcove(&moment(&cfg)).ok()
}

/// `N` configurations drawn from the product of classes (and Haar handles),
/// pushed through the momentum map to the alcove. Sample `i` depends only on
/// `(seed, i)`, so a cloud is a prefix of any larger cloud with the same seed.
pub fn sample_polytope(data: &SurfaceGroupData, samples: usize, seed: u64) -> Result<AlcoveCloud> {
    if samples == 0 {
        return Err(Error::InvalidOptions("need at least one sample".into()));
    }
    let raw: Vec<Option<AlcovePoint>> = (0..samples).into_par_iter().map(|i| sample_point(data, seed, i)).collect();
    let rejected = raw.iter().filter(|p| p.is_none()).count();
    Ok(AlcoveCloud {
        points: raw.into_iter().flatten().collect(),
        meta: CloudMeta { samples, seed, data: data.clone(), rejected },
        kind: CloudKind::Full,
    })
}

/// Targets are the Full cloud for `(seed, N)`; each is searched by the
/// symmetric solver and the momentum of every converged witness is recorded.
pub fn sample_real_polytope(
    data: &SurfaceGroupData,
    samples: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<AlcoveCloud> {
    if data.genus != 0 {
        return Err(Error::GenusUnsupported(data.genus));
    }
    opts.validate()?;
    let full = sample_polytope(data, samples, seed)?;
    let solved: Vec<Result<Option<AlcovePoint>>> = full
        .points
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let o = SolveOptions { seed: target_seed(opts.seed, i), jobs: 1, ..opts.clone() };
            let rep = solve_fiber_symmetric(data, t, &o)?;
            Ok(match rep.witness {
                Some(w) => spectrum_to_alcove(&moment(&w)).ok(),
                None => None,
            })
        })
        .collect();
    let mut points = Vec::new();
    let mut rejected = full.meta.rejected;
    for s in solved {
        match s? {
            Some(p) => points.push(p),
            None => rejected += 1,
        }
    }
    Ok(AlcoveCloud { points, meta: CloudMeta { samples, seed, data: data.clone(), rejected }, kind: CloudKind::Real })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalResult {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

/// Observed range of the alcove coordinate of `c_1 c_2` in SU(2) with `c_j`
/// in the classes of `diag(e^{2πi s_j}, e^{-2πi s_j})`.
///
/// Works with unit quaternions: a class element is `cos θ + sin θ · v` with
/// `v` uniform on the sphere, so the product has real part
/// `cos θ₁ cos θ₂ − sin θ₁ sin θ₂ ⟨v₁, v₂⟩`, i.e. half its trace.
pub fn su2_interval(s1: f64, s2: f64, samples: usize, seed: u64) -> Result<IntervalResult> {
    for s in [s1, s2] {
        if !(0.0..=0.5).contains(&s) {
            return Err(Error::InvalidAlcovePoint(format!("SU(2) class coordinate {s} outside [0, 1/2]")));
        }
    }
    if samples == 0 {
        return Err(Error::InvalidOptions("need at least one sample".into()));
    }
    let (t1, t2) = (TAU * s1, TAU * s2);
    let mut r = rng::stream(seed, Purpose::Sample, 0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..samples {
        let v1: [f64; 3] = UnitSphere.sample(&mut r);
        let v2: [f64; 3] = UnitSphere.sample(&mut r);
        let dot = v1[0] * v2[0] + v1[1] * v2[1] + v1[2] * v2[2];
        let re = (t1.cos() * t2.cos() - t1.sin() * t2.sin() * dot).clamp(-1.0, 1.0);
        let x = re.acos() / TAU;
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok(IntervalResult { lo, hi, samples })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub pairs: usize,
    pub feasible: usize,
    pub fraction: f64,
    pub residual_tol: f64,
    /// Midpoints without a certificate.
    pub unresolved: Vec<AlcovePoint>,
    pub note: &'static str,
}

fn midpoint(a: &AlcovePoint, b: &AlcovePoint) -> Result<AlcovePoint> {
    let x = a.coords().iter().zip(b.coords()).map(|(p, q)| 0.5 * (p + q)).collect();
    AlcovePoint::new(x, a.tol().max(b.tol()))
}

/// Fraction of random midpoints of cloud pairs certified feasible by
/// `solve_fiber`.
pub fn verify_convexity(cloud: &AlcoveCloud, pairs: usize, opts: &SolveOptions) -> Result<ConvexityReport> {
    if cloud.kind != CloudKind::Full {
        return Err(Error::InvalidData("convexity is checked on Full clouds".into()));
    }
    if cloud.points.is_empty() || pairs == 0 {
        return Err(Error::InvalidOptions("need a non-empty cloud and at least one pair".into()));
    }
    opts.validate()?;
    let m = cloud.points.len();
    let mut r = rng::stream(opts.seed, Purpose::Pairs, 0);
    let mids: Vec<AlcovePoint> = (0..pairs)
        .map(|_| midpoint(&cloud.points[r.random_range(0..m)], &cloud.points[r.random_range(0..m)]))
        .collect::<Result<_>>()?;
    let ok: Vec<Result<bool>> = mids
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let o = SolveOptions { seed: target_seed(opts.seed, i), jobs: 1, ..opts.clone() };
            Ok(solve_fiber(&cloud.meta.data, t, &o)?.converged())
        })
        .collect();
    let mut feasible = 0;
    let mut unresolved = Vec::new();
    for (t, ok) in mids.into_iter().zip(ok) {
        if ok? {
            feasible += 1;
        } else {
            unresolved.push(t);
        }
    }
    Ok(ConvexityReport {
        pairs,
        feasible,
        fraction: feasible as f64 / pairs as f64,
        residual_tol: opts.residual_tol,
        unresolved,
        note: CERTIFICATE_NOTE,
    })
}

/// `max_{a ∈ A} min_{b ∈ B} |a − b|`.
pub fn hausdorff_one_sided(a: &[AlcovePoint], b: &[AlcovePoint]) -> f64 {
    a.par_iter()
        .map(|p| b.iter().map(|q| p.distance(q)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// Euclidean distance from `x` to the convex hull of `points`.
///
/// Exact for one-dimensional alcoves; otherwise Frank–Wolfe with exact line
/// search started from the nearest sample, stopped once the distance is
/// certified to about 1e-10.
pub fn hull_distance(x: &AlcovePoint, points: &[AlcovePoint]) -> f64 {
    if points.is_empty() {
        return f64::INFINITY;
    }
    if x.n() == 2 {
        let (lo, hi) = points
            .iter()
            .map(|p| p.coords()[0])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        let v = x.coords()[0];
        return std::f64::consts::SQRT_2 * (lo - v).max(v - hi).max(0.0);
    }
    let t = x.coords();
    let mut y = points
        .iter()
        .min_by(|p, q| p.distance(x).total_cmp(&q.distance(x)))
        .expect("non-empty")
        .coords()
        .to_vec();
    for _ in 0..20_000 {
        let dist = y.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dist <= 1e-12 {
            break;
        }
        let g: Vec<f64> = y.iter().zip(t).map(|(a, b)| a - b).collect();
        let s = points
            .iter()
            .min_by(|p, q| dot(&g, p.coords()).total_cmp(&dot(&g, q.coords())))
            .expect("non-empty")
            .coords();
        let d: Vec<f64> = s.iter().zip(&y).map(|(a, b)| a - b).collect();
        let gap = -dot(&g, &d);
        let dd = dot(&d, &d);
        // the gap bounds |y - x|² - d², so the distance error is at most 2·gap/|y - x|
        if 2.0 * gap <= 1e-10 * dist || dd == 0.0 {
            break;
        }
        let step = (gap / dd).min(1.0);
        for (yk, dk) in y.iter_mut().zip(&d) {
            *yk += step * dk;
        }
    }
    y.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct GridTarget {
    pub target: AlcovePoint,
    pub converged: bool,
    pub momentum_residual: f64,
    pub beta_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RealEqualityReport {
    pub hausdorff_real_to_full: f64,
    pub hausdorff_full_to_real: f64,
    pub hausdorff: f64,
    pub grid: Vec<GridTarget>,
    pub grid_converged: usize,
    pub grid_fraction: f64,
    /// Largest distance of a Real point from the Full hull.
    pub real_outside_full: f64,
    pub residual_tol: f64,
    pub inset: f64,
    pub note: &'static str,
}

/// Relative inset of grid targets from the boundary of the sampled polytope.
pub const GRID_INSET: f64 = 0.05;

/// Targets inside the Full cloud's hull: an evenly spaced inset grid for
/// `n = 2`, otherwise cloud points pulled toward the centroid by the inset.
pub fn grid_targets(full: &AlcoveCloud, grid: usize) -> Result<Vec<AlcovePoint>> {
    let (lo, hi) = full.bounds().ok_or_else(|| Error::InvalidData("empty cloud".into()))?;
    if grid == 0 {
        return Err(Error::InvalidOptions("grid must be positive".into()));
    }
    let tol = full.points[0].tol();
    if full.n() == 2 {
        let w = hi[0] - lo[0];
        let (a, b) = (lo[0] + GRID_INSET * w, hi[0] - GRID_INSET * w);
        return (0..grid)
            .map(|k| {
                let v = if grid == 1 { 0.5 * (a + b) } else { a + (b - a) * k as f64 / (grid - 1) as f64 };
                AlcovePoint::new(vec![v, -v], tol)
            })
            .collect();
    }
    let c = full.centroid().expect("non-empty");
    let m = full.points.len();
    (0..grid)
        .map(|k| {
            let p = full.points[k * m / grid].coords();
            let x = p.iter().zip(&c).map(|(pi, ci)| ci + (1.0 - GRID_INSET) * (pi - ci)).collect();
            AlcovePoint::new(x, tol)
        })
        .collect()
}

/// Compares a Real cloud with a Full cloud: Hausdorff distances both ways
/// and symmetric-solver success on inset grid targets.
pub fn verify_real_equality(
    full: &AlcoveCloud,
    real: &AlcoveCloud,
    grid: usize,
    opts: &SolveOptions,
) -> Result<RealEqualityReport> {
    if full.meta.data != real.meta.data {
        return Err(Error::DataMismatch);
    }
    if full.meta.data.genus != 0 {
        return Err(Error::GenusUnsupported(full.meta.data.genus));
    }
    if full.points.is_empty() || real.points.is_empty() {
        return Err(Error::InvalidData("empty cloud".into()));
    }
    opts.validate()?;
    let data = &full.meta.data;
    let targets = grid_targets(full, grid)?;
    let results: Vec<Result<GridTarget>> = targets
        .into_par_iter()
        .enumerate()
        .map(|(i, t)| {
            let o = SolveOptions { seed: target_seed(opts.seed, i), jobs: 1, ..opts.clone() };
            let rep = solve_fiber_symmetric(data, &t, &o)?;
            let (mu, beta) = match &rep.witness {
                Some(w) => residuals(w, &t)?,
                None => (rep.momentum_residual, rep.beta_residual),
            };
            Ok(GridTarget {
                target: t,
                converged: rep.converged(),
                momentum_residual: mu,
                beta_residual: beta.unwrap_or(f64::NAN),
            })
        })
        .collect();
    let grid_results: Vec<GridTarget> = results.into_iter().collect::<Result<_>>()?;
    let grid_converged = grid_results.iter().filter(|g| g.converged).count();
    let r2f = hausdorff_one_sided(&real.points, &full.points);
    let f2r = hausdorff_one_sided(&full.points, &real.points);
    let real_outside_full = real.points.iter().map(|p| hull_distance(p, &full.points)).fold(0.0, f64::max);
    Ok(RealEqualityReport {
        hausdorff_real_to_full: r2f,
        hausdorff_full_to_real: f2r,
        hausdorff: r2f.max(f2r),
        grid_fraction: grid_converged as f64 / grid_results.len() as f64,
        grid_converged,
        grid: grid_results,
        real_outside_full,
        residual_tol: opts.residual_tol,
        inset: GRID_INSET,
        note: CERTIFICATE_NOTE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominantCell {
    pub signature: CellSignature,
    pub orbit_dim: usize,
    pub fraction: f64,
    pub tol: f64,
    /// Points per cell, keyed by the cell's display form.
    pub cells: BTreeMap<String, usize>,
}

/// The cell of maximal orbit dimension met by the cloud.
pub fn dominant_cell(cloud: &AlcoveCloud, tol: f64) -> Result<DominantCell> {
    if cloud.points.is_empty() {
        return Err(Error::InvalidData("empty cloud".into()));
    }
    let n = cloud.n();
    let mut counts: BTreeMap<CellSignature, usize> = BTreeMap::new();
    for p in &cloud.points {
        *counts.entry(classify(p, tol)?).or_insert(0) += 1;
    }
    let best = counts.keys().map(|s| orbit_dim(s, n)).max().expect("non-empty");
    let top: Vec<&CellSignature> = counts.keys().filter(|s| orbit_dim(s, n) == best).collect();
    if top.len() > 1 {
        return Err(Error::AmbiguousCell { orbit_dim: best });
    }
    let signature = top[0].clone();
    let fraction = counts[&signature] as f64 / cloud.points.len() as f64;
    Ok(DominantCell {
        signature,
        orbit_dim: best,
        fraction,
        tol,
        cells: counts.iter().map(|(s, c)| (s.to_string(), *c)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2(s1: f64, s2: f64) -> SurfaceGroupData {
        SurfaceGroupData::punctured_sphere(vec![vec![s1, -s1], vec![s2, -s2]]).unwrap()
    }

    fn pt(x: Vec<f64>) -> AlcovePoint {
        AlcovePoint::with_default_tol(x).unwrap()
    }

    #[test]
    fn identity_classes_give_origin() {
        let d = SurfaceGroupData::punctured_sphere(vec![vec![0.0; 3]; 3]).unwrap();
        let c = sample_polytope(&d, 50, 1).unwrap();
        assert_eq!(c.points.len(), 50);
        assert!(c.points.iter().all(|p| p.coords().iter().all(|v| v.abs() < 1e-9)));
        let dom = dominant_cell(&c, 1e-6).unwrap();
        assert_eq!(dom.signature, CellSignature::identity(3));
    }

    #[test]
    fn sampling_is_deterministic_and_prefix_stable() {
        let d = su2(0.2, 0.15);
        let a = sample_polytope(&d, 200, 4).unwrap();
        let b = sample_polytope(&d, 200, 4).unwrap();
        assert_eq!(a, b);
        let c = sample_polytope(&d, 50, 4).unwrap();
        assert_eq!(&a.points[..50], &c.points[..]);
    }

    #[test]
    fn su2_interval_closed_form() {
        let r = su2_interval(0.2, 0.15, 200_000, 3).unwrap();
        assert!((r.lo - 0.05).abs() < 0.005 && (r.hi - 0.35).abs() < 0.005, "{r:?}");
        let r = su2_interval(0.0, 0.3, 1000, 3).unwrap();
        assert!((r.lo - 0.3).abs() < 1e-12 && (r.hi - 0.3).abs() < 1e-12);
        assert!(su2_interval(0.6, 0.1, 10, 0).is_err());
    }

    #[test]
    fn genus_one_covers_alcove() {
        let d = SurfaceGroupData::new(2, 1, vec![]).unwrap();
        let c = sample_polytope(&d, 10_000, 2).unwrap();
        let (lo, hi) = c.bounds().unwrap();
        assert!(lo[0] < 0.02 && hi[0] > 0.48, "{lo:?} {hi:?}");
    }

    #[test]
    fn hull_distance_cases() {
        let pts: Vec<AlcovePoint> =
            [(0.5, 0.0), (0.0, 0.0), (0.25, 0.25)].iter().map(|&(a, b)| pt(vec![a, b, -a - b])).collect();
        let inside = pt(vec![0.25, 0.08, -0.33]);
        assert!(hull_distance(&inside, &pts) < 1e-9);
        let one: Vec<AlcovePoint> = [0.1, 0.3].iter().map(|&v| pt(vec![v, -v])).collect();
        assert!(hull_distance(&pt(vec![0.2, -0.2]), &one) == 0.0);
        assert!((hull_distance(&pt(vec![0.4, -0.4]), &one) - 0.1 * std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let d = su2(0.0, 0.0);
        let c = sample_polytope(&d, 3, 0).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("x1,x2,cell_Z0,cell_Z1"));
        assert!(lines.next().unwrap().ends_with(",1-2,"));
        assert_eq!(s.lines().count(), 4);
    }

    #[test]
    fn convexity_single_point_cloud() {
        let d = su2(0.0, 0.2);
        let c = sample_polytope(&d, 20, 0).unwrap();
        let opts = SolveOptions { restarts: 2, ..Default::default() };
        let r = verify_convexity(&c, 5, &opts).unwrap();
        assert_eq!(r.fraction, 1.0);
    }

    #[test]
    fn mismatched_data_rejected() {
        let a = sample_polytope(&su2(0.2, 0.15), 10, 0).unwrap();
        let b = sample_polytope(&su2(0.2, 0.1), 10, 0).unwrap();
        let opts = SolveOptions::default();
        assert!(matches!(verify_real_equality(&a, &b, 3, &opts), Err(Error::DataMismatch)));
    }

    #[test]
    fn grid_is_inset() {
        let c = sample_polytope(&su2(0.2, 0.15), 20_000, 1).unwrap();
        let g = grid_targets(&c, 21).unwrap();
        let (lo, hi) = c.bounds().unwrap();
        assert_eq!(g.len(), 21);
        assert!(g[0].coords()[0] > lo[0] && g[20].coords()[0] < hi[0]);
    }
}
