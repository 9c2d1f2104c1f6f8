// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Reference computations used by the integration tests. They avoid the
//! library's eigen-based code paths where a closed form exists.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qhconvex::unitary::CMatrix;
use qhconvex::AlcovePoint;
use rand::Rng;

/// Closed-form SU(2) product interval for classes `s1, s2 ∈ [0, 1/2]`.
pub fn su2_interval_closed_form(s1: f64, s2: f64) -> (f64, f64) {
    ((s1 - s2).abs(), (s1 + s2).min(1.0 - s1 - s2))
}

/// Frozen reference interval for classes (0.2, 0.15).
pub const SU2_REFERENCE: (f64, f64) = (0.05, 0.35);

/// Alcove coordinate of the SU(2) product `c1 · c2` directly from the trace:
/// `tr = 2 cos(2π x)`.
pub fn su2_coordinate(c: &CMatrix) -> f64 {
    let half = (c.trace().re / 2.0).clamp(-1.0, 1.0);
    half.acos() / std::f64::consts::TAU
}

/// Real basis of the traceless skew-Hermitian matrices (not normalized).
fn skew_basis(n: usize) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for p in 0..n {
        for q in (p + 1)..n {
            let mut a = CMatrix::zeros(n, n);
            a[(p, q)] = Complex64::new(1.0, 0.0);
            a[(q, p)] = Complex64::new(-1.0, 0.0);
            out.push(a);
            let mut b = CMatrix::zeros(n, n);
            b[(p, q)] = Complex64::new(0.0, 1.0);
            b[(q, p)] = Complex64::new(0.0, 1.0);
            out.push(b);
        }
    }
    for k in 0..n - 1 {
        let mut d = CMatrix::zeros(n, n);
        d[(k, k)] = Complex64::new(0.0, 1.0);
        d[(k + 1, k + 1)] = Complex64::new(0.0, -1.0);
        out.push(d);
    }
    out
}

/// Dimension of the centralizer of `g` in SU(n): the nullity of
/// `Y ↦ Y − g Y g⁻¹` on su(n), read off the diagonal of a column-pivoted QR
/// factorization (entries at most `threshold` count as zero).
pub fn centralizer_dim(g: &CMatrix, threshold: f64) -> usize {
    let n = g.nrows();
    let basis = skew_basis(n);
    let m = basis.len();
    // columns: images flattened to real coordinates of the full n×n matrix
    let mut op = DMatrix::<f64>::zeros(2 * n * n, m);
    let ginv = g.adjoint();
    for (c, y) in basis.iter().enumerate() {
        let img = y - g * y * &ginv;
        for (k, z) in img.iter().enumerate() {
            op[(k, c)] = z.re;
            op[(n * n + k, c)] = z.im;
        }
    }
    // the basis is not orthonormal but is well conditioned; nullity is basis-independent
    let r = op.col_piv_qr().r();
    (0..m).filter(|&k| r[(k, k)].abs() <= threshold).count()
}

/// `diag(e^{2πi x})` built entrywise.
pub fn exp_diag(x: &[f64]) -> CMatrix {
    let n = x.len();
    let mut d = CMatrix::zeros(n, n);
    for (k, v) in x.iter().enumerate() {
        d[(k, k)] = Complex64::from_polar(1.0, std::f64::consts::TAU * v);
    }
    d
}

/// Uniformly spread generic alcove point in dimension `n`.
pub fn generic_alcove_point<R: Rng>(n: usize, rng: &mut R) -> AlcovePoint {
    loop {
        // positive gaps g_1..g_{n-1}, g_n = 1 − Σ, all positive
        let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
        cuts.sort_by(f64::total_cmp);
        let mut gaps = Vec::with_capacity(n);
        let mut prev = 0.0;
        for c in &cuts {
            gaps.push(c - prev);
            prev = *c;
        }
        gaps.push(1.0 - prev);
        if gaps.iter().any(|&g| g < 1e-4) {
            continue;
        }
        return from_gaps(&gaps[..n - 1]);
    }
}

/// Alcove point with consecutive coordinate gaps `gaps` (length n − 1),
/// centered so the coordinates sum to zero.
pub fn from_gaps(gaps: &[f64]) -> AlcovePoint {
    let n = gaps.len() + 1;
    let mut x = vec![0.0; n];
    for k in 1..n {
        x[k] = x[k - 1] - gaps[k - 1];
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    for v in &mut x {
        *v -= mean;
    }
    AlcovePoint::new(x, 1e-12).expect("valid by construction")
}

/// Alcove point with forced equalities and possibly the wall
/// `x_1 − x_n = 1`. Returns the point and the number of coinciding
/// eigenvalue pairs.
pub fn degenerate_alcove_point<R: Rng>(n: usize, rng: &mut R) -> (AlcovePoint, usize) {
    loop {
        let on_wall = rng.random_bool(0.4);
        let mut gaps: Vec<f64> = (0..n - 1)
            .map(|_| if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.02..0.3) })
            .collect();
        let total: f64 = gaps.iter().sum();
        if on_wall {
            if total == 0.0 {
                continue;
            }
            // rescale the positive gaps to sum to exactly 1 in the spread
            let scale = 1.0 / total;
            for g in &mut gaps {
                *g *= scale;
            }
        } else if total >= 0.98 {
            continue;
        }
        let p = from_gaps(&gaps);
        let c = p.coords();
        let spread = c[0] - c[n - 1];
        if on_wall && (spread - 1.0).abs() > 1e-12 {
            continue;
        }
        // eigenvalue coincidences counted on the circle
        let mut pairs = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = c[i] - c[j];
                if d.abs() < 1e-12 || (d - 1.0).abs() < 1e-12 {
                    pairs += 1;
                }
            }
        }
        return (p, pairs);
    }
}

/// Sorted eigenphases in `(−1/2, 1/2]` from the characteristic data of a
/// 2×2 special unitary (closed form).
pub fn su2_phases(u: &CMatrix) -> [f64; 2] {
    let x = su2_coordinate(u);
    [x, -x]
}

pub fn product(ms: &[CMatrix], n: usize) -> CMatrix {
    ms.iter().fold(CMatrix::identity(n, n), |acc, m| acc * m)
}
