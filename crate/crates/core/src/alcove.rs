// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Type-A root system, the closed fundamental alcove of SU(n) and its cells.
//!
//! Coordinates are eigenphases: the point `x` labels the conjugacy class of
//! `diag(e^{2πi x_1}, …, e^{2πi x_n})`. The positive roots are
//! `α_ij(x) = x_i − x_j` for `i < j`, the simple roots are `α_{i,i+1}` and the
//! highest root is `α_{1n}`. The closed alcove is
//!
//! ```text
//! Σ x_k = 0,   x_1 ≥ x_2 ≥ … ≥ x_n,   x_1 − x_n ≤ 1.
//! ```
//!
//! A cell is labelled by the roots taking the value 0 (`Z0`) and the roots
//! taking the value 1 (`Z1`); both sets together determine the centralizer of
//! `exp(x)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default tolerance for membership and cell classification.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Positive root `α_ij(x) = x_i − x_j`, 1-based with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootIndex {
    i: usize,
    j: usize,
}

impl RootIndex {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == 0 || i >= j {
            return Err(Error::InvalidAlcovePoint(format!(
                "root index ({i},{j}) must satisfy 1 <= i < j"
            )));
        }
        Ok(Self { i, j })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn is_simple(&self) -> bool {
        self.j == self.i + 1
    }

    /// Value of the root on `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        x[self.i - 1] - x[self.j - 1]
    }
}

impl Serialize for RootIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.i, self.j].serialize(s)
    }
}

impl<'de> Deserialize<'de> for RootIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [i, j] = <[usize; 2]>::deserialize(d)?;
        RootIndex::new(i, j).map_err(D::Error::custom)
    }
}

/// All positive roots of SU(n) in lexicographic order.
pub fn positive_roots(n: usize) -> Vec<RootIndex> {
    let mut roots = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 1..=n {
        for j in (i + 1)..=n {
            roots.push(RootIndex { i, j });
        }
    }
    roots
}

pub fn simple_roots(n: usize) -> Vec<RootIndex> {
    (1..n).map(|i| RootIndex { i, j: i + 1 }).collect()
}

pub fn highest_root(n: usize) -> RootIndex {
    RootIndex { i: 1, j: n }
}

/// A point of the closed alcove, i.e. the canonical label of a conjugacy class.
#[derive(Debug, Clone, PartialEq)]
pub struct AlcovePoint {
    x: Vec<f64>,
    tol: f64,
}

impl AlcovePoint {
    pub fn new(x: Vec<f64>, tol: f64) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidAlcovePoint(format!(
                "need n >= 2 coordinates, got {}",
                x.len()
            )));
        }
        if !(tol >= 0.0) {
            return Err(Error::InvalidAlcovePoint(format!("negative tolerance {tol}")));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidAlcovePoint(format!("non-finite coordinate {bad}")));
        }
        let sum: f64 = x.iter().sum();
        if sum.abs() > tol {
            return Err(Error::InvalidAlcovePoint(format!("trace defect {sum:e} exceeds {tol:e}")));
        }
        for (k, w) in x.windows(2).enumerate() {
            if w[0] - w[1] < -tol {
                return Err(Error::InvalidAlcovePoint(format!(
                    "x_{} < x_{} ({} < {})",
                    k + 1,
                    k + 2,
                    w[0],
                    w[1]
                )));
            }
        }
        let spread = x[0] - x[x.len() - 1];
        if spread > 1.0 + tol {
            return Err(Error::InvalidAlcovePoint(format!("x_1 − x_n = {spread} exceeds 1")));
        }
        Ok(Self { x, tol })
    }

    pub fn with_default_tol(x: Vec<f64>) -> Result<Self> {
        Self::new(x, DEFAULT_TOL)
    }

    /// The identity class `(0, …, 0)`.
    pub fn origin(n: usize) -> Self {
        Self { x: vec![0.0; n], tol: DEFAULT_TOL }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.x
    }

    /// Eigenphases of `exp(x)` reduced to `[0, 1)`.
    pub fn fractional_phases(&self) -> Vec<f64> {
        self.x.iter().map(|&v| canonical_phase(v)).collect()
    }

    /// Euclidean distance in alcove coordinates.
    pub fn distance(&self, other: &AlcovePoint) -> f64 {
        euclid(&self.x, &other.x)
    }
}

impl Serialize for AlcovePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.x.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlcovePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = Vec::<f64>::deserialize(d)?;
        AlcovePoint::with_default_tol(x).map_err(D::Error::custom)
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Fractional part in `[0, 1)`. Values that round up to 1 fold back to 0.
pub fn canonical_phase(p: f64) -> f64 {
    let r = p - p.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Cell label: roots with value 0 and roots with value 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct CellSignature {
    #[serde(rename = "Z0")]
    pub z0: BTreeSet<RootIndex>,
    #[serde(rename = "Z1")]
    pub z1: BTreeSet<RootIndex>,
}

impl CellSignature {
    /// Regular cell (interior of the alcove).
    pub fn regular() -> Self {
        Self::default()
    }

    /// Cell of the identity: every positive root vanishes.
    pub fn identity(n: usize) -> Self {
        Self { z0: positive_roots(n).into_iter().collect(), z1: BTreeSet::new() }
    }

    pub fn from_pairs(z0: &[(usize, usize)], z1: &[(usize, usize)]) -> Result<Self> {
        let conv = |v: &[(usize, usize)]| {
            v.iter().map(|&(i, j)| RootIndex::new(i, j)).collect::<Result<BTreeSet<_>>>()
        };
        Ok(Self { z0: conv(z0)?, z1: conv(z1)? })
    }

    /// Checks disjointness and the additive closure rules of a cell.
    pub fn is_consistent(&self) -> bool {
        if self.z0.intersection(&self.z1).next().is_some() {
            return false;
        }
        let has0 = |i: usize, j: usize| self.z0.contains(&RootIndex { i, j });
        let has1 = |i: usize, j: usize| self.z1.contains(&RootIndex { i, j });
        for a in &self.z0 {
            for b in &self.z0 {
                if a.j == b.i && !has0(a.i, b.j) {
                    return false;
                }
            }
            for b in &self.z1 {
                // α_ij ∈ Z0, α_ik ∈ Z1 ⇒ α_jk ∈ Z1
                if a.i == b.i && a.j < b.j && !has1(a.j, b.j) {
                    return false;
                }
                // α_jk ∈ Z0, α_ik ∈ Z1 ⇒ α_ij ∈ Z1
                if a.j == b.j && b.i < a.i && !has1(b.i, a.i) {
                    return false;
                }
            }
        }
        true
    }

    /// Partition of `{1..n}` into blocks of equal eigenvalues of `exp(x)`.
    pub fn blocks(&self, n: usize) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], k: usize) -> usize {
            let mut r = k;
            while p[r] != r {
                r = p[r];
            }
            let mut c = k;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        for r in self.z0.iter().chain(&self.z1) {
            let (a, b) = (find(&mut parent, r.i - 1), find(&mut parent, r.j - 1));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; n];
        for k in 0..n {
            let r = find(&mut parent, k);
            match root_of[r] {
                Some(slot) => out[slot].push(k + 1),
                None => {
                    root_of[r] = Some(out.len());
                    out.push(vec![k + 1]);
                }
            }
        }
        out
    }
}

impl fmt::Display for CellSignature {
    /// `Z0|Z1` with roots written `i-j` and separated by `;`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join =
            |s: &BTreeSet<RootIndex>| s.iter().map(|r| format!("{}-{}", r.i, r.j)).collect::<Vec<_>>().join(";");
        write!(f, "{}|{}", join(&self.z0), join(&self.z1))
    }
}

/// Cell of `x`, with near-equalities snapped transitively.
///
/// Coordinates whose consecutive gaps are at most `tol` are merged into one
/// block; `Z0` is every pair inside a block. If the highest root is within
/// `tol` of 1, `Z1` is every pair between the first and the last block.
pub fn classify(x: &AlcovePoint, tol: f64) -> Result<CellSignature> {
    let c = x.coords();
    let n = c.len();
    if tol >= 0.5 {
        for r in positive_roots(n) {
            let v = r.eval(c);
            if v.abs() <= tol && (v - 1.0).abs() <= tol {
                return Err(Error::InconsistentTolerance { value: v, tol });
            }
        }
    }
    let mut block = vec![0usize; n];
    for k in 1..n {
        block[k] = if c[k - 1] - c[k] <= tol { block[k - 1] } else { block[k - 1] + 1 };
    }
    let mut sig = CellSignature::default();
    for r in positive_roots(n) {
        if block[r.i - 1] == block[r.j - 1] {
            sig.z0.insert(r);
        }
    }
    let wall = (c[0] - c[n - 1] - 1.0).abs() <= tol;
    if wall {
        let (first, last) = (block[0], block[n - 1]);
        if first == last {
            return Err(Error::InconsistentTolerance { value: c[0] - c[n - 1], tol });
        }
        for r in positive_roots(n) {
            if block[r.i - 1] == first && block[r.j - 1] == last {
                sig.z1.insert(r);
            }
        }
    }
    Ok(sig)
}

/// Dimension of the centralizer of `exp(x)` for `x` in the given cell:
/// rank plus twice the number of roots with value 0 or 1.
pub fn stabilizer_dim(sig: &CellSignature, n: usize) -> usize {
    (n - 1) + 2 * sig.z0.union(&sig.z1).count()
}

/// Dimension of the conjugacy class of `exp(x)`.
pub fn orbit_dim(sig: &CellSignature, n: usize) -> usize {
    (n * n - 1) - stabilizer_dim(sig, n)
}

/// Maps the eigenphases of a determinant-one matrix to its alcove label.
///
/// Phases are reduced to `[0, 1)` and sorted in decreasing order; with
/// `m = Σ phases` (an integer), 1 is subtracted from the `m` largest entries
/// and the result is sorted again.
pub fn alcove_project(phases: &[f64], tol: f64) -> Result<AlcovePoint> {
    let n = phases.len();
    if n < 2 {
        return Err(Error::InvalidAlcovePoint(format!("need n >= 2 phases, got {n}")));
    }
    let mut p: Vec<f64> = phases.iter().map(|&v| canonical_phase(v)).collect();
    let sum: f64 = p.iter().sum();
    let m = sum.round();
    if (sum - m).abs() > tol {
        return Err(Error::NonIntegralSum { sum, tol });
    }
    let m = (m as usize).min(n);
    p.sort_by(|a, b| b.total_cmp(a));
    for v in p.iter_mut().take(m) {
        *v -= 1.0;
    }
    p.sort_by(|a, b| b.total_cmp(a));
    // absorb the rounding left in the trace
    let drift = p.iter().sum::<f64>() / n as f64;
    for v in p.iter_mut() {
        *v -= drift;
    }
    AlcovePoint::new(p, tol.max(DEFAULT_TOL))
}
