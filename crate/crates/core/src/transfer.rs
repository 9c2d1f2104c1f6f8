// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Transfer between product-one tuples of unitaries `u_1 ⋯ u_l = 1` and
//! tuples `A_1 ⋯ A_l = 1` whose "symmetric squares" `A_jᵗ A_j` carry the
//! prescribed spectra.

use crate::error::{Error, Result};
use crate::unitary::{identity, sqrt_symmetric_raw, CMatrix, UnitaryMatrix};

fn suffix_products(a: &[UnitaryMatrix]) -> Vec<CMatrix> {
    // suffix[j] = a[j] ⋯ a[l-1]; suffix[l] = I
    let l = a.len();
    let n = a.first().map(UnitaryMatrix::n).unwrap_or(0);
    let mut suffix = vec![identity(n); l + 1];
    for j in (0..l).rev() {
        suffix[j] = a[j].matrix() * &suffix[j + 1];
    }
    suffix
}

/// `u_j = (A_{j+1}⋯A_l)ᵗ (A_jᵗ A_j) ((A_{j+1}⋯A_l)ᵗ)⁻¹`.
///
/// Then `u_1 ⋯ u_l = (A_1⋯A_l)ᵗ (A_1⋯A_l)` and `u_j` is conjugate to
/// `A_jᵗ A_j`.
pub fn transfer_from_symmetric(a: &[UnitaryMatrix]) -> Vec<UnitaryMatrix> {
    let suffix = suffix_products(a);
    a.iter()
        .enumerate()
        .map(|(j, aj)| {
            let s = &suffix[j + 1];
            let sq = aj.matrix().transpose() * aj.matrix();
            UnitaryMatrix::from_raw(s.transpose() * sq * s.conjugate())
        })
        .collect()
}

/// Inverse direction for a beta-fixed chain with `w_1 ⋯ w_l = 1`.
///
/// `A_l` is the symmetric square root of `w_l`; going down,
/// `m_j = ((A_{j+1}⋯A_l)ᵗ)⁻¹ w_j (A_{j+1}⋯A_l)ᵗ` must be symmetric and
/// `A_j` is its square root; finally `A_1 = (A_2⋯A_l)⁻¹`.
pub fn transfer_to_symmetric(w: &[UnitaryMatrix], tol: f64) -> Result<Vec<UnitaryMatrix>> {
    let l = w.len();
    let Some(first) = w.first() else {
        return Ok(Vec::new());
    };
    let n = first.n();
    if let Some(bad) = w.iter().find(|m| m.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.n() });
    }
    let product = w.iter().fold(identity(n), |acc, m| acc * m.matrix());
    let defect = (product - identity(n)).norm();
    if defect > tol {
        return Err(Error::NotInFiber(defect));
    }
    if l == 1 {
        return Ok(vec![UnitaryMatrix::identity(n)]);
    }

    let mut a = vec![UnitaryMatrix::identity(n); l];
    // running suffix A_{j+1} ⋯ A_l
    let mut suffix = identity(n);
    for j in (1..l).rev() {
        let m = suffix.conjugate() * w[j].matrix() * suffix.transpose();
        let sym = (&m - m.transpose()).norm();
        if sym > tol * n as f64 {
            return Err(Error::NotBetaFixed { index: j + 1, defect: sym });
        }
        let root = sqrt_symmetric_raw(&m, tol)
            .map_err(|_| Error::NotBetaFixed { index: j + 1, defect: sym })?
            .into_unitary();
        suffix = root.matrix() * &suffix;
        a[j] = root;
    }
    a[0] = UnitaryMatrix::from_raw(suffix.adjoint());
    Ok(a)
}
