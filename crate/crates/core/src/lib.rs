// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Group-valued momentum maps on products of conjugacy classes of SU(n),
//! the fundamental alcove, and numerical checks of (real) convexity of the
//! momentum image.

// `!(x <= tol)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alcove;
pub mod cli;
pub mod error;
pub mod polytope;
pub mod qham;
pub mod rng;
pub mod solver;
pub mod transfer;
pub mod unitary;

pub use alcove::{AlcovePoint, CellSignature, RootIndex};
pub use error::{Error, Result};
pub use unitary::{ConjClassSpec, SymmetricUnitary, UnitaryMatrix};
