// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the library.
///
/// `NoWitness` and the non-convergence cases are mathematical outcomes rather
/// than tooling failures; the CLI maps them to a distinct exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid alcove point: {0}")]
    InvalidAlcovePoint(String),

    #[error("root value {value} is within tol={tol} of both 0 and 1")]
    InconsistentTolerance { value: f64, tol: f64 },

    #[error("phase sum {sum} is not an integer within tol={tol}")]
    NonIntegralSum { sum: f64, tol: f64 },

    #[error("eigensolver did not converge")]
    EigenFailure,

    #[error("matrix is not special unitary: {0}")]
    NotUnitary(String),

    #[error("matrix is not symmetric: ‖W − Wᵗ‖ = {0:e}")]
    NotSymmetric(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid surface group data: {0}")]
    InvalidData(String),

    #[error("configuration component {index} is not in its prescribed class (deviation {deviation:e})")]
    NotInClass { index: usize, deviation: f64 },

    #[error("involution beta is only available for genus 0 (got genus {0})")]
    GenusUnsupported(usize),

    #[error("no witness found at tol={tol}")]
    NoWitness { tol: f64 },

    #[error("configuration is not in the fiber over the identity: ‖μ − I‖ = {0:e}")]
    NotInFiber(f64),

    #[error("chain is not beta-fixed: symmetry defect {defect:e} at component {index}")]
    NotBetaFixed { index: usize, defect: f64 },

    #[error("clouds were built from different class data")]
    DataMismatch,

    #[error("two cells attain the maximal orbit dimension {orbit_dim}")]
    AmbiguousCell { orbit_dim: usize },

    #[error("invalid options: {0}")]
    InvalidOptions(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, used in machine-readable error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidAlcovePoint(_) => "InvalidAlcovePoint",
            Error::InconsistentTolerance { .. } => "InconsistentTolerance",
            Error::NonIntegralSum { .. } => "NonIntegralSum",
            Error::EigenFailure => "EigenFailure",
            Error::NotUnitary(_) => "NotUnitary",
            Error::NotSymmetric(_) => "NotSymmetric",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidData(_) => "InvalidData",
            Error::NotInClass { .. } => "NotInClass",
            Error::GenusUnsupported(_) => "GenusUnsupported",
            Error::NoWitness { .. } => "NoWitness",
            Error::NotInFiber(_) => "NotInFiber",
            Error::NotBetaFixed { .. } => "NotBetaFixed",
            Error::DataMismatch => "DataMismatch",
            Error::AmbiguousCell { .. } => "AmbiguousCell",
            Error::InvalidOptions(_) => "InvalidOptions",
        }
    }
}
