// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the library. Solver non-convergence is not an error; see
/// [`crate::solver::PolishFailure`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("trap regime violated: {0}")]
    TrapRegime(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("not an evolution loop: {0}")]
    NotALoop(String),

    #[error("configuration is not confined ({0})")]
    NotConfined(String),

    #[error("ill-conditioned mode decomposition: {0}")]
    Conditioning(String),

    #[error("finite-difference stencil failed: {0}; try a smaller step")]
    Stencil(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
