// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dynamical manipulation of a charged particle in a Penning trap.
//!
//! The crate works at the level of the linear phase-space action of quadratic
//! Hamiltonians (ħ = 1). It provides
//!
//! - exact symplectic propagators for free, harmonic, kicked and rotational
//!   segments, with loop detection ([`symplectic`]);
//! - the trap model, its evolution loops and the two-kick evolution matrices
//!   ([`trap`]);
//! - an inverse solver for kick schedules realising Fourier-like and scale
//!   transformations ([`solver`]);
//! - stability and normal-mode analysis of the trap under a rotating magnetic
//!   field ([`floquet`]);
//! - geometric phases of cyclic evolutions ([`phases`]).
//!
//! Phase-space vectors use block ordering `(q.., p..)` with canonical form
//! `J = [[0, I], [-I, 0]]`. Matrices act in the Heisenberg picture and compose
//! with the chronologically later factor on the left.

pub mod cli;
pub mod error;
pub mod floquet;
pub mod format;
pub mod phases;
pub mod reference;
pub mod solver;
pub mod symplectic;
pub mod trap;

pub use error::{Error, Result};
pub use floquet::{ModeSpectrum, RotatingFieldConfig, StabilityClass};
pub use solver::{SolutionRecord, TargetClass};
pub use symplectic::{GaussianState, SymplecticMatrix};
pub use trap::{KickSchedule, TransformKind, TrapConfig};
