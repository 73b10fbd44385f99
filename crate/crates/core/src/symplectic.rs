// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact linear propagators for quadratic Hamiltonians.
//!
//! Every matrix here maps Heisenberg-picture phase-space coordinates at the
//! start of a segment to coordinates at its end. For `N` degrees of freedom the
//! ordering is `(q_1..q_N, p_1..p_N)`; a single degree of freedom is `(q, p)`.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Default tolerance for [`is_loop`] when the caller has no better choice.
pub const DEFAULT_LOOP_TOL: f64 = 1e-9;

/// Tolerance used when checking symplecticity on construction. Scaled by the
/// squared magnitude of the largest entry, since `MᵀJM` is quadratic in `M`.
const SYMPLECTIC_TOL: f64 = 1e-9;

/// Canonical form `J = [[0, I], [-I, 0]]` of dimension `dim` (even).
pub fn canonical_form(dim: usize) -> DMatrix<f64> {
    assert!(
        dim.is_multiple_of(2) && dim > 0,
        "phase space dimension must be even"
    );
    let n = dim / 2;
    let mut j = DMatrix::zeros(dim, dim);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Largest absolute entry.
pub fn max_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// A real `2N×2N` matrix preserving the canonical form.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymplecticMatrix(DMatrix<f64>);

impl SymplecticMatrix {
    /// Wrap `m` after checking that it is square, even-dimensional and
    /// symplectic.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
            return param(format!(
                "symplectic matrix must be square with even size, got {}x{}",
                m.nrows(),
                m.ncols()
            ));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return param("matrix has non-finite entries");
        }
        let scale = max_norm(&m).max(1.0);
        let out = Self(m);
        let defect = out.symplectic_defect();
        if defect > SYMPLECTIC_TOL * scale * scale {
            return param(format!("matrix is not symplectic (defect {defect:.3e})"));
        }
        Ok(out)
    }

    /// Wrap without checking. Only for matrices symplectic by construction.
    pub(crate) fn from_raw(m: DMatrix<f64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows().is_multiple_of(2));
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        assert!(
            dim.is_multiple_of(2) && dim > 0,
            "phase space dimension must be even"
        );
        Self(DMatrix::identity(dim, dim))
    }

    /// Build a 2×2 matrix from rows.
    pub fn from_rows_2x2(rows: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(
            2,
            2,
            &[rows[0][0], rows[0][1], rows[1][0], rows[1][1]],
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    /// `‖MᵀJM − J‖_max`.
    pub fn symplectic_defect(&self) -> f64 {
        let j = canonical_form(self.dim());
        max_norm(&(self.0.transpose() * &j * &self.0 - j))
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// `‖M − I‖_max`.
    pub fn distance_from_identity(&self) -> f64 {
        let d = self.dim();
        max_norm(&(&self.0 - DMatrix::<f64>::identity(d, d)))
    }

    /// Symplectic inverse `−J MᵀJ`, exact for symplectic input.
    pub fn inverse(&self) -> Self {
        let j = canonical_form(self.dim());
        Self(-(&j * self.0.transpose() * &j))
    }

    pub fn neg(&self) -> Self {
        Self(-&self.0)
    }

    /// `self · rhs`, i.e. `rhs` acts first.
    pub fn then_before(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: rhs.dim(),
            });
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = Self(&self.0 * &out.0);
        }
        out
    }

    /// Rows as nested vectors, for serialization.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

impl fmt::Debug for SymplecticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymplecticMatrix{:?}", self.to_rows())
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymplecticMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return param("matrix rows must all have the same length as the row count");
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }
}

impl From<SymplecticMatrix> for Vec<Vec<f64>> {
    fn from(m: SymplecticMatrix) -> Self {
        m.to_rows()
    }
}

fn check_mass(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return param(format!("mass must be positive, got {m}"));
    }
    Ok(())
}

/// Harmonic oscillator of frequency `omega` over time `t`.
pub fn mat_ho(omega: f64, t: f64, m: f64) -> Result<SymplecticMatrix> {
    check_mass(m)?;
    if !(omega >= 0.0 && omega.is_finite()) || !t.is_finite() {
        return param(format!(
            "need finite omega >= 0 and finite t, got omega={omega}, t={t}"
        ));
    }
    if omega == 0.0 {
        return mat_free(t, m);
    }
    let (s, c) = (omega * t).sin_cos();
    let mw = m * omega;
    Ok(SymplecticMatrix::from_raw(DMatrix::from_row_slice(
        2,
        2,
        &[c, s / mw, -mw * s, c],
    )))
}

/// Free particle over time `t` (negative `t` is free evolution backwards).
pub fn mat_free(t: f64, m: f64) -> Result<SymplecticMatrix> {
    check_mass(m)?;
    if !t.is_finite() {
        return param("time must be finite");
    }
    Ok(SymplecticMatrix::from_raw(DMatrix::from_row_slice(
        2,
        2,
        &[1.0, t / m, 0.0, 1.0],
    )))
}

/// Instantaneous kick of the potential `m F q²/2`.
pub fn mat_kick(f: f64, m: f64) -> Result<SymplecticMatrix> {
    check_mass(m)?;
    if !f.is_finite() {
        return param("kick strength must be finite");
    }
    Ok(SymplecticMatrix::from_raw(DMatrix::from_row_slice(
        2,
        2,
        &[1.0, 0.0, -m * f, 1.0],
    )))
}

/// Rigid rotation by `theta` about the z axis, acting on `(x, y, p_x, p_y)`.
pub fn rotation_xy(theta: f64) -> SymplecticMatrix {
    let (s, c) = theta.sin_cos();
    let mut m = DMatrix::zeros(4, 4);
    for off in [0, 2] {
        m[(off, off)] = c;
        m[(off, off + 1)] = -s;
        m[(off + 1, off)] = s;
        m[(off + 1, off + 1)] = c;
    }
    SymplecticMatrix::from_raw(m)
}

/// Product of `segments` in the order written: `segments[0]` is the latest
/// factor (leftmost), the last element acts first.
pub fn compose(segments: &[SymplecticMatrix]) -> Result<SymplecticMatrix> {
    let (first, rest) = segments
        .split_first()
        .ok_or_else(|| Error::Parameter("cannot compose an empty list".into()))?;
    rest.iter()
        .try_fold(first.clone(), |acc, m| acc.then_before(m))
}

/// Whether `m` is the identity within `tol` in the max norm. At operator level
/// this is `U = e^{iφ} I`.
pub fn is_loop(m: &SymplecticMatrix, tol: f64) -> bool {
    m.distance_from_identity() < tol
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return param(format!("lambda must be positive, got {lambda}"));
    }
    Ok(())
}

/// One side of the hexagonal loop: free flight `λ` after a kick `1/λ`.
fn hexagon_side(lambda: f64) -> Result<SymplecticMatrix> {
    compose(&[mat_free(lambda, 1.0)?, mat_kick(1.0 / lambda, 1.0)?])
}

/// Residual of the sixfold loop `(free(λ)·kick(1/λ))⁶ = I`.
pub fn verify_identity_2(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(hexagon_side(lambda)?.pow(6).distance_from_identity())
}

/// Residual of `kick(1/λ)·(free(λ)·kick(1/λ))⁵ = free(−λ)`: reversed free
/// evolution assembled from forward segments.
pub fn verify_identity_3(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let lhs = compose(&[mat_kick(1.0 / lambda, 1.0)?, hexagon_side(lambda)?.pow(5)])?;
    let target = mat_free(-lambda, 1.0)?;
    Ok(max_norm(&(lhs.matrix() - target.matrix())))
}

/// First and second moments of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry, positive definiteness and the uncertainty bound
    /// `cov + (i/2) J ⪰ 0`.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || !d.is_multiple_of(2) {
            return param("state dimension must be even and positive");
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                got: covariance.nrows(),
            });
        }
        let scale = max_norm(&covariance).max(1.0);
        if max_norm(&(&covariance - covariance.transpose())) > 1e-12 * scale {
            return param("covariance is not symmetric");
        }
        let eig = SymmetricEigen::new(covariance.clone());
        if eig.eigenvalues.iter().any(|&e| e <= 0.0) {
            return param("covariance is not positive definite");
        }
        let state = Self { mean, covariance };
        let bound = state.uncertainty_min_eigenvalue();
        if bound < -1e-10 * scale {
            return param(format!(
                "uncertainty relation violated (min eigenvalue {bound:.3e})"
            ));
        }
        Ok(state)
    }

    /// Vacuum of `n_modes` unit oscillators: zero mean, covariance `I/2`.
    pub fn vacuum(n_modes: usize) -> Self {
        let d = 2 * n_modes;
        Self {
            mean: DVector::zeros(d),
            covariance: DMatrix::identity(d, d) * 0.5,
        }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Smallest eigenvalue of the Hermitian matrix `cov + (i/2) J`, computed
    /// through its real symmetric embedding `[[C, −J/2], [J/2, C]]`.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let half_j = canonical_form(d) * 0.5;
        let mut emb = DMatrix::zeros(2 * d, 2 * d);
        emb.view_mut((0, 0), (d, d)).copy_from(&self.covariance);
        emb.view_mut((d, d), (d, d)).copy_from(&self.covariance);
        emb.view_mut((0, d), (d, d)).copy_from(&(-&half_j));
        emb.view_mut((d, 0), (d, d)).copy_from(&half_j);
        SymmetricEigen::new(emb).eigenvalues.min()
    }
}

/// Heisenberg-picture update of the first two moments:
/// `mean ↦ M mean`, `cov ↦ M cov Mᵀ`.
pub fn evolve_covariance(m: &SymplecticMatrix, s: &GaussianState) -> Result<GaussianState> {
    if m.dim() != s.dim() {
        return Err(Error::Dimension {
            expected: s.dim(),
            got: m.dim(),
        });
    }
    let mm = m.matrix();
    let mut cov = mm * &s.covariance * mm.transpose();
    // symmetrize
    cov = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianState {
        mean: mm * &s.mean,
        covariance: cov,
    })
}

/// Embed per-axis 2×2 blocks into a `2N×2N` matrix in `(q.., p..)` order.
pub fn block_embed(blocks: &[&SymplecticMatrix]) -> Result<SymplecticMatrix> {
    let n = blocks.len();
    if n == 0 {
        return param("need at least one block");
    }
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (i, b) in blocks.iter().enumerate() {
        if b.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: b.dim(),
            });
        }
        m[(i, i)] = b.get(0, 0);
        m[(i, n + i)] = b.get(0, 1);
        m[(n + i, i)] = b.get(1, 0);
        m[(n + i, n + i)] = b.get(1, 1);
    }
    Ok(SymplecticMatrix::from_raw(m))
}
