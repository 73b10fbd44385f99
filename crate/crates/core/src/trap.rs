// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! The ideal Penning trap: configuration, evolution loops, and the
//! two-kick evolution matrices.
//!
//! The trap Hamiltonian splits into three commuting parts: an axial oscillator
//! of frequency `ω₀`, a rigid rotation `−(ω_c/2) L_z`, and a radial oscillator
//! of frequency `ω_ρ = √(ω_c² − 2ω₀²)/2`. Quadrupole kicks `∝ r² − 3z²` commute
//! with `L_z`, so when the rotation closes to `±I` at the end of the cycle the
//! x, y and z motions each reduce to a 2×2 matrix.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::symplectic::{
    block_embed, compose, is_loop, mat_ho, mat_kick, rotation_xy, SymplecticMatrix,
};

/// Mass and trap frequencies. `omega_rho` is derived on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    m: f64,
    omega0: f64,
    omega_c: f64,
    omega_rho: f64,
}

/// Construct a trap, rejecting parameters outside the trapping regime.
pub fn make_trap(m: f64, omega0: f64, omega_c: f64) -> Result<TrapConfig> {
    TrapConfig::new(m, omega0, omega_c)
}

impl TrapConfig {
    pub fn new(m: f64, omega0: f64, omega_c: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return param(format!("mass must be positive, got {m}"));
        }
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::TrapRegime(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(Error::TrapRegime(format!(
                "omega_c must be positive, got {omega_c}"
            )));
        }
        let rho_sq = (omega_c * omega_c - 2.0 * omega0 * omega0) / 4.0;
        if rho_sq <= 0.0 {
            return Err(Error::TrapRegime(format!(
                "omega_c^2 = {} must exceed 2 omega0^2 = {}",
                omega_c * omega_c,
                2.0 * omega0 * omega0
            )));
        }
        Ok(Self {
            m,
            omega0,
            omega_c,
            omega_rho: rho_sq.sqrt(),
        })
    }

    /// The loop with period `2T`: `ω_c = 3ω₀/2`, `ω_ρ = ω₀/4`.
    pub fn two_period_loop(m: f64, omega0: f64) -> Result<Self> {
        Self::new(m, omega0, 1.5 * omega0)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn omega_rho(&self) -> f64 {
        self.omega_rho
    }

    /// Axial period `T = 2π/ω₀`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega0
    }

    /// Unkicked 6×6 evolution matrix at time `t`, ordering
    /// `(x, y, z, p_x, p_y, p_z)`.
    pub fn free_evolution(&self, t: f64) -> Result<SymplecticMatrix> {
        let radial = mat_ho(self.omega_rho, t, self.m)?;
        let axial = mat_ho(self.omega0, t, self.m)?;
        let osc = block_embed(&[&radial, &radial, &axial])?;
        // x' = x cos θ + y sin θ under −(ω_c/2) L_z, i.e. a rotation by −θ.
        let rot = embed_xy_rotation(&rotation_xy(-0.5 * self.omega_c * t));
        osc.then_before(&rot)
    }
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self::two_period_loop(1.0, 1.0).expect("valid default trap")
    }
}

/// Place a 4×4 `(x, y, p_x, p_y)` matrix into the 6×6 phase space.
fn embed_xy_rotation(r: &SymplecticMatrix) -> SymplecticMatrix {
    let idx = [0, 1, 3, 4];
    let mut m = nalgebra::DMatrix::identity(6, 6);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            m[(i, j)] = r.get(a, b);
        }
    }
    SymplecticMatrix::from_raw(m)
}

/// Smallest `k ≤ max_periods` with the unkicked evolution at `kT` equal to the
/// identity within `tol`.
pub fn find_loop_time(cfg: &TrapConfig, max_periods: u32, tol: f64) -> Option<u32> {
    (1..=max_periods).find(|&k| {
        cfg.free_evolution(k as f64 * cfg.period())
            .map(|m| is_loop(&m, tol))
            .unwrap_or(false)
    })
}

/// Exact rational description of a loop: `ω_c/ω₀`, `ω_ρ/ω₀` and the loop
/// period in units of `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopSpec {
    pub ratio_c: Ratio<i64>,
    pub ratio_rho: Ratio<i64>,
    pub tau_periods: u32,
}

/// `ω_ρ/ω₀` for a rational `ω_c/ω₀`: a rational when `(c² − 2)/4` is a
/// rational square, `None` when irrational.
pub fn radial_ratio(ratio_c: Ratio<i64>) -> Result<Option<Ratio<i64>>> {
    if *ratio_c.numer() <= 0 || *ratio_c.denom() <= 0 {
        return Err(Error::TrapRegime(format!(
            "omega_c/omega0 = {ratio_c} must be positive"
        )));
    }
    let sq = (ratio_c * ratio_c - Ratio::from_integer(2)) / Ratio::from_integer(4);
    if *sq.numer() <= 0 {
        return Err(Error::TrapRegime(format!(
            "(omega_c/omega0)^2 = {} does not exceed 2",
            ratio_c * ratio_c
        )));
    }
    Ok(match (isqrt(*sq.numer()), isqrt(*sq.denom())) {
        (Some(n), Some(d)) => Some(Ratio::new(n, d)),
        _ => None,
    })
}

fn isqrt(v: i64) -> Option<i64> {
    if v < 0 {
        return None;
    }
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    (r * r == v).then_some(r)
}

impl LoopSpec {
    /// Exact loop analysis: at `t = kT` the axial motion is always closed, the
    /// radial oscillator is `(−1)^{2kr}` when `2kr ∈ ℤ` and the rotation is
    /// `(−1)^{kc}` when `kc ∈ ℤ`. The loop closes when both hold and the
    /// signs agree.
    pub fn from_ratio(ratio_c: Ratio<i64>, max_periods: u32) -> Result<Option<Self>> {
        let Some(ratio_rho) = radial_ratio(ratio_c)? else {
            return Ok(None);
        };
        for k in 1..=max_periods {
            let kk = Ratio::from_integer(k as i64);
            let rot = ratio_c * kk;
            let rad = ratio_rho * kk * Ratio::from_integer(2);
            if rot.is_integer() && rad.is_integer() && (rot + rad).to_integer() % 2 == 0 {
                return Ok(Some(Self {
                    ratio_c,
                    ratio_rho,
                    tau_periods: k,
                }));
            }
        }
        Ok(None)
    }
}

/// Two instantaneous quadrupole discharges within one cycle of length `tau`.
///
/// `f1`, `f2` are the kick strengths `F′`, `F″` (frequency units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickSchedule {
    pub t1: f64,
    pub t2: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    pub tau: f64,
}

impl KickSchedule {
    pub fn new(t1: f64, t2: f64, f1: f64, f2: f64, tau: f64) -> Result<Self> {
        let s = Self {
            t1,
            t2,
            f1,
            f2,
            tau,
        };
        s.validate()?;
        Ok(s)
    }

    /// From the dimensionless groups `ω₀t₁, ω₀t₂, F′/ω₀, F″/ω₀` over the
    /// `2T` cycle of `cfg`.
    pub fn from_dimensionless(cfg: &TrapConfig, groups: [f64; 4]) -> Result<Self> {
        let w = cfg.omega0();
        Self::new(
            groups[0] / w,
            groups[1] / w,
            groups[2] * w,
            groups[3] * w,
            2.0 * cfg.period(),
        )
    }

    /// `(ω₀t₁, ω₀t₂, F′/ω₀, F″/ω₀)`.
    pub fn dimensionless(&self, cfg: &TrapConfig) -> [f64; 4] {
        let w = cfg.omega0();
        [self.t1 * w, self.t2 * w, self.f1 / w, self.f2 / w]
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.t1, self.t2, self.f1, self.f2, self.tau];
        if all.iter().any(|x| !x.is_finite()) {
            return param("schedule has non-finite values");
        }
        if !(0.0 < self.t1 && self.t1 < self.t2 && self.t2 < self.tau) {
            return param(format!(
                "schedule must satisfy 0 < t1 < t2 < tau, got t1={}, t2={}, tau={}",
                self.t1, self.t2, self.tau
            ));
        }
        Ok(())
    }
}

/// Sign of the rigid rotation on the radial block at `tau`; it must close to
/// `±I` for the motion to factor per axis.
fn radial_rotation_sign(cfg: &TrapConfig, tau: f64) -> Result<f64> {
    let (s, c) = (0.5 * cfg.omega_c() * tau).sin_cos();
    if s.abs() > 1e-9 {
        return param(format!(
            "rotation by omega_c*tau/2 = {} is not a multiple of pi; the radial motion does not factor",
            0.5 * cfg.omega_c() * tau
        ));
    }
    Ok(c.signum())
}

/// Per-axis evolution matrices `(u_x, u_z)` at the end of the cycle
/// (`u_y = u_x`). For the `2T` loop the rotation contributes the leading
/// minus sign of `u_x`.
pub fn build_kicked_matrices(
    cfg: &TrapConfig,
    sched: &KickSchedule,
) -> Result<(SymplecticMatrix, SymplecticMatrix)> {
    sched.validate()?;
    let sign = radial_rotation_sign(cfg, sched.tau)?;
    let m = cfg.m();
    let (t1, t2, tau) = (sched.t1, sched.t2, sched.tau);

    let w = cfg.omega_rho();
    let ux = compose(&[
        mat_ho(w, tau - t2, m)?,
        mat_kick(-sched.f2 / 2.0, m)?,
        mat_ho(w, t2 - t1, m)?,
        mat_kick(-sched.f1 / 2.0, m)?,
        mat_ho(w, t1, m)?,
    ])?;
    let ux = if sign < 0.0 { ux.neg() } else { ux };

    let w = cfg.omega0();
    let uz = compose(&[
        mat_ho(w, tau - t2, m)?,
        mat_kick(sched.f2, m)?,
        mat_ho(w, t2 - t1, m)?,
        mat_kick(sched.f1, m)?,
        mat_ho(w, t1, m)?,
    ])?;
    Ok((ux, uz))
}

/// The 6×6 evolution matrix: `u_x` on the x and y pairs, `u_z` on z.
pub fn build_full_matrix(cfg: &TrapConfig, sched: &KickSchedule) -> Result<SymplecticMatrix> {
    let (ux, uz) = build_kicked_matrices(cfg, sched)?;
    block_embed(&[&ux, &ux, &uz])
}

/// Closed-form squeezing family: kicks a full axial period apart with
/// opposite strengths `F″/ω₀ = −F′/ω₀ = cot(ζ/2)`. The axial motion closes to
/// a loop and the radial motion becomes `diag(λ₂, 1/λ₂)` with
/// `λ₂ = ((1 + cos(ζ/2)) / sin(ζ/2))²`.
pub fn scale_family(zeta: f64, cfg: &TrapConfig) -> Result<(KickSchedule, f64)> {
    if !(zeta > 0.0 && zeta < 2.0 * PI) {
        return Err(Error::Domain(format!(
            "zeta must lie in (0, 2pi), got {zeta}"
        )));
    }
    if (cfg.omega_c() - 1.5 * cfg.omega0()).abs() > 1e-12 * cfg.omega0() {
        return param("scale family requires the 2T loop trap (omega_c = 3 omega0 / 2)");
    }
    let half = 0.5 * zeta;
    let cot = half.cos() / half.sin();
    let sched = KickSchedule::from_dimensionless(cfg, [zeta, zeta + 2.0 * PI, -cot, cot])?;
    let lambda2 = ((1.0 + half.cos()) / half.sin()).powi(2);
    Ok((sched, lambda2))
}

/// What a pair of per-axis matrices does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransformKind {
    /// `x → λ₂ p_x`, `z → λ₁ p_z`.
    Fourier3D,
    /// `z → λ₁ p_z`, `x → λ₂ x`.
    FourierZScaleXY,
    /// `x → λ₂ x`, `z → λ₁ z`.
    Scale3D,
    Loop,
    Other,
}

impl TransformKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fourier3D => "Fourier3D",
            Self::FourierZScaleXY => "FourierZScaleXY",
            Self::Scale3D => "Scale3D",
            Self::Loop => "Loop",
            Self::Other => "Other",
        }
    }
}

/// Classification with the scale parameters read off the matrices: the
/// upper-right entry for a Fourier-like block, the upper-left for a scale
/// block. Fourier values carry dimension `1/(mω₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: TransformKind,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
}

fn is_diagonal(u: &SymplecticMatrix, tol: f64) -> bool {
    u.get(0, 1).abs() < tol && u.get(1, 0).abs() < tol
}

fn is_antidiagonal(u: &SymplecticMatrix, tol: f64) -> bool {
    u.get(0, 0).abs() < tol && u.get(1, 1).abs() < tol
}

pub fn classify_transformation(
    ux: &SymplecticMatrix,
    uz: &SymplecticMatrix,
    tol: f64,
) -> Classification {
    let scale = |u: &SymplecticMatrix| Some(u.get(0, 0));
    let fourier = |u: &SymplecticMatrix| Some(u.get(0, 1));
    let (kind, lambda1, lambda2) = if is_loop(ux, tol) && is_loop(uz, tol) {
        (TransformKind::Loop, Some(1.0), Some(1.0))
    } else if is_diagonal(ux, tol) && is_diagonal(uz, tol) {
        (TransformKind::Scale3D, scale(uz), scale(ux))
    } else if is_diagonal(ux, tol) && is_antidiagonal(uz, tol) {
        (TransformKind::FourierZScaleXY, fourier(uz), scale(ux))
    } else if is_antidiagonal(ux, tol) && is_antidiagonal(uz, tol) {
        (TransformKind::Fourier3D, fourier(uz), fourier(ux))
    } else {
        (TransformKind::Other, None, None)
    };
    Classification {
        kind,
        lambda1,
        lambda2,
    }
}

impl Classification {
    /// Scale parameters in the dimensionless form of the reference tables:
    /// Fourier-like entries multiplied by `mω₀`, scale entries unchanged.
    pub fn dimensionless(&self, cfg: &TrapConfig) -> (Option<f64>, Option<f64>) {
        let mw = cfg.m() * cfg.omega0();
        match self.kind {
            TransformKind::Fourier3D => {
                (self.lambda1.map(|l| l * mw), self.lambda2.map(|l| l * mw))
            }
            TransformKind::FourierZScaleXY => (self.lambda1.map(|l| l * mw), self.lambda2),
            _ => (self.lambda1, self.lambda2),
        }
    }
}

/// JSON record of a schedule with its evolution matrices and classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickedRecord {
    pub t1: f64,
    pub t2: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    pub tau: f64,
    pub u_x: SymplecticMatrix,
    pub u_z: SymplecticMatrix,
    #[serde(rename = "class")]
    pub class: TransformKind,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
}

impl KickedRecord {
    pub fn build(cfg: &TrapConfig, sched: &KickSchedule, tol: f64) -> Result<Self> {
        let (u_x, u_z) = build_kicked_matrices(cfg, sched)?;
        let c = classify_transformation(&u_x, &u_z, tol);
        Ok(Self {
            t1: sched.t1,
            t2: sched.t2,
            f1: sched.f1,
            f2: sched.f2,
            tau: sched.tau,
            u_x,
            u_z,
            class: c.kind,
            lambda1: c.lambda1,
            lambda2: c.lambda2,
        })
    }
}
