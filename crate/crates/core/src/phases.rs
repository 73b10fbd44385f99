// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Loop phases and geometric phases.
//!
//! On an evolution loop every state returns to itself up to a common phase
//! `e^{iφ}`; the geometric part is `β = φ + τ⟨H⟩`. Under a rotating field the
//! Floquet states are cyclic with period `τ = 2π/ω` and their geometric phase is
//! available two ways: as `−2π ∂ℰ/∂ω`, and as `2π⟨L_z⟩`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use crate::error::{param, Error, Result};
use crate::floquet::{angular_momentum_form, normal_modes, ModeSpectrum, PhysicalField};
use crate::trap::TrapConfig;

/// Occupation lattice `0..=LATTICE_MAX` per mode used to test cyclicity.
pub const LATTICE_MAX: u32 = 8;
pub const LOOP_PHASE_TOL: f64 = 1e-9;
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Default finite-difference step, relative to `ω`.
pub const DEFAULT_REL_DELTA: f64 = 1e-5;
/// Range of steps, relative to `ω`, searched by [`richardson_step`].
pub const MAX_REL_DELTA: f64 = 1e-2;
pub const MIN_REL_DELTA: f64 = 1e-7;

/// Reduce to `[0, 2π)`. Values within `1e-12` below `2π` map to `0`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if TAU - r < 1e-12 {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Spectrum of the trap Hamiltonian in circular modes:
/// `ℰ(n₊, n₋, n_z) = ω_ρ(n₊ + n₋ + 1) + ω₀(n_z + ½) − (ω_c/2)(n₊ − n₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopSpectrumModel {
    pub omega_rho: f64,
    pub omega0: f64,
    pub omega_c: f64,
}

impl LoopSpectrumModel {
    pub fn new(omega_rho: f64, omega0: f64, omega_c: f64) -> Result<Self> {
        for (name, v) in [
            ("omega_rho", omega_rho),
            ("omega0", omega0),
            ("omega_c", omega_c),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return param(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(Self {
            omega_rho,
            omega0,
            omega_c,
        })
    }

    pub fn from_trap(cfg: &TrapConfig) -> Self {
        Self {
            omega_rho: cfg.omega_rho(),
            omega0: cfg.omega0(),
            omega_c: cfg.omega_c(),
        }
    }

    /// `ω_c = 3ω₀/2`, `ω_ρ = ω₀/4`.
    pub fn two_period_loop(omega0: f64) -> Result<Self> {
        Self::new(omega0 / 4.0, omega0, 1.5 * omega0)
    }

    /// Occupations are `[n₊, n₋, n_z]`.
    pub fn energy(&self, n: [u32; 3]) -> f64 {
        let [np, nm, nz] = n.map(f64::from);
        self.omega_rho * (np + nm + 1.0) + self.omega0 * (nz + 0.5) - 0.5 * self.omega_c * (np - nm)
    }

    /// `2π/ω₀`.
    pub fn axial_period(&self) -> f64 {
        TAU / self.omega0
    }
}

/// Populations `|c_n|²` over circular-mode occupations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDistribution {
    weights: BTreeMap<[u32; 3], f64>,
}

impl StateDistribution {
    pub fn new(weights: BTreeMap<[u32; 3], f64>) -> Result<Self> {
        if weights.is_empty() {
            return param("state distribution is empty");
        }
        if let Some((n, w)) = weights.iter().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return param(format!("weight of {n:?} must be nonnegative, got {w}"));
        }
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return param(format!("weights sum to {total}, expected 1"));
        }
        Ok(Self { weights })
    }

    pub fn eigenstate(n: [u32; 3]) -> Self {
        Self {
            weights: BTreeMap::from([(n, 1.0)]),
        }
    }

    pub fn ground() -> Self {
        Self::eigenstate([0, 0, 0])
    }

    pub fn weights(&self) -> &BTreeMap<[u32; 3], f64> {
        &self.weights
    }

    pub fn mean_energy(&self, model: &LoopSpectrumModel) -> f64 {
        self.weights.iter().map(|(n, w)| w * model.energy(*n)).sum()
    }
}

/// Common phase `φ = −ℰ_n τ mod 2π`, checked to be the same for every
/// occupation with `0 ≤ nᵢ ≤ 8`.
pub fn loop_phase(model: &LoopSpectrumModel, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return param(format!("loop time must be positive, got {tau}"));
    }
    let phi0 = reduce_angle(-model.energy([0, 0, 0]) * tau);
    let mut worst = 0.0_f64;
    let mut worst_n = [0; 3];
    for np in 0..=LATTICE_MAX {
        for nm in 0..=LATTICE_MAX {
            for nz in 0..=LATTICE_MAX {
                let n = [np, nm, nz];
                let d = angle_distance(-model.energy(n) * tau, phi0);
                if d > worst {
                    worst = d;
                    worst_n = n;
                }
            }
        }
    }
    if worst > LOOP_PHASE_TOL {
        return Err(Error::NotALoop(format!(
            "phase of occupation {worst_n:?} differs from the ground state by {worst:.3e} at tau = {tau}"
        )));
    }
    Ok(phi0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopPhase {
    pub phi: f64,
    /// `β` reduced to `[0, 2π)`.
    pub beta: f64,
    /// `φ + τ⟨H⟩` before reduction.
    pub beta_unreduced: f64,
    pub mean_energy: f64,
}

/// `β = φ + τ Σₙ ℰₙ |cₙ|²`.
pub fn beta_loop(
    model: &LoopSpectrumModel,
    tau: f64,
    state: &StateDistribution,
) -> Result<LoopPhase> {
    let phi = loop_phase(model, tau)?;
    let mean_energy = state.mean_energy(model);
    let raw = phi + tau * mean_energy;
    Ok(LoopPhase {
        phi,
        beta: reduce_angle(raw),
        beta_unreduced: raw,
        mean_energy,
    })
}

/// Physical frequencies `ω·ω̃ᵢ` and signs at the rotation frequency `omega`.
fn physical_modes(phys: &PhysicalField, omega: f64) -> Result<([f64; 3], [i8; 3])> {
    let modes = normal_modes(&phys.with_omega(omega).dimensionless()?)?;
    Ok((modes.omegas.map(|o| o * omega), modes.signs))
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Permutation `p` pairing center mode `i` with side mode `p[i]` by nearest
/// frequency; the pairing must be unambiguous and keep the Krein signs.
fn match_modes(center: &([f64; 3], [i8; 3]), side: &([f64; 3], [i8; 3])) -> Result<[usize; 3]> {
    let cost = |p: &[usize; 3]| -> f64 { (0..3).map(|i| (center.0[i] - side.0[p[i]]).abs()).sum() };
    let mut ranked: Vec<([usize; 3], f64)> = PERMUTATIONS.iter().map(|p| (*p, cost(p))).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (best, best_cost) = ranked[0];
    let runner_up = ranked[1].1;
    if best_cost.is_nan() || best_cost >= 0.5 * runner_up {
        return Err(Error::Stencil(format!(
            "mode frequencies are not separated across the stencil (costs {best_cost:.3e} vs {runner_up:.3e})"
        )));
    }
    if (0..3).any(|i| center.1[i] != side.1[best[i]]) {
        return Err(Error::Stencil(
            "Krein signs change across the stencil".to_string(),
        ));
    }
    Ok(best)
}

/// `∂ωᵢ/∂ω` by central difference at fixed `B`, `B₀`, `ω₀`, together with the
/// signs at the center. Modes are ordered by ascending center frequency.
pub fn mode_frequency_derivatives(phys: &PhysicalField, delta: f64) -> Result<([f64; 3], [i8; 3])> {
    let omega = phys.omega;
    if !(delta > 0.0 && delta < omega) {
        return param(format!(
            "finite-difference step must lie in (0, omega), got {delta}"
        ));
    }
    let center = physical_modes(phys, omega)?;
    let plus = physical_modes(phys, omega + delta)?;
    let minus = physical_modes(phys, omega - delta)?;
    let pp = match_modes(&center, &plus)?;
    let pm = match_modes(&center, &minus)?;
    let d = [0, 1, 2].map(|i| (plus.0[pp[i]] - minus.0[pm[i]]) / (2.0 * delta));
    Ok((d, center.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetPhase {
    pub beta: f64,
    pub beta_unreduced: f64,
}

impl FloquetPhase {
    fn from_raw(raw: f64) -> Self {
        Self {
            beta: reduce_angle(raw),
            beta_unreduced: raw,
        }
    }
}

/// `β = −2π Σᵢ εᵢ(nᵢ + ½) ∂ωᵢ/∂ω`, with `n` indexed like the ascending
/// frequencies of [`normal_modes`].
pub fn beta_floquet_sum(phys: &PhysicalField, n: [u32; 3], delta: f64) -> Result<FloquetPhase> {
    let (d, signs) = mode_frequency_derivatives(phys, delta)?;
    let raw: f64 = (0..3)
        .map(|i| signs[i] as f64 * (n[i] as f64 + 0.5) * d[i])
        .sum();
    Ok(FloquetPhase::from_raw(-TAU * raw))
}

/// Step chosen by the Richardson rule, with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonStep {
    pub delta: f64,
    /// `(4/3)|β(δ) − β(δ/2)|`, the leading truncation error of `β(δ)`.
    pub error_estimate: f64,
}

/// Largest step among `ω·2⁻ᵏ/100` whose estimated truncation error is below
/// `tol`. Steps whose stencil leaves the confined region are skipped.
pub fn richardson_step(phys: &PhysicalField, n: [u32; 3], tol: f64) -> Result<RichardsonStep> {
    if tol.is_nan() || tol <= 0.0 {
        return param(format!("tolerance must be positive, got {tol}"));
    }
    let smallest = MIN_REL_DELTA * phys.omega;
    let mut delta = MAX_REL_DELTA * phys.omega;
    let mut last_err = None;
    while delta >= smallest {
        let pair = beta_floquet_sum(phys, n, delta)
            .and_then(|a| beta_floquet_sum(phys, n, 0.5 * delta).map(|b| (a, b)));
        match pair {
            Ok((a, b)) => {
                let est = 4.0 / 3.0 * (a.beta_unreduced - b.beta_unreduced).abs();
                if est < tol {
                    return Ok(RichardsonStep {
                        delta,
                        error_estimate: est,
                    });
                }
                last_err = Some(format!("error estimate {est:.3e} at delta = {delta:.3e}"));
            }
            Err(e @ (Error::Parameter(_) | Error::TrapRegime(_))) => return Err(e),
            Err(e) => last_err = Some(e.to_string()),
        }
        delta *= 0.5;
    }
    Err(Error::Stencil(format!(
        "no step down to {smallest:.1e} meets tolerance {tol:.1e} ({})",
        last_err.unwrap_or_default()
    )))
}

/// `⟨L_z⟩` in the Floquet state `n`: `Σᵢ (nᵢ + ½) · ½ tr` of the `i`-th mode
/// block of `SᵀKS`.
pub fn angular_momentum_expectation(modes: &ModeSpectrum, n: [u32; 3]) -> f64 {
    let kp = modes.s.transpose() * angular_momentum_form() * modes.s;
    (0..3)
        .map(|i| (n[i] as f64 + 0.5) * 0.5 * (kp[(i, i)] + kp[(3 + i, 3 + i)]))
        .sum()
}

/// `β = 2π⟨L_z⟩`.
pub fn beta_floquet_lz(phys: &PhysicalField, n: [u32; 3]) -> Result<FloquetPhase> {
    let modes = normal_modes(&phys.dimensionless()?)?;
    Ok(FloquetPhase::from_raw(
        TAU * angular_momentum_expectation(&modes, n),
    ))
}

/// Period over which Floquet states are cyclic.
pub fn floquet_period(omega: f64) -> f64 {
    TAU / omega
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMethod {
    Sum,
    Lz,
    Loop,
}

/// JSON form `{"phi", "beta", "method", "n", "config"}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRecord {
    pub phi: Option<f64>,
    pub beta: f64,
    pub method: PhaseMethod,
    pub n: Vec<u32>,
    pub config: serde_json::Value,
}

/// Whether `x` equals `π` modulo `2π` within `tol`.
pub fn is_pi(x: f64, tol: f64) -> bool {
    angle_distance(x, PI) <= tol
}
