// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! The trap under a magnetic field rotating about z at frequency `ω`.
//!
//! In the co-rotating frame the dynamics is generated by the time-independent
//! quadratic form `G = H(0) − ω L_z`. Everything in this module is expressed in
//! units `m = ω = 1`, so only the three dimensionless groups
//!
//! - `α  = |e|B /(2mcω)` (rotating component),
//! - `α₀ = |e|B₀/(2mcω) = ω_c/(2ω)` (static component),
//! - `w  = ω₀/ω` (axial trap frequency)
//!
//! enter. With `v = (x, y, z, p_x, p_y, p_z)` and `G = ½ vᵀ 𝒢 v`, the linear flow
//! is `v̇ = Λ v` with `Λ = J 𝒢`.

use nalgebra::{Matrix6, Schur, SVD};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::str::FromStr;

use crate::error::{param, Error, Result};
use crate::format::fmt_sig;
use crate::symplectic::SymplecticMatrix;

pub const DEFAULT_EPS_STAB: f64 = 1e-8;
pub const DEFAULT_DELTA_GAP: f64 = 1e-6;
/// Tolerance on `SᵀJS = J` and on the block reconstruction of `Λ`.
pub const MODE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatingFieldConfig {
    pub alpha: f64,
    pub alpha0: f64,
    pub w: f64,
}

impl RotatingFieldConfig {
    pub fn new(alpha: f64, alpha0: f64, w: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return param(format!("alpha must be >= 0, got {alpha}"));
        }
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return param(format!("alpha0 must be > 0, got {alpha0}"));
        }
        if !(w > 0.0 && w.is_finite()) {
            return param(format!("w must be > 0, got {w}"));
        }
        Ok(Self { alpha, alpha0, w })
    }

    /// Static fields tuned to the `2T` loop: `ω₀ = 2ω_c/3`, i.e. `w = 4α₀/3`.
    pub fn loop_constrained(alpha: f64, alpha0: f64) -> Result<Self> {
        Self::new(alpha, alpha0, 4.0 * alpha0 / 3.0)
    }
}

/// Physical frequencies from which the dimensionless groups follow.
/// `omega_b = |e|B/(mc)` is the cyclotron frequency of the rotating component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalField {
    pub omega: f64,
    pub omega_c: f64,
    pub omega_b: f64,
    pub omega0: f64,
}

impl PhysicalField {
    /// The physical field whose groups at rotation frequency `omega` are `cfg`.
    pub fn from_dimensionless(cfg: &RotatingFieldConfig, omega: f64) -> Self {
        Self {
            omega,
            omega_c: 2.0 * cfg.alpha0 * omega,
            omega_b: 2.0 * cfg.alpha * omega,
            omega0: cfg.w * omega,
        }
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        Self { omega, ..*self }
    }

    pub fn dimensionless(&self) -> Result<RotatingFieldConfig> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return param(format!(
                "rotation frequency must be positive, got {}",
                self.omega
            ));
        }
        RotatingFieldConfig::new(
            self.omega_b / (2.0 * self.omega),
            self.omega_c / (2.0 * self.omega),
            self.omega0 / self.omega,
        )
    }
}

pub fn canonical_form6() -> Matrix6<f64> {
    let mut j = Matrix6::zeros();
    for i in 0..3 {
        j[(i, 3 + i)] = 1.0;
        j[(3 + i, i)] = -1.0;
    }
    j
}

/// Symmetric `K` with `½ vᵀKv = x p_y − y p_x`.
pub fn angular_momentum_form() -> Matrix6<f64> {
    let mut k = Matrix6::zeros();
    k[(0, 4)] = 1.0;
    k[(4, 0)] = 1.0;
    k[(1, 3)] = -1.0;
    k[(3, 1)] = -1.0;
    k
}

/// `𝒢` with `G = ½ vᵀ𝒢v`: minimal coupling to `B(0) = (B, 0, B₀)` in the
/// symmetric gauge, the quadrupole potential, and `−L_z`.
pub fn hessian_g(cfg: &RotatingFieldConfig) -> Matrix6<f64> {
    let (a, a0, w) = (cfg.alpha, cfg.alpha0, cfg.w);
    // kinetic momentum π = p + M r, from (e/2c) r × B(0)
    let m = nalgebra::Matrix3::new(0.0, a0, 0.0, -a0, 0.0, a, 0.0, -a, 0.0);
    let w2 = w * w;
    let pot = nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::new(-0.5 * w2, -0.5 * w2, w2));
    let mut g = Matrix6::zeros();
    g.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(m.transpose() * m + pot));
    g.fixed_view_mut::<3, 3>(0, 3).copy_from(&m.transpose());
    g.fixed_view_mut::<3, 3>(3, 0).copy_from(&m);
    g.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&nalgebra::Matrix3::identity());
    g - angular_momentum_form()
}

/// Generator `Λ = J𝒢` of the co-rotating phase-space flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMatrix(pub Matrix6<f64>);

impl LambdaMatrix {
    /// `‖ΛᵀJ + JΛ‖_max`, zero for a Hamiltonian matrix.
    pub fn hamiltonian_defect(&self) -> f64 {
        let j = canonical_form6();
        (self.0.transpose() * j + j * self.0).amax()
    }

    /// Eigenvalues from the Schur form of the shifted matrix `Λ + cI`, with
    /// the shift subtracted afterwards. The unshifted QR iteration can stall
    /// on the `±λ` symmetric spectrum.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let scale = 1.0 + self.0.amax();
        for (c, max_iter) in [(0.5, 1000), (0.8, 1000), (0.3, 0)] {
            let shift = c * scale;
            let shifted = self.0 + Matrix6::identity() * shift;
            if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, max_iter) {
                return schur
                    .complex_eigenvalues()
                    .iter()
                    .map(|z| z - shift)
                    .collect();
            }
        }
        unreachable!("unbounded Schur iteration returned no result")
    }
}

pub fn lambda_matrix(cfg: &RotatingFieldConfig) -> LambdaMatrix {
    LambdaMatrix(canonical_form6() * hessian_g(cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    Confined,
    Deconfined,
    Marginal,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Confined => "Confined",
            Self::Deconfined => "Deconfined",
            Self::Marginal => "Marginal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub class: StabilityClass,
    pub max_real_part: f64,
    /// Smallest separation among `±ω₁, ±ω₂, ±ω₃`.
    pub min_frequency_gap: f64,
    /// The three largest imaginary parts, ascending.
    pub frequencies: [f64; 3],
}

fn report_from_eigenvalues(ev: &[Complex64], eps_stab: f64, delta_gap: f64) -> StabilityReport {
    let max_re = ev.iter().fold(0.0_f64, |acc, z| acc.max(z.re.abs()));
    let mut ims: Vec<f64> = ev.iter().map(|z| z.im).collect();
    ims.sort_by(|a, b| b.total_cmp(a));
    let mut freqs = [ims[2], ims[1], ims[0]];
    freqs.iter_mut().for_each(|f| *f = f.max(0.0));
    let min_gap = (2.0 * freqs[0])
        .min(freqs[1] - freqs[0])
        .min(freqs[2] - freqs[1]);
    let class = if max_re >= eps_stab {
        StabilityClass::Deconfined
    } else if min_gap > delta_gap {
        StabilityClass::Confined
    } else {
        StabilityClass::Marginal
    };
    StabilityReport {
        class,
        max_real_part: max_re,
        min_frequency_gap: min_gap,
        frequencies: freqs,
    }
}

/// Confined when every eigenvalue of `Λ` is imaginary (to `eps_stab`) and the
/// three frequencies are pairwise separated (by `delta_gap`).
pub fn classify_stability(
    cfg: &RotatingFieldConfig,
    eps_stab: f64,
    delta_gap: f64,
) -> StabilityReport {
    report_from_eigenvalues(&lambda_matrix(cfg).eigenvalues(), eps_stab, delta_gap)
}

/// Normal-mode frequencies, Krein signs and the real symplectic map to mode
/// quadratures. In mode coordinates `u = S⁻¹v`,
/// `G = ½ Σᵢ εᵢωᵢ (Qᵢ² + Pᵢ²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSpectrum {
    /// Ascending, in units of `ω`.
    pub omegas: [f64; 3],
    pub signs: [i8; 3],
    #[serde(skip)]
    pub s: Matrix6<f64>,
}

impl ModeSpectrum {
    pub fn transform(&self) -> SymplecticMatrix {
        SymplecticMatrix::from_raw(nalgebra::DMatrix::from_iterator(
            6,
            6,
            self.s.iter().copied(),
        ))
    }

    /// Rates `εᵢωᵢ`.
    pub fn rates(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.signs[i] as f64 * self.omegas[i])
    }

    /// `J · diag(r, r)`: the flow generator in mode coordinates.
    pub fn block_generator(&self) -> Matrix6<f64> {
        let r = self.rates();
        let mut d = Matrix6::zeros();
        for i in 0..3 {
            d[(i, i)] = r[i];
            d[(3 + i, 3 + i)] = r[i];
        }
        canonical_form6() * d
    }

    pub fn symplectic_defect(&self) -> f64 {
        let j = canonical_form6();
        (self.s.transpose() * j * self.s - j).amax()
    }

    /// `‖ΛS − S·blockdiag(εᵢωᵢ rotations)‖_max`.
    pub fn reconstruction_error(&self, lambda: &LambdaMatrix) -> f64 {
        (lambda.0 * self.s - self.s * self.block_generator()).amax()
    }
}

/// Null vector of `Λ − μI` from the smallest singular value.
fn eigenvector(lambda: &Matrix6<f64>, mu: Complex64) -> nalgebra::Vector6<Complex64> {
    let a: Matrix6<Complex64> = lambda.map(|x| Complex64::new(x, 0.0)) - Matrix6::identity() * mu;
    let svd = SVD::new(a, false, true);
    let vt = svd.v_t.expect("requested v_t");
    let k = svd.singular_values.imin();
    vt.row(k).adjoint()
}

pub fn normal_modes(cfg: &RotatingFieldConfig) -> Result<ModeSpectrum> {
    let report = classify_stability(cfg, DEFAULT_EPS_STAB, DEFAULT_DELTA_GAP);
    if report.class != StabilityClass::Confined {
        return Err(Error::NotConfined(format!(
            "{}: max |Re| = {:.3e}, min gap = {:.3e}",
            report.class.as_str(),
            report.max_real_part,
            report.min_frequency_gap
        )));
    }
    let lambda = lambda_matrix(cfg);
    let j = canonical_form6();
    let mut s = Matrix6::zeros();
    let mut signs = [0i8; 3];
    for (k, &omega) in report.frequencies.iter().enumerate() {
        let v = eigenvector(&lambda.0, Complex64::new(0.0, omega));
        let a = v.map(|z| z.re);
        let b = v.map(|z| z.im);
        // v̄ᵀJv = 2i aᵀJb
        let krein = (a.transpose() * j * b)[(0, 0)];
        if krein.abs() < 1e-10 {
            return Err(Error::Conditioning(format!(
                "mode {k} at frequency {omega} has vanishing Krein form {krein:.3e}"
            )));
        }
        let eps = krein.signum();
        let norm = krein.abs().sqrt();
        s.set_column(k, &(a / norm));
        s.set_column(3 + k, &(b * (eps / norm)));
        signs[k] = eps as i8;
    }
    let modes = ModeSpectrum {
        omegas: report.frequencies,
        signs,
        s,
    };
    let defect = modes.symplectic_defect();
    let recon = modes.reconstruction_error(&lambda);
    if defect > MODE_TOL || recon > MODE_TOL {
        return Err(Error::Conditioning(format!(
            "mode transform inaccurate (symplectic defect {defect:.3e}, reconstruction {recon:.3e}, min gap {:.3e})",
            report.min_frequency_gap
        )));
    }
    Ok(modes)
}

/// Level of `G` with `nᵢ` quanta in mode `i`: `Σᵢ εᵢωᵢ(nᵢ + ½)`.
pub fn floquet_energy(modes: &ModeSpectrum, n: [u32; 3]) -> f64 {
    modes
        .rates()
        .iter()
        .zip(n)
        .map(|(r, ni)| r * (ni as f64 + 0.5))
        .sum()
}

/// Evenly spaced samples `start:end:count`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return param("grid size must be positive");
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return param(format!(
                "grid range must have positive length, got {start}:{end}"
            ));
        }
        Ok(Self { start, end, count })
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.count == 1 {
            self.start
        } else {
            self.start + (self.end - self.start) * k as f64 / (self.count - 1) as f64
        }
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Parameter(format!("expected start:end:count, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start = parts[0].trim().parse().map_err(|_| bad())?;
        let end = parts[1].trim().parse().map_err(|_| bad())?;
        let count = parts[2].trim().parse().map_err(|_| bad())?;
        Self::new(start, end, count)
    }
}

/// How the axial frequency is chosen at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AxialFrequency {
    /// `w = 4α₀/3`.
    LoopConstraint,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMapSpec {
    pub alpha: GridAxis,
    pub alpha0: GridAxis,
    pub axial: AxialFrequency,
    pub eps_stab: f64,
    pub delta_gap: f64,
}

impl RegionMapSpec {
    pub fn new(alpha: GridAxis, alpha0: GridAxis, axial: AxialFrequency) -> Self {
        Self {
            alpha,
            alpha0,
            axial,
            eps_stab: DEFAULT_EPS_STAB,
            delta_gap: DEFAULT_DELTA_GAP,
        }
    }

    fn config(&self, i: usize, j: usize) -> Result<RotatingFieldConfig> {
        let (a, a0) = (self.alpha.value(i), self.alpha0.value(j));
        match self.axial {
            AxialFrequency::LoopConstraint => RotatingFieldConfig::loop_constrained(a, a0),
            AxialFrequency::Fixed(w) => RotatingFieldConfig::new(a, a0, w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionCell {
    pub alpha: f64,
    pub alpha0: f64,
    pub report: StabilityReport,
}

/// Stability over an `α × α₀` grid, row-major with `α` as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub spec: RegionMapSpec,
    pub cells: Vec<RegionCell>,
}

pub fn region_map(spec: &RegionMapSpec) -> Result<RegionMap> {
    let (na, na0) = (spec.alpha.count, spec.alpha0.count);
    if na == 0 || na0 == 0 {
        return param("grid sizes must be positive");
    }
    if !(spec.eps_stab > 0.0 && spec.delta_gap > 0.0) {
        return param("stability tolerances must be positive");
    }
    // all grid points are validated before the parallel pass
    let configs: Vec<RotatingFieldConfig> = (0..na * na0)
        .map(|idx| spec.config(idx / na0, idx % na0))
        .collect::<Result<_>>()?;
    let cells = configs
        .par_iter()
        .map(|cfg| RegionCell {
            alpha: cfg.alpha,
            alpha0: cfg.alpha0,
            report: classify_stability(cfg, spec.eps_stab, spec.delta_gap),
        })
        .collect();
    Ok(RegionMap { spec: *spec, cells })
}

pub const REGION_CSV_HEADER: &str = "alpha,alpha0,class,max_re,min_gap";

impl RegionMap {
    pub fn cell(&self, i_alpha: usize, j_alpha0: usize) -> &RegionCell {
        &self.cells[i_alpha * self.spec.alpha0.count + j_alpha0]
    }

    pub fn count(&self, class: StabilityClass) -> usize {
        self.cells
            .iter()
            .filter(|c| c.report.class == class)
            .count()
    }

    /// Number of 4-connected components of Confined cells with `α > 0`.
    ///
    /// The `α = 0` line is the field-free limit, where every point is
    /// confined; the instability tongues of the rotating field end on it, so
    /// distinct regions touch there only at isolated points.
    pub fn confined_components(&self) -> usize {
        let (na, na0) = (self.spec.alpha.count, self.spec.alpha0.count);
        let inside = |i: usize, j: usize| {
            let c = self.cell(i, j);
            c.alpha > 0.0 && c.report.class == StabilityClass::Confined
        };
        let mut seen = vec![false; na * na0];
        let mut components = 0;
        for start in 0..na * na0 {
            if seen[start] || !inside(start / na0, start % na0) {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(idx) = stack.pop() {
                let (i, j) = (idx / na0, idx % na0);
                let mut visit = |ni: usize, nj: usize| {
                    let n = ni * na0 + nj;
                    if !seen[n] && inside(ni, nj) {
                        seen[n] = true;
                        stack.push(n);
                    }
                };
                if i > 0 {
                    visit(i - 1, j);
                }
                if i + 1 < na {
                    visit(i + 1, j);
                }
                if j > 0 {
                    visit(i, j - 1);
                }
                if j + 1 < na0 {
                    visit(i, j + 1);
                }
            }
        }
        components
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{REGION_CSV_HEADER}")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_sig(c.alpha),
                fmt_sig(c.alpha0),
                c.report.class.as_str(),
                fmt_sig(c.report.max_real_part),
                fmt_sig(c.report.min_frequency_gap)
            )?;
        }
        Ok(())
    }
}
