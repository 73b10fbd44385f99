// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Inverse design of two-kick schedules.
//!
//! The unknowns are the dimensionless groups `(ω₀t₁, ω₀t₂, F′/ω₀, F″/ω₀)`;
//! the four equations ask the matrix entries that must vanish for the target
//! transformation to do so. Roots are found by damped Newton iteration with a
//! finite-difference Jacobian from many random starts.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::format::fmt_sig;
use crate::symplectic::SymplecticMatrix;
use crate::trap::{
    build_kicked_matrices, classify_transformation, KickSchedule, TransformKind, TrapConfig,
};

/// Residual norm below which Newton iteration stops.
pub const CONVERGED_NORM: f64 = 1e-12;
/// Residual norm required of every record handed back to callers.
pub const ACCEPT_NORM: f64 = 1e-10;
/// Central-difference step on every unknown (all are O(1)).
const FD_STEP: f64 = 1e-7;
const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetClass {
    Fourier3D,
    FourierZScaleXY,
    Scale3D,
}

impl TargetClass {
    pub const ALL: [TargetClass; 3] = [Self::Fourier3D, Self::FourierZScaleXY, Self::Scale3D];

    pub fn transform_kind(self) -> TransformKind {
        match self {
            Self::Fourier3D => TransformKind::Fourier3D,
            Self::FourierZScaleXY => TransformKind::FourierZScaleXY,
            Self::Scale3D => TransformKind::Scale3D,
        }
    }

    /// Command-line token.
    pub fn token(self) -> &'static str {
        match self {
            Self::Fourier3D => "fourier3d",
            Self::FourierZScaleXY => "fourierz-scalexy",
            Self::Scale3D => "scale3d",
        }
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.transform_kind().as_str())
    }
}

impl FromStr for TargetClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.token() == lower || k.to_string().to_ascii_lowercase() == lower)
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown kind '{s}', expected one of fourier3d, fourierz-scalexy, scale3d"
                ))
            })
    }
}

/// A polished schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub schedule: KickSchedule,
    /// `(ω₀t₁, ω₀t₂, F′/ω₀, F″/ω₀)`.
    pub params: [f64; 4],
    pub kind: TargetClass,
    /// `mω₀λ₁` for a Fourier-like z block, `λ₁` for a scale block.
    pub lambda1: f64,
    /// `mω₀λ₂` for a Fourier-like x-y block, `λ₂` for a scale block.
    pub lambda2: f64,
    pub residual_norm: f64,
    pub start_index: usize,
    pub iterations: usize,
}

/// Why a start did not yield a root.
#[derive(Debug, Clone, PartialEq)]
pub enum PolishFailure {
    InvalidSeed(String),
    /// No damped step reduced the residual while staying inside
    /// `0 < t₁ < t₂ < τ`.
    Stalled {
        iteration: usize,
        norm: f64,
    },
    NoConvergence {
        norm: f64,
    },
}

fn select(kind: TargetClass, ux: &SymplecticMatrix, uz: &SymplecticMatrix) -> [f64; 4] {
    match kind {
        TargetClass::Fourier3D => [ux.get(0, 0), ux.get(1, 1), uz.get(0, 0), uz.get(1, 1)],
        TargetClass::FourierZScaleXY => [ux.get(0, 1), ux.get(1, 0), uz.get(0, 0), uz.get(1, 1)],
        TargetClass::Scale3D => [ux.get(0, 1), ux.get(1, 0), uz.get(0, 1), uz.get(1, 0)],
    }
}

/// Entries that vanish exactly when the schedule realises `kind`.
pub fn residual(kind: TargetClass, sched: &KickSchedule, cfg: &TrapConfig) -> Result<[f64; 4]> {
    let (ux, uz) = build_kicked_matrices(cfg, sched)?;
    Ok(select(kind, &ux, &uz))
}

fn norm(r: &[f64; 4]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Problem<'a> {
    kind: TargetClass,
    cfg: &'a TrapConfig,
    /// `ω₀τ`.
    tau: f64,
}

impl Problem<'_> {
    fn feasible(&self, y: &[f64; 4]) -> bool {
        y.iter().all(|v| v.is_finite()) && 0.0 < y[0] && y[0] < y[1] && y[1] < self.tau
    }

    fn schedule(&self, y: &[f64; 4]) -> Result<KickSchedule> {
        let w = self.cfg.omega0();
        KickSchedule::new(y[0] / w, y[1] / w, y[2] * w, y[3] * w, self.tau / w)
    }

    fn eval(&self, y: &[f64; 4]) -> Option<[f64; 4]> {
        self.schedule(y)
            .and_then(|s| residual(self.kind, &s, self.cfg))
            .ok()
    }

    /// Central differences; the step shrinks near the box edges so both
    /// stencil points stay feasible.
    fn jacobian(&self, y: &[f64; 4]) -> Option<Matrix4<f64>> {
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let mut h = FD_STEP;
            let (rp, rm) = loop {
                let mut yp = *y;
                let mut ym = *y;
                yp[j] += h;
                ym[j] -= h;
                if self.feasible(&yp) && self.feasible(&ym) {
                    break (self.eval(&yp)?, self.eval(&ym)?);
                }
                h *= 0.5;
                if h < 1e-14 {
                    return None;
                }
            };
            for i in 0..4 {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        Some(jac)
    }

    fn polish(
        &self,
        y0: [f64; 4],
        max_iter: usize,
        start_index: usize,
    ) -> std::result::Result<SolutionRecord, PolishFailure> {
        if !self.feasible(&y0) {
            return Err(PolishFailure::InvalidSeed(format!(
                "seed {y0:?} violates 0 < t1 < t2 < tau"
            )));
        }
        let mut y = y0;
        let mut r = self
            .eval(&y)
            .ok_or_else(|| PolishFailure::InvalidSeed("seed could not be evaluated".into()))?;
        let mut n = norm(&r);
        let mut iterations = 0;
        while n >= CONVERGED_NORM {
            if iterations == max_iter {
                return Err(PolishFailure::NoConvergence { norm: n });
            }
            let stalled = PolishFailure::Stalled {
                iteration: iterations,
                norm: n,
            };
            let jac = self.jacobian(&y).ok_or(stalled.clone())?;
            let svd = jac.svd(true, true);
            let cutoff = 1e-12 * svd.singular_values.max();
            let step = svd
                .solve(&-Vector4::from(r), cutoff)
                .map_err(|_| stalled.clone())?;

            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let cand = [
                    y[0] + scale * step[0],
                    y[1] + scale * step[1],
                    y[2] + scale * step[2],
                    y[3] + scale * step[3],
                ];
                if self.feasible(&cand) {
                    if let Some(rc) = self.eval(&cand) {
                        let nc = norm(&rc);
                        if nc < n {
                            accepted = Some((cand, rc, nc));
                            break;
                        }
                    }
                }
                scale *= 0.5;
            }
            let (yn, rn, nn) = accepted.ok_or(stalled)?;
            y = yn;
            r = rn;
            n = nn;
            iterations += 1;
        }
        self.record(y, n, start_index, iterations)
            .map_err(|e| PolishFailure::InvalidSeed(e.to_string()))
    }

    fn record(
        &self,
        y: [f64; 4],
        n: f64,
        start_index: usize,
        iterations: usize,
    ) -> Result<SolutionRecord> {
        let schedule = self.schedule(&y)?;
        let (ux, uz) = build_kicked_matrices(self.cfg, &schedule)?;
        let (lambda1, lambda2) = extract_lambdas(self.kind, &ux, &uz, self.cfg);
        Ok(SolutionRecord {
            schedule,
            params: y,
            kind: self.kind,
            lambda1,
            lambda2,
            residual_norm: n,
            start_index,
            iterations,
        })
    }
}

/// Scale parameters of a converged schedule, in table units. A Scale3D root
/// that happens to be a loop classifies as `Loop`; its entries are then read
/// directly.
fn extract_lambdas(
    kind: TargetClass,
    ux: &SymplecticMatrix,
    uz: &SymplecticMatrix,
    cfg: &TrapConfig,
) -> (f64, f64) {
    let c = classify_transformation(ux, uz, 1e-9);
    if c.kind == kind.transform_kind() {
        if let (Some(l1), Some(l2)) = c.dimensionless(cfg) {
            return (l1, l2);
        }
    }
    let mw = cfg.m() * cfg.omega0();
    match kind {
        TargetClass::Fourier3D => (uz.get(0, 1) * mw, ux.get(0, 1) * mw),
        TargetClass::FourierZScaleXY => (uz.get(0, 1) * mw, ux.get(0, 0)),
        TargetClass::Scale3D => (uz.get(0, 0), ux.get(0, 0)),
    }
}

/// Damped Newton iteration from `seed`.
pub fn newton_polish(
    kind: TargetClass,
    seed: &KickSchedule,
    cfg: &TrapConfig,
    max_iter: usize,
) -> std::result::Result<SolutionRecord, PolishFailure> {
    seed.validate()
        .map_err(|e| PolishFailure::InvalidSeed(e.to_string()))?;
    let problem = Problem {
        kind,
        cfg,
        tau: seed.tau * cfg.omega0(),
    };
    problem.polish(seed.dimensionless(cfg), max_iter, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiStartOptions {
    pub n_starts: usize,
    pub seed: u64,
    /// Kick strengths are drawn from `[−f_max, f_max]` (in units of `ω₀`).
    pub f_max: f64,
    pub max_iter: usize,
    pub dedup_tol: f64,
}

impl Default for MultiStartOptions {
    fn default() -> Self {
        Self {
            n_starts: 2000,
            seed: 42,
            f_max: 10.0,
            max_iter: 100,
            dedup_tol: 1e-6,
        }
    }
}

/// Uniform starting points over the `2T` cycle, generated up front so the
/// polishing order cannot affect them.
pub fn draw_starts(opts: &MultiStartOptions, tau: f64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.n_starts)
        .map(|_| {
            let a: f64 = rng.random_range(0.0..tau);
            let b: f64 = rng.random_range(0.0..tau);
            let f1: f64 = rng.random_range(-opts.f_max..=opts.f_max);
            let f2: f64 = rng.random_range(-opts.f_max..=opts.f_max);
            [a.min(b), a.max(b), f1, f2]
        })
        .collect()
}

/// Polish every start and return the distinct accepted roots, sorted.
pub fn multi_start_solve(
    kind: TargetClass,
    cfg: &TrapConfig,
    opts: &MultiStartOptions,
) -> Result<Vec<SolutionRecord>> {
    if opts.n_starts == 0 {
        return param("need at least one start");
    }
    if !(opts.f_max > 0.0 && opts.f_max.is_finite()) {
        return param(format!("f_max must be positive, got {}", opts.f_max));
    }
    if opts.dedup_tol.is_nan() || opts.dedup_tol <= 0.0 {
        return param("dedup tolerance must be positive");
    }
    let problem = Problem {
        kind,
        cfg,
        tau: 2.0 * cfg.period() * cfg.omega0(),
    };
    let starts = draw_starts(opts, problem.tau);
    let found: Vec<SolutionRecord> = starts
        .par_iter()
        .enumerate()
        .filter_map(|(i, y0)| problem.polish(*y0, opts.max_iter, i).ok())
        .filter(|rec| rec.residual_norm < ACCEPT_NORM)
        .collect();
    Ok(dedup_solutions(found, opts.dedup_tol))
}

fn lex_params(a: &SolutionRecord, b: &SolutionRecord) -> Ordering {
    a.params
        .iter()
        .zip(&b.params)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Merge records whose four parameters agree within `tol`, keeping the
/// lowest-residual one, and sort lexicographically by parameters.
pub fn dedup_solutions(mut records: Vec<SolutionRecord>, tol: f64) -> Vec<SolutionRecord> {
    records.sort_by(|a, b| {
        a.residual_norm
            .total_cmp(&b.residual_norm)
            .then(a.start_index.cmp(&b.start_index))
            .then_with(|| lex_params(a, b))
    });
    let mut kept: Vec<SolutionRecord> = Vec::new();
    for rec in records {
        let dup = kept.iter().any(|k| {
            k.params
                .iter()
                .zip(&rec.params)
                .all(|(a, b)| (a - b).abs() <= tol)
        });
        if !dup {
            kept.push(rec);
        }
    }
    kept.sort_by(lex_params);
    kept
}

pub const CSV_HEADER: &str = "omega0_t1,omega0_t2,F1_over_omega0,F2_over_omega0,m_omega0_lambda1,lambda2_or_m_omega0_lambda2,kind,residual";

pub fn write_csv<W: Write>(mut out: W, records: &[SolutionRecord]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_sig(r.params[0]),
            fmt_sig(r.params[1]),
            fmt_sig(r.params[2]),
            fmt_sig(r.params[3]),
            fmt_sig(r.lambda1),
            fmt_sig(r.lambda2),
            r.kind,
            fmt_sig(r.residual_norm),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use crate::trap::scale_family;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cfg() -> TrapConfig {
        TrapConfig::default()
    }

    #[test]
    fn residual_selectors() {
        let c = cfg();
        let s = KickSchedule::new(1.0, 2.0, 0.0, 0.0, 4.0 * PI).unwrap();
        let r = residual(TargetClass::Scale3D, &s, &c).unwrap();
        assert!(norm(&r) < 1e-14, "{r:?}");
        let row = reference::FOURIER_3D[2];
        let s = KickSchedule::from_dimensionless(&c, row.params).unwrap();
        assert!(norm(&residual(TargetClass::Fourier3D, &s, &c).unwrap()) < 5e-3);
        let row = reference::SCALE_3D[0];
        let s = KickSchedule::from_dimensionless(&c, row.params).unwrap();
        assert!(norm(&residual(TargetClass::Scale3D, &s, &c).unwrap()) < 5e-3);
        let bad = KickSchedule {
            t1: 2.0,
            t2: 1.0,
            f1: 0.0,
            f2: 0.0,
            tau: 4.0 * PI,
        };
        assert!(residual(TargetClass::Scale3D, &bad, &c).is_err());
    }

    #[test]
    fn polish_reference_seeds() {
        let c = cfg();
        let row = reference::FOURIER_3D[0];
        let seed = KickSchedule::from_dimensionless(&c, row.params).unwrap();
        let rec = newton_polish(TargetClass::Fourier3D, &seed, &c, 50).unwrap();
        assert!(rec.residual_norm < 1e-12);
        assert!(row.params_match(&rec.params, 1e-3));
        assert_relative_eq!(rec.lambda2, -39.0332, max_relative = 1e-3);

        let row = reference::FOURIER_Z_SCALE_XY[3];
        let seed = KickSchedule::from_dimensionless(&c, row.params).unwrap();
        let rec = newton_polish(TargetClass::FourierZScaleXY, &seed, &c, 50).unwrap();
        assert_relative_eq!(rec.lambda2, -0.2751, max_relative = 1e-3);
    }

    #[test]
    fn closed_form_family_is_already_a_root() {
        let c = cfg();
        let (seed, l2) = scale_family(1.5 * PI, &c).unwrap();
        let rec = newton_polish(TargetClass::Scale3D, &seed, &c, 50).unwrap();
        assert!(rec.iterations <= 2);
        assert!(rec.residual_norm < 1e-12);
        assert_relative_eq!(rec.lambda2, l2, max_relative = 1e-9);
        assert_relative_eq!(rec.lambda1, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn polish_failures_are_values() {
        let c = cfg();
        let seed = KickSchedule {
            t1: 3.0,
            t2: 1.0,
            f1: 0.0,
            f2: 0.0,
            tau: 4.0 * PI,
        };
        assert!(matches!(
            newton_polish(TargetClass::Scale3D, &seed, &c, 10),
            Err(PolishFailure::InvalidSeed(_))
        ));
        let seed = KickSchedule::new(0.3, 0.31, 9.0, -9.0, 4.0 * PI).unwrap();
        assert!(newton_polish(TargetClass::Fourier3D, &seed, &c, 0).is_err());
    }

    #[test]
    fn multi_start_rejects_zero_starts() {
        let opts = MultiStartOptions {
            n_starts: 0,
            ..Default::default()
        };
        assert!(multi_start_solve(TargetClass::Fourier3D, &cfg(), &opts).is_err());
    }

    #[test]
    fn starts_are_seeded_and_ordered() {
        let opts = MultiStartOptions {
            n_starts: 50,
            seed: 7,
            ..Default::default()
        };
        let a = draw_starts(&opts, 4.0 * PI);
        assert_eq!(a, draw_starts(&opts, 4.0 * PI));
        assert!(a
            .iter()
            .all(|y| y[0] <= y[1] && y[1] < 4.0 * PI && y[2].abs() <= 10.0));
        let other = draw_starts(&MultiStartOptions { seed: 8, ..opts }, 4.0 * PI);
        assert_ne!(a, other);
    }

    fn rec(params: [f64; 4], residual_norm: f64, start_index: usize) -> SolutionRecord {
        let c = cfg();
        SolutionRecord {
            schedule: KickSchedule::from_dimensionless(&c, params).unwrap(),
            params,
            kind: TargetClass::Scale3D,
            lambda1: 1.0,
            lambda2: 1.0,
            residual_norm,
            start_index,
            iterations: 0,
        }
    }

    #[test]
    fn dedup_keeps_best_and_sorts() {
        assert!(dedup_solutions(vec![], 1e-6).is_empty());
        let p = reference::SCALE_3D[3].params;
        let mut q = p;
        q[0] += 1e-9;
        let out = dedup_solutions(vec![rec(p, 1e-13, 0), rec(q, 1e-15, 1)], 1e-6);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].start_index, 1);

        let out = dedup_solutions(
            vec![
                rec(reference::SCALE_3D[3].params, 1e-13, 0),
                rec(reference::SCALE_3D[0].params, 1e-13, 1),
            ],
            1e-6,
        );
        assert_eq!(out.len(), 2);
        assert!(out[0].params[0] < out[1].params[0]);
    }

    #[test]
    fn kind_tokens_round_trip() {
        for k in TargetClass::ALL {
            assert_eq!(k.token().parse::<TargetClass>().unwrap(), k);
            assert_eq!(k.to_string().parse::<TargetClass>().unwrap(), k);
        }
        assert!("squeeze".parse::<TargetClass>().is_err());
    }
}
