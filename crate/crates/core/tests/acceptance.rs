// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use penning::floquet::{
    classify_stability, lambda_matrix, normal_modes, region_map, AxialFrequency, PhysicalField,
    RegionMapSpec, RotatingFieldConfig, StabilityClass, DEFAULT_DELTA_GAP, DEFAULT_EPS_STAB,
};
use penning::phases::{
    angle_distance, beta_floquet_lz, beta_floquet_sum, beta_loop, loop_phase, richardson_step,
    LoopSpectrumModel, StateDistribution,
};
use penning::reference::{rows_for, ReferenceRow};
use penning::solver::{multi_start_solve, MultiStartOptions, TargetClass};
use penning::symplectic::{evolve_covariance, verify_identity_2, verify_identity_3, GaussianState};
use penning::trap::{
    build_full_matrix, build_kicked_matrices, radial_ratio, scale_family, LoopSpec,
};
use penning::{KickSchedule, TrapConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_loop_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut lambdas = vec![0.5, 1.0, 2.0];
    // log-uniform over (0.01, 100)
    lambdas.extend((0..100).map(|_| 10f64.powf(rng.random_range(-2.0..2.0))));
    let mut worst = 0.0_f64;
    for &l in &lambdas {
        let r2 = verify_identity_2(l).map_err(|e| e.to_string())?;
        let r3 = verify_identity_3(l).map_err(|e| e.to_string())?;
        worst = worst.max(r2).max(r3);
        ensure(r2 < 1e-12 && r3 < 1e-12, || {
            format!("lambda {l}: residuals {r2:.3e}, {r3:.3e}")
        })?;
    }
    Ok(format!(
        "{} lambdas, worst residual {worst:.2e}",
        lambdas.len()
    ))
}

fn c2_penning_loops() -> Outcome {
    let cases = [
        ((3, 2), 2, (1, 4)),
        ((9, 4), 4, (7, 8)),
        ((33, 8), 8, (31, 16)),
    ];
    let mut worst = 0.0_f64;
    for ((p, q), k, (rp, rq)) in cases {
        let ratio = Ratio::new(p, q);
        let rho = radial_ratio(ratio).map_err(|e| e.to_string())?;
        ensure(rho == Some(Ratio::new(rp, rq)), || {
            format!("{ratio}: omega_rho/omega0 = {rho:?}")
        })?;
        let spec = LoopSpec::from_ratio(ratio, 64).map_err(|e| e.to_string())?;
        ensure(spec.map(|s| s.tau_periods) == Some(k), || {
            format!("{ratio}: loop at {spec:?}")
        })?;
        let cfg = TrapConfig::new(1.0, 1.0, p as f64 / q as f64).map_err(|e| e.to_string())?;
        let m = cfg
            .free_evolution(k as f64 * cfg.period())
            .map_err(|e| e.to_string())?;
        let d = m.distance_from_identity();
        worst = worst.max(d);
        ensure(d < 1e-10, || format!("{ratio}: |u(tau) - I| = {d:.3e}"))?;
    }
    Ok(format!("3 loops, worst |u - I| {worst:.2e}"))
}

fn block(kind: TargetClass) -> [bool; 2] {
    // whether (u_x, u_z) are Fourier-like (antidiagonal)
    match kind {
        TargetClass::Fourier3D => [true, true],
        TargetClass::FourierZScaleXY => [false, true],
        TargetClass::Scale3D => [false, false],
    }
}

fn c3_forward_tables() -> Outcome {
    let cfg = TrapConfig::default();
    let mut worst_off = 0.0_f64;
    let mut worst_rel = 0.0_f64;
    for kind in TargetClass::ALL {
        for (i, row) in rows_for(kind).iter().enumerate() {
            let sched =
                KickSchedule::from_dimensionless(&cfg, row.params).map_err(|e| e.to_string())?;
            let (ux, uz) = build_kicked_matrices(&cfg, &sched).map_err(|e| e.to_string())?;
            let mut lambdas = [0.0; 2];
            for (slot, (u, fourier)) in [(&uz, block(kind)[1]), (&ux, block(kind)[0])]
                .into_iter()
                .enumerate()
            {
                let (off, lam) = if fourier {
                    (
                        u.get(0, 0).abs().max(u.get(1, 1).abs()),
                        u.get(0, 1) * cfg.m() * cfg.omega0(),
                    )
                } else {
                    (u.get(0, 1).abs().max(u.get(1, 0).abs()), u.get(0, 0))
                };
                worst_off = worst_off.max(off);
                ensure(off < 5e-3, || {
                    format!("{kind} row {}: off-target entry {off:.3e}", i + 1)
                })?;
                lambdas[slot] = lam;
            }
            let ReferenceRow {
                lambda1, lambda2, ..
            } = *row;
            let (e1, e2) = (rel(lambdas[0], lambda1), rel(lambdas[1], lambda2));
            worst_rel = worst_rel.max(e1).max(e2);
            ensure(e1 < 2e-3 && e2 < 2e-3, || {
                format!(
                    "{kind} row {}: lambdas {lambdas:?} vs ({lambda1}, {lambda2})",
                    i + 1
                )
            })?;
        }
    }
    Ok(format!(
        "12 rows, worst off-target {worst_off:.2e}, worst lambda rel {worst_rel:.2e}"
    ))
}

fn c4_inverse_tables() -> Outcome {
    let cfg = TrapConfig::default();
    let opts = MultiStartOptions {
        n_starts: 2000,
        seed: 42,
        f_max: 10.0,
        ..MultiStartOptions::default()
    };
    let mut summary = Vec::new();
    for kind in TargetClass::ALL {
        let records = multi_start_solve(kind, &cfg, &opts).map_err(|e| e.to_string())?;
        for (i, row) in rows_for(kind).iter().enumerate() {
            let hit = records
                .iter()
                .filter(|r| row.params_match(&r.params, 1e-3))
                .min_by(|a, b| a.residual_norm.total_cmp(&b.residual_norm));
            let Some(hit) = hit else {
                return Err(format!(
                    "{kind} row {} not recovered ({} distinct roots)",
                    i + 1,
                    records.len()
                ));
            };
            ensure(hit.residual_norm < 1e-12, || {
                format!("{kind} row {}: residual {:.3e}", i + 1, hit.residual_norm)
            })?;
        }
        summary.push(format!("{}:{} roots", kind.token(), records.len()));
    }
    Ok(format!("all 12 rows recovered ({})", summary.join(", ")))
}

fn c5_scale_family() -> Outcome {
    let cfg = TrapConfig::default();
    let n = 1000;
    let (lo, hi) = (0.05, TAU - 0.05);
    let mut worst_uz = 0.0_f64;
    let mut worst_rel = 0.0_f64;
    for k in 0..n {
        let zeta = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let (sched, _) = scale_family(zeta, &cfg).map_err(|e| e.to_string())?;
        let (ux, uz) = build_kicked_matrices(&cfg, &sched).map_err(|e| e.to_string())?;
        let h = 0.5 * zeta;
        let lam = ((1.0 + h.cos()) / h.sin()).powi(2);
        let duz = uz.distance_from_identity();
        let e = rel(ux.get(0, 0), lam).max(rel(ux.get(1, 1), 1.0 / lam));
        worst_uz = worst_uz.max(duz);
        worst_rel = worst_rel.max(e);
        ensure(duz < 1e-10, || {
            format!("zeta {zeta}: |u_z - I| = {duz:.3e}")
        })?;
        ensure(e < 1e-9, || {
            format!("zeta {zeta}: diag(u_x) rel error {e:.3e}")
        })?;
        if zeta > PI {
            ensure(lam < 1.0 && ux.get(0, 0) < 1.0, || {
                format!("zeta {zeta}: lambda2 = {lam} not squeezing")
            })?;
        }
    }
    Ok(format!(
        "{n} points, worst |u_z - I| {worst_uz:.2e}, worst rel {worst_rel:.2e}"
    ))
}

fn c6_squeezing() -> Outcome {
    let cfg = TrapConfig::default();
    let row = rows_for(TargetClass::Scale3D)[3];
    let sched = KickSchedule::from_dimensionless(&cfg, row.params).map_err(|e| e.to_string())?;
    let m = build_full_matrix(&cfg, &sched).map_err(|e| e.to_string())?;
    let vac = GaussianState::vacuum(3);
    let out = evolve_covariance(&m, &vac).map_err(|e| e.to_string())?;
    let (s0, s1) = (vac.covariance(), out.covariance());
    let gz = s1[(2, 2)] / s0[(2, 2)];
    let gx = s1[(0, 0)] / s0[(0, 0)];
    let (ez, ex) = (rel(gz, row.lambda1.powi(2)), rel(gx, row.lambda2.powi(2)));
    ensure(ez < 5e-3 && ex < 5e-3, || {
        format!("variance gains z {gz}, x {gx}")
    })?;
    let det = |s: &DMatrix<f64>| s.determinant();
    let dd = (det(s1) - det(s0)).abs();
    ensure(dd < 1e-10, || format!("determinant changed by {dd:.3e}"))?;
    Ok(format!(
        "z gain rel {ez:.2e}, x gain rel {ex:.2e}, |d det| {dd:.1e}"
    ))
}

/// Decoupled frequencies at α = 0: `w` and `ω_ρ ± (α₀ + 1)` in magnitude.
fn field_free_frequencies(alpha0: f64, w: f64) -> [f64; 3] {
    let rho = (alpha0 * alpha0 - 0.5 * w * w).sqrt();
    let mut f = [w, (rho - alpha0 - 1.0).abs(), rho + alpha0 + 1.0];
    f.sort_by(f64::total_cmp);
    f
}

fn c7_floquet_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_h = 0.0_f64;
    for _ in 0..1000 {
        let cfg = RotatingFieldConfig::new(
            rng.random_range(0.0..3.0),
            rng.random_range(0.01..3.0),
            rng.random_range(0.01..3.0),
        )
        .map_err(|e| e.to_string())?;
        let d = lambda_matrix(&cfg).hamiltonian_defect();
        worst_h = worst_h.max(d);
        ensure(d < 1e-12, || format!("{cfg:?}: Hamiltonian defect {d:.3e}"))?;
    }
    let mut worst_f = 0.0_f64;
    let mut n_free = 0;
    while n_free < 200 {
        let (a0, w) = (rng.random_range(0.05..3.0), rng.random_range(0.05..3.0));
        if a0 * a0 <= 0.5 * w * w {
            continue;
        }
        let cfg = RotatingFieldConfig::new(0.0, a0, w).map_err(|e| e.to_string())?;
        let want = field_free_frequencies(a0, w);
        let rep = classify_stability(&cfg, DEFAULT_EPS_STAB, DEFAULT_DELTA_GAP);
        let err = rep
            .frequencies
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(rep.max_real_part, f64::max);
        worst_f = worst_f.max(err);
        ensure(err < 1e-10, || {
            format!("alpha0 {a0}, w {w}: {:?} vs {want:?}", rep.frequencies)
        })?;
        n_free += 1;
    }
    let mut worst_r = 0.0_f64;
    let mut n_conf = 0;
    while n_conf < 100 {
        let cfg = RotatingFieldConfig::new(
            rng.random_range(0.0..3.0),
            rng.random_range(0.01..3.0),
            rng.random_range(0.01..3.0),
        )
        .map_err(|e| e.to_string())?;
        if classify_stability(&cfg, DEFAULT_EPS_STAB, DEFAULT_DELTA_GAP).class
            != StabilityClass::Confined
        {
            continue;
        }
        let modes = normal_modes(&cfg).map_err(|e| format!("{cfg:?}: {e}"))?;
        let r = modes.reconstruction_error(&lambda_matrix(&cfg));
        worst_r = worst_r.max(r);
        ensure(r < 1e-8, || format!("{cfg:?}: reconstruction {r:.3e}"))?;
        n_conf += 1;
    }
    Ok(format!(
        "defect {worst_h:.2e}, alpha=0 freq err {worst_f:.2e}, reconstruction {worst_r:.2e}"
    ))
}

fn c8_geometric_phases() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let occupations: Vec<[u32; 3]> = (0..8)
        .map(|b| [b & 1, (b >> 1) & 1, (b >> 2) & 1])
        .collect();
    let mut worst = 0.0_f64;
    let mut points = 0;
    let mut ratios = Vec::new();
    let mut steps = Vec::new();
    while points < 20 {
        let cfg = RotatingFieldConfig::loop_constrained(
            rng.random_range(0.0..3.0),
            rng.random_range(0.1..3.0),
        )
        .map_err(|e| e.to_string())?;
        if classify_stability(&cfg, DEFAULT_EPS_STAB, DEFAULT_DELTA_GAP).class
            != StabilityClass::Confined
        {
            continue;
        }
        let phys = PhysicalField::from_dimensionless(&cfg, 1.0);
        for &n in &occupations {
            let step = richardson_step(&phys, n, 1e-7).map_err(|e| format!("{cfg:?}: {e}"))?;
            steps.push(step.delta);
            let s = beta_floquet_sum(&phys, n, step.delta).map_err(|e| format!("{cfg:?}: {e}"))?;
            let l = beta_floquet_lz(&phys, n).map_err(|e| format!("{cfg:?}: {e}"))?;
            let d = angle_distance(s.beta, l.beta);
            worst = worst.max(d);
            ensure(d < 1e-6, || {
                format!("{cfg:?} n={n:?}: sum {} vs lz {}", s.beta, l.beta)
            })?;
        }
        // successive halvings from a step whose truncation error is ~1e-6
        let h = richardson_step(&phys, [0, 0, 0], 1e-6)
            .map_err(|e| e.to_string())?
            .delta;
        let b = |d: f64| beta_floquet_sum(&phys, [0, 0, 0], d).map(|p| p.beta_unreduced);
        let (b1, b2, b3) = (
            b(h).map_err(|e| e.to_string())?,
            b(0.5 * h).map_err(|e| e.to_string())?,
            b(0.25 * h).map_err(|e| e.to_string())?,
        );
        let ratio = (b1 - b2) / (b2 - b3);
        ensure((3.5..=4.5).contains(&ratio), || {
            format!("{cfg:?}: Richardson ratio {ratio} at delta {h:.2e} ({b1}, {b2}, {b3})")
        })?;
        ratios.push(ratio);
        points += 1;
    }
    let span = |v: &[f64]| {
        v.iter()
            .fold((f64::MAX, f64::MIN), |(l, h), r| (l.min(*r), h.max(*r)))
    };
    let (lo, hi) = span(&ratios);
    let (slo, shi) = span(&steps);
    Ok(format!(
        "20 points x 8 states, worst |diff| {worst:.2e}, steps in [{slo:.1e}, {shi:.1e}], Richardson ratios in [{lo:.3}, {hi:.3}]"
    ))
}

fn c9_loop_phases() -> Outcome {
    let model = LoopSpectrumModel::two_period_loop(1.0).map_err(|e| e.to_string())?;
    let tau = 2.0 * model.axial_period();
    let phi = loop_phase(&model, tau).map_err(|e| e.to_string())?;
    let dphi = angle_distance(phi, PI);
    ensure(dphi < 1e-9, || format!("phi = {phi}"))?;
    // independent lattice check straight from the energy law
    let mut spread = 0.0_f64;
    for np in 0..9u32 {
        for nm in 0..9u32 {
            for nz in 0..9u32 {
                let (p, m, z) = (np as f64, nm as f64, nz as f64);
                let e = 0.25 * (p + m + 1.0) + (z + 0.5) - 0.75 * (p - m);
                spread = spread.max(angle_distance(-e * tau, phi));
            }
        }
    }
    ensure(spread < 1e-9, || format!("n-dependence {spread:.3e}"))?;
    let res = beta_loop(&model, tau, &StateDistribution::ground()).map_err(|e| e.to_string())?;
    let db = angle_distance(res.beta, 0.0);
    ensure(db < 1e-9, || format!("beta(ground) = {}", res.beta))?;
    Ok(format!(
        "phi - pi {dphi:.1e}, n-spread {spread:.1e}, beta(ground) {db:.1e}"
    ))
}

fn c10_region_map() -> Outcome {
    let spec = RegionMapSpec::new(
        "0:3:200"
            .parse()
            .map_err(|e: penning::Error| e.to_string())?,
        "0.1:3:200"
            .parse()
            .map_err(|e: penning::Error| e.to_string())?,
        AxialFrequency::LoopConstraint,
    );
    let a = region_map(&spec).map_err(|e| e.to_string())?;
    let b = region_map(&spec).map_err(|e| e.to_string())?;
    let csv = |m: &penning::floquet::RegionMap| {
        let mut buf = Vec::new();
        m.write_csv(&mut buf).map(|_| buf)
    };
    ensure(csv(&a).ok() == csv(&b).ok(), || "two scans differ".into())?;
    ensure(a.cells.len() == 40000, || {
        format!("{} cells", a.cells.len())
    })?;
    let mut marginal = Vec::new();
    for j in 0..200 {
        match a.cell(0, j).report.class {
            StabilityClass::Confined => {}
            StabilityClass::Marginal => marginal.push(j),
            StabilityClass::Deconfined => {
                return Err(format!(
                    "alpha = 0, alpha0 = {}: deconfined",
                    a.cell(0, j).alpha0
                ))
            }
        }
    }
    ensure(marginal.windows(2).all(|w| w[1] > w[0] + 1), || {
        format!("adjacent marginal points {marginal:?}")
    })?;
    let comps = a.confined_components();
    ensure(comps > 1, || format!("{comps} confined component(s)"))?;
    Ok(format!(
        "deterministic, alpha=0 column: {} marginal, {} confined components (alpha > 0), {} confined cells",
        marginal.len(),
        comps,
        a.count(StabilityClass::Confined)
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 loop identities", c1_loop_identity),
        ("2 Penning loop times", c2_penning_loops),
        ("3 forward table check", c3_forward_tables),
        ("4 inverse table check", c4_inverse_tables),
        ("5 closed-form scale family", c5_scale_family),
        ("6 squeezing on states", c6_squeezing),
        ("7 Floquet structure", c7_floquet_structure),
        ("8 geometric-phase cross-validation", c8_geometric_phases),
        ("9 loop phases", c9_loop_phases),
        ("10 stability map", c10_region_map),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {}/10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
