// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form squeezing family and its action on the vacuum.

use penning::symplectic::{evolve_covariance, GaussianState};
use penning::trap::{build_full_matrix, scale_family};
use penning::TrapConfig;
use std::f64::consts::PI;

fn main() -> penning::Result<()> {
    let cfg = TrapConfig::default();
    let vac = GaussianState::vacuum(3);
    println!(
        "{:>8} {:>12} {:>12} {:>12}",
        "zeta/pi", "lambda2", "var x", "var p_x"
    );
    for k in 1..12 {
        let zeta = k as f64 * PI / 6.0;
        let (sched, lambda2) = scale_family(zeta, &cfg)?;
        let m = build_full_matrix(&cfg, &sched)?;
        let s = evolve_covariance(&m, &vac)?;
        let c = s.covariance();
        println!(
            "{:>8.3} {lambda2:>12.5} {:>12.5} {:>12.5}",
            zeta / PI,
            c[(0, 0)],
            c[(3, 3)]
        );
    }
    Ok(())
}
