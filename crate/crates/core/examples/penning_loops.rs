// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Evolution loops of the bare trap: exact rational analysis against the
//! numerically propagated 6×6 matrix.

use num_rational::Ratio;
use penning::trap::{find_loop_time, radial_ratio, LoopSpec};
use penning::TrapConfig;

fn main() -> penning::Result<()> {
    for (p, q) in [(3, 2), (9, 4), (33, 8), (2, 1), (5, 2)] {
        let ratio = Ratio::new(p, q);
        let cfg = TrapConfig::new(1.0, 1.0, p as f64 / q as f64)?;
        let rho = radial_ratio(ratio)?;
        let exact = LoopSpec::from_ratio(ratio, 64)?;
        let numeric = find_loop_time(&cfg, 64, 1e-9);
        print!("omega_c/omega0 = {ratio:<5} omega_rho/omega0 = ");
        match rho {
            Some(r) => print!("{r:<6}"),
            None => print!("{:<6}", "irr."),
        }
        match exact {
            Some(spec) => {
                let u = cfg.free_evolution(spec.tau_periods as f64 * cfg.period())?;
                println!(
                    " loop at {}T (scan: {numeric:?}), |u - I| = {:.1e}",
                    spec.tau_periods,
                    u.distance_from_identity()
                );
            }
            None => println!(" no loop within 64T (scan: {numeric:?})"),
        }
    }
    Ok(())
}
