// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Two quadrupole kicks inside the `2T` loop: evolution matrices and their
//! classification for every tabulated schedule.

use penning::reference::rows_for;
use penning::solver::TargetClass;
use penning::trap::KickedRecord;
use penning::{KickSchedule, TrapConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = TrapConfig::default();
    for kind in TargetClass::ALL {
        println!("{kind}");
        for row in rows_for(kind) {
            let sched = KickSchedule::from_dimensionless(&cfg, row.params)?;
            let rec = KickedRecord::build(&cfg, &sched, 5e-3)?;
            println!(
                "  {:?} -> {:<16} lambda1 {:>9.4} lambda2 {:>9.4}",
                row.params,
                rec.class.as_str(),
                rec.lambda1.unwrap_or(f64::NAN),
                rec.lambda2.unwrap_or(f64::NAN)
            );
        }
    }
    let sched = KickSchedule::from_dimensionless(&cfg, rows_for(TargetClass::Fourier3D)[0].params)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&KickedRecord::build(&cfg, &sched, 5e-3)?)?
    );
    Ok(())
}
