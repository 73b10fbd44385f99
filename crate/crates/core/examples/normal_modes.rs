// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Normal modes in the rotating frame: frequencies, Krein signs and the lowest
//! Floquet levels.

use penning::floquet::{floquet_energy, lambda_matrix, normal_modes};
use penning::RotatingFieldConfig;

fn main() -> penning::Result<()> {
    for (alpha, alpha0) in [(0.0, 0.75), (0.2, 0.75), (0.5, 2.4)] {
        let cfg = RotatingFieldConfig::loop_constrained(alpha, alpha0)?;
        match normal_modes(&cfg) {
            Ok(modes) => {
                println!(
                    "alpha {alpha}, alpha0 {alpha0}: omegas {:.6?} signs {:?} (reconstruction {:.1e})",
                    modes.omegas,
                    modes.signs,
                    modes.reconstruction_error(&lambda_matrix(&cfg))
                );
                for n in [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]] {
                    println!("  E{n:?} = {:.6}", floquet_energy(&modes, n));
                }
            }
            Err(e) => println!("alpha {alpha}, alpha0 {alpha0}: {e}"),
        }
    }
    Ok(())
}
