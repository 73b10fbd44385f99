// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Loop phase of the `2T` loop and geometric phases of Floquet states computed
//! from the frequency derivative and from `⟨L_z⟩`.

use penning::floquet::PhysicalField;
use penning::phases::{
    angle_distance, beta_floquet_lz, beta_floquet_sum, beta_loop, loop_phase, richardson_step,
    LoopSpectrumModel, StateDistribution,
};
use penning::RotatingFieldConfig;

fn main() -> penning::Result<()> {
    let model = LoopSpectrumModel::two_period_loop(1.0)?;
    let tau = 2.0 * model.axial_period();
    println!("loop phase phi = {:.12}", loop_phase(&model, tau)?);
    for n in [[0, 0, 0], [1, 0, 0], [0, 0, 1]] {
        let b = beta_loop(&model, tau, &StateDistribution::eigenstate(n))?;
        println!(
            "  beta{n:?} = {:.12} (unreduced {:.6})",
            b.beta, b.beta_unreduced
        );
    }

    let cfg = RotatingFieldConfig::loop_constrained(0.2, 0.75)?;
    let phys = PhysicalField::from_dimensionless(&cfg, 1.0);
    for n in [[0, 0, 0], [1, 0, 0], [0, 1, 1]] {
        let step = richardson_step(&phys, n, 1e-7)?;
        let sum = beta_floquet_sum(&phys, n, step.delta)?;
        let lz = beta_floquet_lz(&phys, n)?;
        println!(
            "floquet n={n:?}: sum {:.9} lz {:.9} |diff| {:.1e} (delta {:.1e})",
            sum.beta,
            lz.beta,
            angle_distance(sum.beta, lz.beta),
            step.delta
        );
    }
    Ok(())
}
