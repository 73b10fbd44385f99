// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Confinement under a rotating field, drawn as text. Rows are `α` (top is
//! `α = 0`), columns `α₀`; `#` confined, `.` deconfined, `?` marginal.

use penning::floquet::{region_map, AxialFrequency, RegionMapSpec, StabilityClass};

fn main() -> penning::Result<()> {
    let spec = RegionMapSpec::new(
        "0:3:30".parse()?,
        "0.1:3:72".parse()?,
        AxialFrequency::LoopConstraint,
    );
    let map = region_map(&spec)?;
    for i in 0..spec.alpha.count {
        let line: String = (0..spec.alpha0.count)
            .map(|j| match map.cell(i, j).report.class {
                StabilityClass::Confined => '#',
                StabilityClass::Deconfined => '.',
                StabilityClass::Marginal => '?',
            })
            .collect();
        println!("{:>5.2} {line}", spec.alpha.value(i));
    }
    println!(
        "confined components with alpha > 0: {}",
        map.confined_components()
    );
    Ok(())
}
