// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Multi-start Newton search for kick schedules.
//!
//! Run with `cargo run --release --example pulse_search -- fourierz-scalexy 500`.

use penning::reference::match_report;
use penning::solver::{multi_start_solve, write_csv, MultiStartOptions, TargetClass};
use penning::TrapConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind: TargetClass = args.next().as_deref().unwrap_or("fourier3d").parse()?;
    let n_starts = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2000);
    let opts = MultiStartOptions {
        n_starts,
        ..MultiStartOptions::default()
    };
    let records = multi_start_solve(kind, &TrapConfig::default(), &opts)?;
    if records.len() <= 20 {
        write_csv(std::io::stdout(), &records)?;
    }
    let hits = match_report(kind, &records);
    println!(
        "{kind}: {} distinct roots, reference rows found: {:?}",
        records.len(),
        hits.iter().map(Option::is_some).collect::<Vec<_>>()
    );
    Ok(())
}
