// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Residuals of the two hexagon identities, in which alternating free flights
//! and kicks close into a loop.
//!
//! Run with `cargo run --example loop_identities -- 0.5 1 2`.

use penning::symplectic::{verify_identity_2, verify_identity_3};

fn main() -> penning::Result<()> {
    let mut lambdas: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    if lambdas.is_empty() {
        lambdas = vec![0.1, 0.5, 1.0, 2.0, 10.0];
    }
    println!("{:>10} {:>14} {:>14}", "lambda", "identity 2", "identity 3");
    for l in lambdas {
        println!(
            "{l:>10} {:>14.3e} {:>14.3e}",
            verify_identity_2(l)?,
            verify_identity_3(l)?
        );
    }
    Ok(())
}
