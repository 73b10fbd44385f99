// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Locale-independent number formatting for CSV and reports.

/// `x` rounded to 10 significant digits, printed in the shortest form that
/// reads back to the rounded value. Very small or large magnitudes use
/// exponent notation.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if (1e-4..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}
