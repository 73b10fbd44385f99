// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(penning::cli::run(std::env::args_os()));
}
