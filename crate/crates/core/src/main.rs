// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    let code = qhconvex::cli::run(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
