// SPDX-License-Identifier: Apache-2.0

use chiralwalk_cli::{execute, Cli};
use clap::Parser;

fn main() {
    let cli = Cli::parse();
    std::process::exit(execute(&cli));
}
