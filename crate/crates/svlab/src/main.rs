//! Binary entry point: parse, dispatch, and report failures on stderr.

use clap::Parser;

use svlab::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
