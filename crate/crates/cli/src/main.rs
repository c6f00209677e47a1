use clap::Parser;
use isodescent_cli::{run, RunConfig};

fn main() {
    let config = RunConfig::try_parse().unwrap_or_else(|e| e.exit());
    std::process::exit(run(&config));
}
