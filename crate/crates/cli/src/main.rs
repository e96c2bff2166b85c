use std::io;
use std::process;

use clap::Parser;

use quench_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = run(&cli, &mut out, &mut io::stderr()) {
        eprintln!("error: {e}");
        process::exit(e.exit_code());
    }
}
