use clap::Parser;
use trifocal_service::cli::{run, Cli};

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("trifocal: {}", e.message);
        std::process::exit(e.code);
    }
}
