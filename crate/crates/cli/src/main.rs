use std::process::ExitCode;

use clap::Parser;
use guigen_cli::{run, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(report) => {
            println!("spec {} ({})", report.spec_path.display(), report.digest);
            for (backend, tree, archive) in &report.outputs {
                println!("{backend} {} {}", tree.display(), archive.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
