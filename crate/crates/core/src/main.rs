use std::process::ExitCode;

use clap::Parser;
use cantor_measure::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, err) = run(&cli);
    let text = serde_json::to_string_pretty(&report).expect("reports are plain JSON");
    println!("{text}");
    if let Some(path) = &cli.json {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(3);
        }
    }
    match err {
        Some(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
        None => ExitCode::SUCCESS,
    }
}
