use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sandwich_cli::{configure_workers, csv_from_json, exit_code, run, EXIT_ERROR};

#[derive(Parser)]
#[command(
    name = "sandwich",
    version,
    about = "Numerical checks of weighted fractional Poincaré–Sobolev inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a key=value config file.
    Run { config: PathBuf },
    /// Rebuild the CSV summary from a JSON detail file.
    Csv {
        json: PathBuf,
        /// Write here instead of standard output.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|()| match cli.command {
        Cmd::Run { config } => run(&config).map(|reports| {
            let failed = reports.iter().filter(|r| r.pass == Some(false)).count();
            eprintln!("{} reports, {failed} failed", reports.len());
            exit_code(&reports)
        }),
        Cmd::Csv { json, out } => csv_from_json(&json).and_then(|csv| {
            match out {
                Some(path) => std::fs::write(&path, csv)?,
                None => print!("{csv}"),
            }
            Ok(0)
        }),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
