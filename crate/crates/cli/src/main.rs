use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use twolocal_cli::{exit_status, kv_reports, run_files, Command, Flags};

/// Residues, symbols and reciprocity checks on fibred surfaces.
///
/// Exit status: 0 pass, 1 law violation, 2 input error.
#[derive(Parser)]
#[command(name = "twolocal", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario files; several are evaluated in parallel.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Relative precision in both variables; overrides the file.
    #[arg(long)]
    precision: Option<i64>,
    /// Seed for sampled checks; overrides the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write key=value reports here.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let flags = Flags { precision: args.precision, seed: args.seed };
    let outcomes = run_files(args.command, &args.files, &flags);
    for o in &outcomes {
        match &o.report {
            Ok(r) => print!("{}", r.human()),
            Err(e) => eprintln!("error: {e}"),
        }
    }
    let mut status = exit_status(&outcomes);
    if let Some(path) = &args.report {
        if let Err(e) = std::fs::write(path, kv_reports(&outcomes)) {
            eprintln!("error: {}: {e}", path.display());
            status = status.max(twolocal_cli::Exit::InputError);
        }
    }
    ExitCode::from(status.code() as u8)
}
