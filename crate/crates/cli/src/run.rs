//! Commands, flags and exit codes.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use twolocal::scenarios::{self, Report, Scenario, Verdict};
use twolocal::{Precision, Rational};

use crate::file::{parse_scenario, InputError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Expand,
    Residue,
    Pushforward,
    Symbol,
    Verify,
}

#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub precision: Option<i64>,
    pub seed: Option<u64>,
}

/// Process exit status; ordered so the worst outcome over several files wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Pass = 0,
    Violation = 1,
    InputError = 2,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// The result of one scenario file.
#[derive(Debug)]
pub struct Outcome {
    pub path: PathBuf,
    pub report: Result<Report, InputError>,
}

impl Outcome {
    pub fn exit(&self) -> Exit {
        match &self.report {
            Err(_) => Exit::InputError,
            Ok(r) if r.verdict == Verdict::Fail => Exit::Violation,
            Ok(_) => Exit::Pass,
        }
    }
}

fn apply(flags: &Flags, sc: &mut Scenario<Rational>) -> Result<(), String> {
    if let Some(n) = flags.precision {
        if n < 2 {
            return Err("--precision must be at least 2".into());
        }
        sc.check.precision = Precision::uniform(n);
    }
    if let Some(s) = flags.seed {
        sc.check.seed = s;
    }
    Ok(())
}

/// Runs one command on one file.
pub fn run_file(command: Command, path: &Path, flags: &Flags) -> Outcome {
    let report = (|| {
        let mut sc = parse_scenario(path)?;
        apply(flags, &mut sc).map_err(|message| InputError::Invalid { path: path.to_path_buf(), message })?;
        let r = match command {
            Command::Expand => scenarios::expand_report(&sc),
            Command::Residue => scenarios::residue_report(&sc),
            Command::Pushforward => scenarios::pushforward_report(&sc),
            Command::Symbol => scenarios::symbol_report(&sc),
            Command::Verify => scenarios::verify(&sc),
        };
        r.map_err(|source| InputError::Semantic { path: path.to_path_buf(), source })
    })();
    Outcome { path: path.to_path_buf(), report }
}

/// Runs files in parallel; outcomes come back in input order.
pub fn run_files(command: Command, paths: &[PathBuf], flags: &Flags) -> Vec<Outcome> {
    paths.par_iter().map(|p| run_file(command, p, flags)).collect()
}

/// Worst exit status over all outcomes.
pub fn exit_status(outcomes: &[Outcome]) -> Exit {
    outcomes.iter().map(Outcome::exit).max().unwrap_or(Exit::Pass)
}

/// Machine-readable reports back to back, in input order.
pub fn kv_reports(outcomes: &[Outcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        if let Ok(r) = &o.report {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&r.to_kv());
        }
    }
    out
}
