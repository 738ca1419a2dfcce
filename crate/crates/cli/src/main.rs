//! `ddchain`: run experiment specs from config files.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure (including
//! a failed tolerance check), 1 anything else (I/O).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ddchain::experiments::{run, ExperimentSpec, RunManifest};
use ddchain::Error;

#[derive(Parser)]
#[command(
    name = "ddchain",
    version,
    about = "Dynamical-decoupling experiments on spin-chain baths"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Solve moment constraints for pulse intervals (derive_sequences).
    Derive(Io),
    /// Within-cycle curves, insertion comparison, effective dynamics.
    Simulate(Io),
    /// N_op and first-cycle values over a field sweep (nop_sweep).
    Sweep(Io),
    /// Determinant oracle against many-body evolution (oracle_cross_check).
    Crosscheck(Io),
    /// Suppression-order slope of the cycle operator (slope_check).
    Slope(Io),
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

const VALIDATION: u8 = 2;
const NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_validation() => VALIDATION,
        Error::NotConverged { .. } | Error::NormDrift { .. } | Error::Unphysical(_) => NUMERICAL,
        _ => 1,
    }
}

fn load(verb: &str, path: &Path) -> Result<ExperimentSpec, (u8, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (VALIDATION, format!("cannot read config {}: {e}", path.display())))?;
    let spec = ExperimentSpec::parse(&text).map_err(|e| (exit_code(&e), format!("{}: {e}", path.display())))?;
    if spec.kind.verb() != verb {
        return Err((
            VALIDATION,
            format!(
                "kind '{}' belongs to `ddchain {}`, not `{verb}`",
                spec.kind,
                spec.kind.verb()
            ),
        ));
    }
    Ok(spec)
}

fn report(m: &RunManifest, out: &Path) {
    println!("{} -> {}", m.kind, out.display());
    for f in &m.outputs {
        println!("  wrote {f}");
    }
    for (k, v) in &m.metrics {
        println!("  {k} = {v}");
    }
    for c in &m.tolerance_report {
        let bounds = match (c.lower, c.upper) {
            (Some(l), Some(u)) => format!("[{l}, {u}]"),
            (Some(l), None) => format!(">= {l}"),
            (None, Some(u)) => format!("<= {u}"),
            (None, None) => String::new(),
        };
        println!(
            "  {} {} = {} {bounds}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value
        );
    }
    for n in &m.notes {
        println!("  note: {n}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, io) = match &cli.verb {
        Verb::Derive(io) => ("derive", io),
        Verb::Simulate(io) => ("simulate", io),
        Verb::Sweep(io) => ("sweep", io),
        Verb::Crosscheck(io) => ("crosscheck", io),
        Verb::Slope(io) => ("slope", io),
    };
    let spec = match load(verb, &io.config) {
        Ok(s) => s,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(code);
        }
    };
    match run(&spec, &io.out) {
        Ok(m) => {
            report(&m, &io.out);
            if m.all_passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "error: tolerance check failed; see {}",
                    io.out.join("manifest.json").display()
                );
                ExitCode::from(NUMERICAL)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
