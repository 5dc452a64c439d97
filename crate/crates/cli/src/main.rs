//! `honeycomb`: band structures of honeycomb Schrödinger operators from the
//! command line. Every subcommand writes plain data (CSV or JSON) for
//! plotting; nothing is rendered.

mod cache;
mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::*;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "honeycomb", version, about = "Honeycomb band-structure experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wallace dispersion on a grid covering the Brillouin zone.
    Tb(TbArgs),
    /// Ground state of a single well (cached).
    Ground(GroundArgs),
    /// Hopping scale `ρ_λ` over a list of λ.
    Rho(RhoArgs),
    /// Band structure along Γ–K–M–Γ.
    Bands(BandsArgs),
    /// Dirac point report at a Brillouin-zone vertex.
    Dirac(DiracArgs),
    /// Rescaled low bands against the tight-binding dispersion over λ.
    Converge(ConvergeArgs),
    /// Dual slices and the spectral no-fold verdicts.
    Nofold(NofoldArgs),
    /// Gap at K against the odd perturbation strength.
    Gap(GapArgs),
    /// Distance between the rescaled and tight-binding resolvents over λ.
    Resolvent(ResolventArgs),
    /// Grid verification of the distance inequalities.
    Geomlemma(LemmaArgs),
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Verdict(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numeric(_) => 2,
            Failure::Verdict(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Numeric(_) => "numeric",
            Failure::Verdict(_) => "verdict",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numeric(m) | Failure::Verdict(m) => m,
        }
    }
}

impl From<honeycomb_bands::Error> for Failure {
    fn from(e: honeycomb_bands::Error) -> Self {
        use honeycomb_bands::Error as E;
        match e {
            E::InvalidInput(_) | E::NotCoprime { .. } => Failure::Config(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Tb(a) => tb(a),
        Command::Ground(a) => ground(a),
        Command::Rho(a) => rho(a),
        Command::Bands(a) => bands(a),
        Command::Dirac(a) => dirac(a),
        Command::Converge(a) => converge(a),
        Command::Nofold(a) => nofold(a),
        Command::Gap(a) => gap(a),
        Command::Resolvent(a) => resolvent(a),
        Command::Geomlemma(a) => geomlemma(a),
    }
}

fn report(f: &Failure) {
    let record = json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "kind": f.kind(), "message": f.message() },
        "exit_code": f.code(),
    });
    eprintln!("{record}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::Config(e.to_string().trim().to_string());
            report(&f);
            return ExitCode::from(f.code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f);
            ExitCode::from(f.code())
        }
    }
}
