//! `reebkit`: verification and experiment subcommands over `.field` files.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 negative verdict.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::output::{to_json, write_file, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "reebkit", version, about = "Beltrami fields, Reeb fields and closed orbits on the 3-torus")]
struct Cli {
    /// Tolerance ladder for integration, crossings, Newton and acceptance.
    #[arg(long, global = true, default_value = "standard")]
    tolerance_profile: Profile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Standard,
    Loose,
    Strict,
}

impl Profile {
    fn name(self) -> &'static str {
        match self {
            Profile::Standard => "standard",
            Profile::Loose => "loose",
            Profile::Strict => "strict",
        }
    }

    pub fn tolerances(self) -> reebkit::Tolerances {
        reebkit::Tolerances::profile(self.name()).expect("documented profile")
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run contact, Beltrami, Euler, Reeb and curl-free checks.
    Verify(commands::VerifyArgs),
    /// Compute the Reeb field of a contact form, or verify a candidate.
    Reeb(commands::ReebArgs),
    /// Search for closed orbits through a Poincaré section.
    Orbits(commands::OrbitsArgs),
    /// Record Poincaré section crossings.
    Poincare(commands::PoincareArgs),
    /// ABC field constructor and diagnostics.
    Abc(commands::AbcArgs),
    /// Giroux normal form and its Reeb field.
    Giroux(commands::GirouxArgs),
    /// Kinetic energy of a field.
    Energy(commands::EnergyArgs),
    /// Metric and volume making a rescaled Reeb field curl-eigen.
    Adapt(commands::AdaptArgs),
}

/// Where the JSON report goes.
#[derive(Args, Debug, Clone, Serialize)]
pub struct OutArgs {
    /// Write the JSON report here instead of stdout; a sidecar
    /// `<out>.manifest.json` adds wall time and thread count.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a subcommand: a report and whether the verdict was positive.
pub struct Outcome {
    pub manifest: RunManifest,
    pub report: serde_json::Value,
    pub positive: bool,
    pub out: Option<PathBuf>,
}

/// Sizes the global pool from `REEBKIT_THREADS`, if set.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("REEBKIT_THREADS") else {
        return Ok(());
    };
    let n: usize =
        v.trim().parse().map_err(|_| anyhow::anyhow!("REEBKIT_THREADS must be a positive integer, got {v:?}"))?;
    anyhow::ensure!(n > 0, "REEBKIT_THREADS must be a positive integer, got {v:?}");
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let ctx = commands::Context { profile: cli.tolerance_profile };
    match cli.command {
        Command::Verify(a) => commands::verify(&ctx, a),
        Command::Reeb(a) => commands::reeb(&ctx, a),
        Command::Orbits(a) => commands::orbits(&ctx, a),
        Command::Poincare(a) => commands::poincare(&ctx, a),
        Command::Abc(a) => commands::abc(&ctx, a),
        Command::Giroux(a) => commands::giroux(&ctx, a),
        Command::Energy(a) => commands::energy(&ctx, a),
        Command::Adapt(a) => commands::adapt(&ctx, a),
    }
}

fn emit(outcome: Outcome, started: Instant) -> anyhow::Result<()> {
    let Outcome { mut manifest, report, out, .. } = outcome;
    let mut doc = serde_json::Map::new();
    doc.insert("manifest".into(), serde_json::to_value(&manifest)?);
    doc.insert("report".into(), report);
    let text = to_json(&doc)?;
    let wall = started.elapsed().as_secs_f64();
    match out {
        Some(path) => {
            write_file(&path, &text)?;
            manifest.wall_time_s = Some(wall);
            manifest.threads = Some(rayon::current_num_threads());
            let mut side = path.clone().into_os_string();
            side.push(".manifest.json");
            write_file(&PathBuf::from(side), &to_json(&manifest)?)?;
        }
        None => print!("{text}"),
    }
    eprintln!("wall time: {wall:.3} s");
    Ok(())
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match configure_threads().and_then(|()| run(cli)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let positive = outcome.positive;
    if let Err(e) = emit(outcome, started) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    if positive {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
