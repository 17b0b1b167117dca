//! `harnack-lab`: command-line driver for the flow solver, the Harnack
//! monitors, the evolution-identity ladder and the inequality scans.
//!
//! Every subcommand reads a flat `key = value` config file and writes its
//! tables plus a `summary.json` into the output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::{Args, Parser, Subcommand};
use commands::{Context, Outcome};
use config::Config;
use error::{CliError, CliResult};
use output::OutputDir;
use serde_json::{json, Map};
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "harnack-lab", version, about = "Curvature flows of convex hypersurfaces and their Harnack quantities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Config file (`key = value` per line).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scan seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
    /// Run on a single worker thread.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the initial hypersurface and record the trajectory.
    Simulate(Common),
    /// Evolve and evaluate a Harnack quantity at every stored slice.
    Monitor(Common),
    /// Residuals and convergence orders of the evolution identities.
    VerifyEvolution(Common),
    /// Random scans of the pointwise inequalities and the zeta conditions.
    ScanInequalities(Common),
    /// Closed-form shrinking or expanding geodesic sphere.
    SphereExact(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common, fn(&Context) -> CliResult<Outcome>) {
        match self {
            Command::Simulate(c) => ("simulate", c, commands::simulate),
            Command::Monitor(c) => ("monitor", c, commands::monitor),
            Command::VerifyEvolution(c) => ("verify-evolution", c, commands::verify_evolution),
            Command::ScanInequalities(c) => ("scan-inequalities", c, commands::scan_inequalities),
            Command::SphereExact(c) => ("sphere-exact", c, commands::sphere_exact),
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run_cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (sub, common, f) = cli.command.parts();
    let go = || execute(sub, common, f);
    let code = if common.deterministic {
        match rayon::ThreadPoolBuilder::new().num_threads(1).build() {
            Ok(pool) => pool.install(go),
            Err(e) => {
                eprintln!("error: cannot build thread pool: {e}");
                3
            }
        }
    } else {
        go()
    };
    code
}

fn execute(sub: &str, common: &Common, f: fn(&Context) -> CliResult<Outcome>) -> i32 {
    let cfg = match Config::read(&common.config) {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    let fmt = match commands::output_format(&cfg) {
        Ok(f) => f,
        Err(e) => return report(&e),
    };
    let out = OutputDir::new(&common.out, common.force);
    let mut names: Vec<String> = commands::table_names(sub).iter().map(|t| format!("{t}.{}", fmt.ext())).collect();
    names.push("summary.json".into());
    if let Err(e) = out.claim(&names) {
        return report(&e);
    }
    let ctx = Context { cfg: &cfg, seed: common.seed };
    let (files, details, err) = match f(&ctx) {
        Ok(o) => match commands::write_all(&out, sub, fmt, &o) {
            Ok(files) => (files, o.details, o.failure),
            Err(e) => (vec![], o.details, Some(e)),
        },
        Err(e) => (vec![], Map::new(), Some(e)),
    };
    let code = err.as_ref().map_or(0, CliError::exit_code);
    let summary = json!({
        "subcommand": sub,
        "status": if code == 0 { "ok" } else { "error" },
        "exit_code": code,
        "message": err.as_ref().map_or(String::new(), |e| e.to_string()),
        "files": files,
        "details": details,
    });
    if let Err(e) = out.write("summary.json", &format!("{summary:#}\n")) {
        return report(&e);
    }
    if let Some(e) = &err {
        eprintln!("error: {e}");
    }
    code
}

fn report(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
