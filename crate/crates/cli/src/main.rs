//! `misfit-coarsen`: kernels, sharp-interface tables, Cahn-Hilliard and
//! Monte Carlo runs, and their analysis, driven by key-value config files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod keys;
mod manifest;
mod setup;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{analyze, evolve, kernel, sharp};

#[derive(Parser)]
#[command(name = "misfit-coarsen", version, about = "Coherent phase separation with elastic misfit")]
#[command(
    after_help = "Worker threads: MISFIT_THREADS (default: logical cores).\nExit codes: 0 ok, 1 config error, 2 numerical failure, 3 I/O."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Elastic kernel tables
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Sharp-interface energies, Gibbs-Thomson and LSW coarsening
    #[command(subcommand)]
    Sharp(SharpCmd),
    /// Elastic Cahn-Hilliard evolution (grid-parallel)
    #[command(after_help = keys::help(evolve::CH_KEYS))]
    EvolveCh(EvolveArgs<StepsArg>),
    /// Kawasaki Monte Carlo on the square lattice (serial chain)
    #[command(after_help = keys::help(evolve::MC_KEYS))]
    EvolveMc(EvolveArgs<SweepsArg>),
    /// Domain size, anisotropy and SAXS images of a run's snapshots (snapshot-parallel)
    Analyze(analyze::AnalyzeArgs),
}

#[derive(Subcommand)]
enum KernelCmd {
    /// Write B(k) in field format plus B on 360 azimuthal rays
    #[command(after_help = format!("{}\nOutputs: kernel.fld; kernel_rays.csv (theta_deg, B)", keys::help(kernel::KEYS)))]
    Dump(ConfigOut),
}

#[derive(Subcommand)]
enum SharpCmd {
    #[command(after_help = sharp::help(sharp::Which::Plate))]
    /// Laminate energy at volume fraction sharp.phi
    Plate(ConfigMaybeOut),
    #[command(after_help = sharp::help(sharp::Which::Sphere))]
    /// Dilute-sphere energy at volume fraction sharp.phi
    Sphere(ConfigMaybeOut),
    #[command(after_help = sharp::help(sharp::Which::Pair))]
    /// Eshelby interaction of two spheres
    Pair(ConfigMaybeOut),
    #[command(after_help = sharp::help(sharp::Which::Gt))]
    /// Gibbs-Thomson interfacial concentrations of one sphere
    Gt(ConfigMaybeOut),
    #[command(after_help = sharp::help(sharp::Which::Lsw))]
    /// Mean-field coarsening of a precipitate ensemble
    Lsw(ConfigMaybeOut),
    #[command(after_help = sharp::help(sharp::Which::Stability))]
    /// Stability of the uniform solid solution
    Stability(ConfigMaybeOut),
}

#[derive(Args)]
struct ConfigOut {
    /// Key-value config, or a run_manifest.json to repeat its run
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigMaybeOut {
    /// Key-value config, or a run_manifest.json to repeat its run
    #[arg(long)]
    config: PathBuf,
    /// Write the CSV and a run manifest here instead of printing to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StepsArg {
    /// Time steps
    #[arg(long)]
    steps: u64,
}

#[derive(Args)]
struct SweepsArg {
    /// Monte Carlo sweeps (N attempts each)
    #[arg(long)]
    sweeps: u64,
}

#[derive(Args)]
struct EvolveArgs<L: Args> {
    /// Key-value config, or a run_manifest.json to repeat its run
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    length: L,
    /// Snapshot interval; 0 keeps only the initial and final states
    #[arg(long, default_value_t = 0)]
    snap_every: u64,
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("MISFIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| misfit_core::Error::BadValue {
        key: "MISFIT_THREADS".into(),
        value: v.clone(),
        reason: "expected a positive integer".into(),
    })?;
    if n == 0 {
        return Err(misfit_core::Error::InvalidParameter("MISFIT_THREADS must be at least 1".into()).into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    match cli.cmd {
        Cmd::Kernel(KernelCmd::Dump(a)) => kernel::dump(&a.config, &a.out),
        Cmd::Sharp(s) => {
            let (which, a) = match s {
                SharpCmd::Plate(a) => (sharp::Which::Plate, a),
                SharpCmd::Sphere(a) => (sharp::Which::Sphere, a),
                SharpCmd::Pair(a) => (sharp::Which::Pair, a),
                SharpCmd::Gt(a) => (sharp::Which::Gt, a),
                SharpCmd::Lsw(a) => (sharp::Which::Lsw, a),
                SharpCmd::Stability(a) => (sharp::Which::Stability, a),
            };
            sharp::run(which, &a.config, a.out.as_deref())
        }
        Cmd::EvolveCh(a) => evolve::ch(&a.config, &a.out, a.length.steps, a.snap_every),
        Cmd::EvolveMc(a) => evolve::mc(&a.config, &a.out, a.length.sweeps, a.snap_every),
        Cmd::Analyze(a) => analyze::run(&a),
    }
}

/// 1 = config, 2 = numerical, 3 = I/O, taken from the first error in the
/// chain that knows its class.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(m) = cause.downcast_ref::<misfit_core::Error>() {
            return m.exit_code() as u8;
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
