mod commands;
mod config;
mod report;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::{CmdContext, Failure, Overrides};

/// Workbench for two-component cubic Schrödinger systems: classification,
/// conserved-quantity synthesis, standard-form reduction, and long-time
/// simulation.
#[derive(Parser)]
#[command(name = "nlslab", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the interaction structure and synthesize conserved quantities.
    Analyze(RunArgs),
    /// Reduce the system to a standard form by a change of variables.
    Normalize(RunArgs),
    /// Integrate the reduced flow and check conservation and global bounds.
    OdeSim(RunArgs),
    /// Long-time dispersive run with decay-rate fitting.
    PdeSim(RunArgs),
    /// Run a subcommand over a cartesian parameter grid.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; defaults to the config's output.dir, then ".".
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the eigenvalue clustering tolerance.
    #[arg(long, value_name = "F")]
    tol: Option<f64>,
    /// Override the seed used for randomized changes of variables.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

fn main() {
    init_threads();
    let cli = Cli::parse();
    let (name, args): (&'static str, &RunArgs) = match &cli.command {
        Command::Analyze(a) => ("analyze", a),
        Command::Normalize(a) => ("normalize", a),
        Command::OdeSim(a) => ("ode-sim", a),
        Command::PdeSim(a) => ("pde-sim", a),
        Command::Sweep(a) => ("sweep", a),
    };
    if let Err(f) = run(name, args) {
        eprintln!("nlslab {name}: {}", f.message());
        std::process::exit(f.exit_code());
    }
}

fn run(name: &'static str, args: &RunArgs) -> Result<(), Failure> {
    let (raw, cfg) = config::load(&args.config).map_err(Failure::Config)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| {
        Failure::Other(anyhow::anyhow!(
            "cannot create output directory {}: {e}",
            out_dir.display()
        ))
    })?;
    let ctx = CmdContext {
        command: name,
        cfg: &cfg,
        out_dir,
        overrides: Overrides {
            tol: args.tol,
            seed: args.seed,
        },
    };
    if name == "sweep" {
        commands::sweep::run(&raw, &ctx)
    } else {
        commands::dispatch(name, &ctx)
    }
}

/// NLSLAB_THREADS caps worker parallelism; unset leaves the default pool.
fn init_threads() {
    let Ok(v) = std::env::var("NLSLAB_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n >= 1 => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => eprintln!("nlslab: ignoring NLSLAB_THREADS={v:?} (want a positive integer)"),
    }
}
