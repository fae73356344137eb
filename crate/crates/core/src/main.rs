use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use sunburst::experiments::{self, Experiment, RunConfig};
use sunburst::Error;

#[derive(Parser)]
#[command(name = "sunburst", version, about = "Exact diagonalization and quench dynamics of the sunburst model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean level-spacing ratio against the coupling κ.
    Rratio(Args),
    /// Single-qubit quenches in the weak- and strong-field limits.
    QuenchLimits(Args),
    /// Time-averaged entropy against initial-state coherence.
    CoherenceTable(Args),
    /// Entropy and inverse participation ratio traces.
    IprTrace(Args),
    /// Maximally coherent quenches against the transition curve.
    TransitionCurve(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<Vec<PathBuf>, Error> {
    let (experiment, args) = match command {
        Command::Rratio(a) => (Experiment::RratioSweep, a),
        Command::QuenchLimits(a) => (Experiment::QuenchLimits, a),
        Command::CoherenceTable(a) => (Experiment::CoherenceTable, a),
        Command::IprTrace(a) => (Experiment::IprTrace, a),
        Command::TransitionCurve(a) => (Experiment::TransitionCurve, a),
    };
    let mut config = RunConfig::load(&args.config).map_err(|e| match e {
        Error::Io(io) => Error::Argument(format!("cannot read {}: {io}", args.config.display())),
        other => other,
    })?;
    match config.experiment {
        Some(e) if e != experiment => {
            return Err(Error::Argument(format!(
                "config is for {}, not {}",
                e.name(),
                experiment.name()
            )))
        }
        _ => config.experiment = Some(experiment),
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.output = Some(out);
    }
    let dir = config.output.clone().unwrap_or_else(|| PathBuf::from("."));
    let start = Instant::now();
    let artifacts = experiments::run(&config)?;
    experiments::write_run(&config, &artifacts, &dir, start.elapsed())
}
