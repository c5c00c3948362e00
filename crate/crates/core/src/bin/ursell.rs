use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ursell::experiments::{exit_code, exit_code_for, run, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ursell", version, about = "Connected correlators and multipartite Lieb-Robinson checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (JSON). Defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// XX-chain u_n(t): closed form against dense simulation.
    Figure4(RunArgs),
    /// GHZ correlators from Bernoulli numbers, dense and asymptotic.
    GhzScan(RunArgs),
    /// Tripartite example state: u_3 and the three bipartite cuts.
    Tripartite(RunArgs),
    /// Graph-state correlators via stabilizers (and densely when small).
    Cluster(RunArgs),
    /// Multipartite envelope check with calibrated or fixed (c2, v).
    BoundCheck(RunArgs),
    /// Randomised agreement of the three correlator definitions.
    Xcheck(RunArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Figure4(a) => (Experiment::Figure4, a),
        Command::GhzScan(a) => (Experiment::GhzScan, a),
        Command::Tripartite(a) => (Experiment::Tripartite, a),
        Command::Cluster(a) => (Experiment::Cluster, a),
        Command::BoundCheck(a) => (Experiment::BoundCheck, a),
        Command::Xcheck(a) => (Experiment::Xcheck, a),
    };
    ExitCode::from(execute(experiment, args) as u8)
}

fn execute(experiment: Experiment, args: RunArgs) -> i32 {
    let mut cfg = match &args.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_for(&e);
            }
        },
        None => ExperimentConfig::new(experiment),
    };
    if cfg.experiment != experiment {
        eprintln!(
            "error: config describes `{}` but subcommand is `{}`",
            cfg.experiment.name(),
            experiment.name()
        );
        return exit_code::CONFIG;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output = Some(out);
    }
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let written = match &cfg.output {
        Some(path) => outcome.write(path, cfg.format),
        None => outcome.render(cfg.format).map(|s| print!("{s}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return exit_code_for(&e);
    }
    eprintln!("{}", serde_json::to_string(&outcome.summary).unwrap_or_default());
    if outcome.violations > 0 {
        eprintln!("{} bound violation(s)", outcome.violations);
    }
    outcome.exit_code()
}
