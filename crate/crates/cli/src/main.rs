use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use edgebreak_cli::{default_table, execute, parse_config, read_manifest, replay, Command};

#[derive(Parser)]
#[command(name = "edgebreak", version, about = "Contact-process break points and percolation density deviations")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Flat TOML config; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<u64>,
    /// Parent of the per-run directory.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Re-run on a doubled window and record whether the estimates moved.
    #[arg(long)]
    window_doubling: bool,
}

#[derive(Subcommand)]
enum Experiment {
    /// Survival probability of {0}; a rate sweep on both graphs when `mus` is set.
    Survival(RunArgs),
    /// Probability that the single and half-line right endpoints agree up to each horizon.
    EndpointEquality(RunArgs),
    /// Agreement of the half-line and finite starts on a finite set.
    Agreement(RunArgs),
    /// Shape agreement of the half-line and {0} starts on surviving runs.
    Shape(RunArgs),
    /// Break points of the right edge and their increments.
    Breakpoints(RunArgs),
    /// Restart chain and the law of its attempt count.
    Restart(RunArgs),
    /// Standardized right endpoints at the horizon and a normality test.
    Clt(RunArgs),
    /// Oriented percolation runs and the coupling identity.
    Percolation(RunArgs),
    /// Decay of the density-deficit or extinction-tail probability.
    DeficitDecay(RunArgs),
    /// Decay of the consecutive-block scan probability.
    ScanRuns(RunArgs),
}

impl Experiment {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Experiment::Survival(a) => (Command::Survival, a),
            Experiment::EndpointEquality(a) => (Command::EndpointEquality, a),
            Experiment::Agreement(a) => (Command::Agreement, a),
            Experiment::Shape(a) => (Command::Shape, a),
            Experiment::Breakpoints(a) => (Command::Breakpoints, a),
            Experiment::Restart(a) => (Command::Restart, a),
            Experiment::Clt(a) => (Command::Clt, a),
            Experiment::Percolation(a) => (Command::Percolation, a),
            Experiment::DeficitDecay(a) => (Command::DeficitDecay, a),
            Experiment::ScanRuns(a) => (Command::ScanRuns, a),
        }
    }
}

#[derive(Subcommand)]
enum Action {
    #[command(flatten)]
    Run(Experiment),
    /// Print the default config table.
    Defaults,
    /// Re-run a manifest and compare file digests.
    Replay { manifest: PathBuf },
}

fn run(cli: Cli) -> Result<i32> {
    match cli.action {
        Action::Defaults => {
            print!("{}", default_table()?);
            Ok(0)
        }
        Action::Run(exp) => {
            let (command, args) = exp.split();
            let text = match &args.config {
                Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
                None => String::new(),
            };
            let mut cfg = parse_config(&text)?;
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            if let Some(r) = args.replicas {
                cfg.replicas = r;
            }
            cfg.validate()?;
            let (dir, manifest) = execute(command, &cfg, &args.out, args.window_doubling)?;
            for w in &manifest.warnings {
                eprintln!("{}", json!({ "warning": w }));
            }
            println!("{}", dir.display());
            Ok(0)
        }
        Action::Replay { manifest } => {
            let m = read_manifest(&manifest)?;
            let bad = replay(&m)?;
            println!("{}", json!({ "reproduced": bad.is_empty(), "mismatched": bad }));
            Ok(if bad.is_empty() { 0 } else { 3 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", json!({ "error": format!("{e:#}") }));
            ExitCode::from(1)
        }
    }
}
