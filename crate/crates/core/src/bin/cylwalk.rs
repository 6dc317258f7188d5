use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cylwalk::harness::{emit, run, ExperimentConfig, ExperimentKind, HarnessError, OutputFormat};

#[derive(Debug, Parser)]
#[command(name = "cylwalk", version, about = "Seeded experiments for random walk on the discrete cylinder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Disconnection times T_N and the distribution of N^{2d}/T_N.
    Disconnect(Common),
    /// Regression of log median T_N on log N, with bootstrap intervals.
    Scaling(Common),
    /// Probability that no level completes [uN^{d-1}] excursions by γN^{2d}.
    Excursions(Common),
    /// Vacant-set events and the linkage conclusions on a grid of u.
    Events(Common),
    /// Probability that the trace covers nested planar sets.
    Expbound(Common),
    /// Level local times against simple random walk local times.
    Localtime(Common),
    /// Table of return probabilities q(ν).
    Qtable(Common),
    /// The criticality condition, λ0 and c0 over a range of d.
    Thresholds(Common),
    /// ★-self-avoiding walk counts against the Peierls bound.
    Peierls(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replicas per side length.
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json", "svg"])]
    format: String,
    /// Connectivity check cadence for disconnection runs.
    #[arg(long)]
    cadence: Option<u64>,
    /// Per-replica step budget.
    #[arg(long)]
    budget: Option<u64>,
}

impl Command {
    fn split(&self) -> (ExperimentKind, &Common) {
        use Command::*;
        match self {
            Disconnect(c) => (ExperimentKind::Disconnect, c),
            Scaling(c) => (ExperimentKind::Scaling, c),
            Excursions(c) => (ExperimentKind::Excursions, c),
            Events(c) => (ExperimentKind::Events, c),
            Expbound(c) => (ExperimentKind::Expbound, c),
            Localtime(c) => (ExperimentKind::Localtime, c),
            Qtable(c) => (ExperimentKind::Qtable, c),
            Thresholds(c) => (ExperimentKind::Thresholds, c),
            Peierls(c) => (ExperimentKind::Peierls, c),
        }
    }
}

fn load(kind: ExperimentKind, args: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            let cfg = ExperimentConfig::from_toml(&text)?;
            if cfg.experiment != kind {
                return Err(HarnessError::Config(format!(
                    "{} configures experiment {:?}, not {kind:?}",
                    path.display(),
                    cfg.experiment.name()
                )));
            }
            cfg
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replicas {
        cfg.replicas = r;
    }
    if let Some(o) = &args.out_dir {
        cfg.out_dir = o.clone();
    }
    if args.cadence.is_some() {
        cfg.cadence = args.cadence;
    }
    if let Some(b) = args.budget {
        cfg.budget = b;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let outcome = load(kind, args).and_then(|cfg| {
        let format: OutputFormat = args.format.parse()?;
        let record = run(&cfg)?;
        let paths = emit(&record, &cfg.out_dir, format)?;
        Ok((record, paths))
    });
    match outcome {
        Ok((record, paths)) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            for (k, v) in &record.summary {
                println!("{k} = {v}");
            }
            for c in &record.checks {
                let mark = if c.passed { "ok" } else { "FAILED" };
                println!("check {}: {mark} ({})", c.name, c.detail);
            }
            if !record.all_checks_pass() {
                eprintln!("warning: some post-run checks failed");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
