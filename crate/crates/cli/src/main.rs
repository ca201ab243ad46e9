use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sos_cli::{run, ConfigOverrides, Experiment, ExperimentConfig, HMode};

#[derive(Parser)]
#[command(
    name = "sos",
    version,
    about = "Solid-on-solid surface above a hard wall: exact checks and Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its output directory.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat TOML config file; flags override its keys.
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_experiment)]
    experiment: Option<Experiment>,
    #[arg(long)]
    beta: Option<f64>,
    /// Absolute pinning rewards, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "h_frac")]
    h: Option<Vec<f64>>,
    /// Pinning rewards as fractions of the wetting threshold, comma separated.
    #[arg(long = "h-frac", value_delimiter = ',')]
    h_frac: Option<Vec<f64>>,
    /// Lattice sides, comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    cap: Option<u32>,
    #[arg(long)]
    sweeps: Option<u64>,
    #[arg(long = "burn-in")]
    burn_in: Option<u64>,
    #[arg(long)]
    thinning: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: sos_cli::ConfigError| e.to_string())
}

impl RunArgs {
    fn overrides(&self) -> ConfigOverrides {
        let (h_mode, h) = match (&self.h, &self.h_frac) {
            (Some(h), _) => (Some(HMode::Absolute), Some(h.clone())),
            (None, Some(f)) => (Some(HMode::FractionOfHw), Some(f.clone())),
            (None, None) => (None, None),
        };
        ConfigOverrides {
            experiment: self.experiment,
            beta: self.beta,
            h_mode,
            h,
            n: self.n.clone(),
            cap: self.cap,
            sweeps: self.sweeps,
            burn_in: self.burn_in,
            thinning: self.thinning,
            seed: self.seed,
            out: self.out.clone(),
            threads: self.threads,
            ..Default::default()
        }
    }
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    let config = match ExperimentConfig::load(args.config.as_deref(), args.overrides()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(outcome) => {
            let failed: Vec<_> = outcome.records.iter().filter(|r| !r.acceptable()).collect();
            println!("{} -> {}", config.experiment, outcome.dir.display());
            for r in &failed {
                eprintln!(
                    "hard check failed: {} (lhs {}, rhs {})",
                    r.check_name, r.lhs, r.rhs
                );
            }
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
