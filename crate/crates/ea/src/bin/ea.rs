use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ea::config::{Overrides, Params};
use ea::experiments::{run_experiment, Experiment};
use ea::output::write_report;
use ea::validation::validate_report;
use ea::EaError;

/// Reproduce the error-averaging figures and tables, or run the acceptance suite.
#[derive(Debug, Parser)]
#[command(name = "ea", version)]
struct Cli {
    experiment: Experiment,
    /// Phase noise variance per phase shifter.
    #[arg(long = "v")]
    v: Option<f64>,
    /// Redundancy (number of copies).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Number of noisy elements in the chain.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Monte Carlo trials (or runs, or seeds for scans).
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: ea-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any of v, N, M, trials, seed, out, plot_script; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSVs.
    #[arg(long)]
    plot_script: bool,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            v: self.v,
            n: self.n,
            m: self.m,
            trials: self.trials,
            seed: self.seed,
            out: self.out.clone(),
            plot_script: self.plot_script.then_some(true),
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, EaError> {
    let file = match &cli.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let merged = cli.overrides().over(file);
    merged.validate()?;
    let params = Params::from(&merged);
    let (report, failed) = match cli.experiment {
        Experiment::Validate => validate_report(&params)?,
        exp => (run_experiment(exp, &params)?, false),
    };
    let dir = merged.out.clone().unwrap_or_else(|| PathBuf::from("ea-out"));
    let files = write_report(&report, cli.experiment.name(), params.seed, &dir, merged.plot_script.unwrap_or(false))?;
    for line in &report.summary {
        println!("{line}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("validation failed");
            ExitCode::from(1)
        }
        Err(e @ EaError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
