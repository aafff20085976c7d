use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lwr_cli::{AnalyzeArgs, CliError, CriterionArg, CurvesArgs, DEFAULT_GRID_POINTS};
use lwr_core::capacity::SyntheticConfig;
use lwr_core::solve::DEFAULT_TOL;

#[derive(Parser)]
#[command(name = "lwr", version, about = "Minimax, least-worst-regret and Bayesian scenario analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionFlag {
    Minimax,
    Lwr,
    Bayes,
}

impl From<CriterionFlag> for CriterionArg {
    fn from(c: CriterionFlag) -> Self {
        match c {
            CriterionFlag::Minimax => CriterionArg::Minimax,
            CriterionFlag::Lwr => CriterionArg::Lwr,
            CriterionFlag::Bayes => CriterionArg::Bayes,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario file and print a JSON run report.
    Analyze {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "lwr")]
        criterion: CriterionFlag,
        /// JSON file `{"p": [...]}`; required for bayes.
        #[arg(long)]
        probabilities: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Include the prior on the extreme pair compatible with the solution.
        #[arg(long)]
        compatible: bool,
    },
    /// Tabulate costs and regrets on a grid as CSV.
    Curves {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Capacity-procurement studies.
    Capacity {
        #[command(subcommand)]
        command: CapacityCommand,
    },
}

#[derive(Subcommand)]
enum CapacityCommand {
    /// Write a seeded synthetic study as JSON.
    Synth {
        #[arg(long, default_value_t = 19)]
        scenarios: usize,
        #[arg(long, default_value_t = 2015)]
        seed: u64,
        /// Reliability capacity of the mildest scenario, MW.
        #[arg(long, default_value_t = 45_000.0)]
        low_mw: f64,
        /// Reliability capacity of the harshest scenario, MW.
        #[arg(long, default_value_t = 51_000.0)]
        high_mw: f64,
        /// EEU decay per MW.
        #[arg(long, default_value_t = 1.0e-3)]
        rate: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continuous and discrete LWR for a study, as JSON.
    Analyze {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Human-readable summary of a study.
    Report {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Analyze {
            input,
            criterion,
            probabilities,
            tol,
            compatible,
        } => {
            let report = lwr_cli::analyze(&AnalyzeArgs {
                input,
                criterion: criterion.into(),
                probabilities,
                tol,
                compatible,
            })?;
            Ok(lwr_cli::to_json(&report))
        }
        Command::Curves { input, lo, hi, n, tol } => lwr_cli::curves(&CurvesArgs { input, lo, hi, n, tol }),
        Command::Capacity { command } => match command {
            CapacityCommand::Synth {
                scenarios,
                seed,
                low_mw,
                high_mw,
                rate,
                out,
            } => {
                let mut config = SyntheticConfig::gb_like(low_mw, high_mw, rate, seed);
                config.scenarios = scenarios;
                let json = lwr_cli::capacity_synth(&config)?;
                match out {
                    Some(path) => {
                        std::fs::write(&path, &json)
                            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                        Ok(String::new())
                    }
                    None => Ok(json),
                }
            }
            CapacityCommand::Analyze { input, tol } => Ok(lwr_cli::to_json(&lwr_cli::capacity_analyze(&input, tol)?)),
            CapacityCommand::Report { input, tol } => lwr_cli::capacity_report(&input, tol),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
