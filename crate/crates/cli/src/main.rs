mod config;
mod reference;
mod report;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use maglev::sim::Scenario;

use config::{Overrides, RunConfig};
use report::{DesignKind, Report};

#[derive(Debug)]
pub enum CliError {
    /// Bad or unreadable configuration (exit 2).
    Config(String),
    /// Numerical or runtime failure (exit 3).
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "maglev",
    version,
    about = "Analysis, controller design and simulation for a magnetic ball suspension rig"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibrium, linear model, controllability and observability.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Controller or observer synthesis with the full intermediate ledger.
    Design {
        which: Which,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Closed-loop simulation written as CSV.
    Simulate {
        /// linear-feedback, nonlinear-feedback, linear-observer,
        /// nonlinear-observer, linear-lqr or nonlinear-lqr
        scenario: Scenario,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-final")]
        t_final: Option<f64>,
        /// Initial deviation from the operating point, `a,b,c`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Place,
    Observer,
    Lqr,
}

fn emit(report: &Report, json: Option<&PathBuf>) -> Result<(), CliError> {
    print!("{}", report.text());
    if let Some(path) = json {
        std::fs::write(path, report.to_json())
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { config, json } => {
            let cfg = RunConfig::load(&config, &Overrides::default())?;
            emit(&report::analyze(&cfg)?, json.as_ref())
        }
        Command::Design {
            which,
            config,
            json,
        } => {
            let cfg = RunConfig::load(&config, &Overrides::default())?;
            let kind = match which {
                Which::Place => DesignKind::Place,
                Which::Observer => DesignKind::Observer,
                Which::Lqr => DesignKind::Lqr,
            };
            emit(&report::design(&cfg, kind)?, json.as_ref())
        }
        Command::Simulate {
            scenario,
            config,
            dt,
            t_final,
            x0,
            out,
        } => {
            let overrides = Overrides {
                dt,
                t_final,
                x0,
                out,
            };
            let cfg = RunConfig::load(&config, &overrides)?;
            let path = cfg
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{scenario}.csv")));
            let trace = simulate::run(&cfg, scenario)?;
            simulate::save_csv(&trace, &path)?;
            for line in simulate::summary(&cfg, scenario, &trace) {
                println!("{line}");
            }
            println!("csv: {}", path.display());
            match trace.ball_contact {
                Some(t) => Err(CliError::Numerical(format!(
                    "ball contact (x1 <= 0) at t = {}; partial trace written",
                    report::num(t)
                ))),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
