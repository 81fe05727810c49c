use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conerig::coning::MetricTag;
use conerig::NumericPolicy;
use conerig_cli::{run_analyze, run_transfer, AnalyzeOptions, Failure, TransferArgs};

#[derive(Parser)]
#[command(name = "conerig", version, about = "Infinitesimal rigidity, symmetry and coning transfers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every random sample.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random placements per regularity estimate.
    #[arg(long, default_value_t = 5)]
    samples: usize,
    /// Relative singular-value threshold for numerical rank.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Write a drawing of the (projected) framework; planar input only.
    #[arg(long)]
    svg: Option<PathBuf>,
}

impl Common {
    fn policy(&self) -> NumericPolicy {
        NumericPolicy {
            rank_rel_tol: self.tol,
            sample_count: self.samples,
            rng_seed: self.seed,
            ..NumericPolicy::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rigidity, stresses, symmetric flexes and tensegrity verdicts.
    Analyze {
        input: PathBuf,
        /// Also analyze the framework coned into this metric.
        #[arg(long)]
        metric: Option<MetricTag>,
        /// Cross-check the rank in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Cone into a target metric and check every transfer clause.
    Transfer {
        input: PathBuf,
        #[arg(long)]
        to: MetricTag,
        /// Vertex orbits (1-based) to send to the opposite hemisphere.
        #[arg(long, value_delimiter = ',')]
        invert: Vec<usize>,
        /// One ray scalar per vertex orbit.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alphas: Option<Vec<f64>>,
        /// Dilate the base before coning, e.g. to fit inside the unit disc.
        #[arg(long)]
        scale: Option<f64>,
        /// Write the coned framework as a framework document.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze {
            input,
            metric,
            exact,
            common,
        } => run_analyze(
            &input,
            &AnalyzeOptions {
                policy: common.policy(),
                metric,
                exact,
                svg: common.svg.clone(),
            },
        ),
        Command::Transfer {
            input,
            to,
            invert,
            alphas,
            scale,
            emit,
            common,
        } => run_transfer(
            &input,
            &TransferArgs {
                policy: common.policy(),
                to,
                invert,
                alphas,
                scale,
                emit,
                svg: common.svg.clone(),
            },
        ),
    };
    match result {
        Ok(report) => {
            print!("{}", report.to_json());
            ExitCode::SUCCESS
        }
        Err(f) => {
            let code = f.exit_code() as u8;
            match f {
                Failure::Input(e) => eprintln!("error: {e}"),
                Failure::Domain(report, e) => {
                    print!("{}", report.to_json());
                    eprintln!("error: {e}");
                }
            }
            ExitCode::from(code)
        }
    }
}
