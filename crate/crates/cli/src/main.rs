use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hcorr_cli::commands::{self, Method, Outcome};
use hcorr_cli::CliError;

#[derive(Parser)]
#[command(name = "hcorr", version, about = "Small-amplitude homogenisation corrections and product limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Cell,
    Harmonic1d,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Correction tensors A1..A4 of a coefficient expansion.
    Compute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        orders: Vec<u8>,
        /// Seed for the sampled cross-check on large supports.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the formulas with cell-problem and/or harmonic-mean fits.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        gammas: Option<Vec<f64>>,
        #[arg(long)]
        k_solver: Option<usize>,
    },
    /// Closed-form limit of a p-fold product of a scalar sequence.
    Limit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        p: Option<usize>,
        /// Finite-n quadrature check at these n.
        #[arg(long, value_delimiter = ',')]
        check_n: Vec<usize>,
    },
}

fn run(cli: Cli) -> (Result<Outcome, CliError>, Option<PathBuf>) {
    match cli.command {
        Command::Compute { input, output, orders, seed } => (commands::compute(&input, &orders, seed), output),
        Command::Verify { input, output, method, gammas, k_solver } => {
            let method = method.map(|m| match m {
                MethodArg::Cell => Method::Cell,
                MethodArg::Harmonic1d => Method::Harmonic1d,
                MethodArg::Both => Method::Both,
            });
            (commands::verify(&input, method, gammas, k_solver), output)
        }
        Command::Limit { input, output, p, check_n } => (commands::limit(&input, p, &check_n), output),
    }
}

fn main() -> ExitCode {
    let (result, output) = run(Cli::parse());
    let code = match result {
        Ok(outcome) => {
            let json = outcome.report.to_json();
            let written = match &output {
                Some(path) => std::fs::write(path, json).map_err(|e| CliError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                }),
                None => {
                    print!("{json}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => outcome.exit_code,
                Err(e) => {
                    eprintln!("{}", e.to_json());
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
