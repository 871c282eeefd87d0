mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit statuses.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_CONTRADICTION: u8 = 3;

pub const DEFAULT_SEED: u64 = 0x5eed_2009;

#[derive(Parser, Debug)]
#[command(name = "recwalk", version, about = "Random walks on homogeneous spaces: return laws, stable limits, and a space with recurrent, transient, and neither points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// First-return law of the simple walk and its n^{-3/2} fit.
    ReturnLaw(Common),
    /// Local limit errors of self-convolutions of ν against a Cauchy target.
    Lll(Common),
    /// Classify the six named points of the counterexample space.
    Classify(Common),
    /// Green partial sums at π by the auxiliary and direct methods.
    Green(Common),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Monte Carlo sample count (default depends on the command).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Step horizon for Monte Carlo paths.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Largest n (return time for return-law, number of returns for green).
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Window of the ν law.
    #[arg(long)]
    pub l_max: Option<u64>,
    /// Inner truncation of the ν law (default l_max²).
    #[arg(long)]
    pub k_max: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "RECWALK_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Comma-separated list of n values.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<u64>>,
    /// Run on one thread (results are identical).
    #[arg(long)]
    pub sequential: bool,
}

pub struct Outcome {
    pub text: String,
    pub status: u8,
    pub messages: Vec<String>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<recwalk::Error> for Failure {
    fn from(e: recwalk::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let (name, common, result) = match cli.command {
        Command::ReturnLaw(c) => ("return-law", c.clone(), commands::return_law(&c)),
        Command::Lll(c) => ("lll", c.clone(), commands::lll(&c)),
        Command::Classify(c) => ("classify", c.clone(), commands::classify(&c)),
        Command::Green(c) => ("green", c.clone(), commands::green(&c)),
    };
    let code = match result {
        Ok(outcome) => {
            for m in &outcome.messages {
                eprintln!("{m}");
            }
            match output::emit(common.out.as_deref(), &outcome.text) {
                Ok(()) => outcome.status,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_NUMERICAL
                }
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_NUMERICAL
        }
    };
    eprintln!("{name}: wall time {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(code)
}
