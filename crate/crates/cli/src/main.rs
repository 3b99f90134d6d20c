use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use faultsense_cli::commands::{self, load_config};
use faultsense_cli::CliError;

const ABOUT: &str = "Unsupervised streaming fault prediction with an incremental SVM.";

const LONG_ABOUT: &str = "\
Unsupervised streaming fault prediction with an incremental SVM.

IMPORTANT: the engine assumes the first engine.calib_frames frames of every
stream come from a HEALTHY machine. Those frames define what normal looks
like; a fault already present at start-up is learned as normal and will not
be reported.

Exit codes: 0 ok, 2 config or parse error, 3 I/O error, 4 corrupt stream
(more than 10% malformed rows), 5 insufficient data.";

#[derive(Parser)]
#[command(name = "faultsense", version, about = ABOUT, long_about = LONG_ABOUT)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the global `seed` key.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a simulated pulse-echo stream and its ground truth.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Sample CSV to write.
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth JSON to write.
        #[arg(long)]
        truth: PathBuf,
    },
    /// Run the engine over a sample CSV and write JSON Lines events.
    ///
    /// The first engine.calib_frames frames must be fault-free.
    Run {
        #[command(flatten)]
        common: Common,
        /// Sample CSV with header `t,value`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Events file to write.
        #[arg(long)]
        events: PathBuf,
    },
    /// Score an events file against ground truth and print the report.
    Eval {
        /// Events file written by `run`.
        #[arg(long)]
        events: PathBuf,
        /// Ground-truth JSON written by `simulate`.
        #[arg(long)]
        truth: PathBuf,
        /// Echo amplitude defining the fault; defaults to half the maximum.
        #[arg(long = "theta-amp")]
        theta_amp: Option<f64>,
    },
    /// Run the engine over a stream, then grid-search C and gamma on the
    /// final labeled buffer.
    ///
    /// The first engine.calib_frames frames must be fault-free.
    Tune {
        #[command(flatten)]
        common: Common,
        /// Sample CSV with header `t,value`.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<(), CliError> {
    let s = serde_json::to_string(v).map_err(|e| CliError::Internal(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Simulate { common, out, truth } => {
            let cfg = load_config(common.config.as_deref(), common.seed)?;
            commands::simulate(&cfg, &out, &truth)
        }
        Cmd::Run {
            common,
            input,
            events,
        } => {
            let cfg = load_config(common.config.as_deref(), common.seed)?;
            commands::run(&cfg, &input, &events).map(|_| ())
        }
        Cmd::Eval {
            events,
            truth,
            theta_amp,
        } => print_json(&commands::eval(&events, &truth, theta_amp)?),
        Cmd::Tune { common, input } => {
            let cfg = load_config(common.config.as_deref(), common.seed)?;
            print_json(&commands::tune(&cfg, &input)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("faultsense: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
