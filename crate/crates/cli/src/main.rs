use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracldg_cli::{dispatch, exit, parse_config_as, to_text, Command, Failure};

#[derive(Parser)]
#[command(name = "fracldg", version, about = "LDG solver for fractional convection-diffusion equations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// March a problem to its final time and write the final coefficients.
    Solve(Args),
    /// Run a convergence study and write the table.
    Converge(Args),
    /// March with zero forcing and check that the L2 norm never grows.
    Stability(Args),
    /// Dump L1 weights, time-rule constants or the Riesz matrix.
    Kernels(Args),
    /// Validate a config and print it with all defaults filled in.
    Check { config: PathBuf },
}

#[derive(clap::Args)]
struct Args {
    /// Config file (`key = value` lines).
    config: PathBuf,
    /// Output path; overrides `output` in the config.
    #[arg(short, long)]
    output: Option<String>,
}

fn read(path: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(exit::CONFIG)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Converge(a) => (Command::Converge, a),
        Cmd::Stability(a) => (Command::Stability, a),
        Cmd::Kernels(a) => (Command::Kernels, a),
        Cmd::Check { config } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(code) => return code,
            };
            return match fracldg_cli::parse_config(&text) {
                Ok(cfg) => {
                    print!("{}", to_text(&cfg));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit::CONFIG)
                }
            };
        }
    };
    let text = match read(&args.config) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let mut cfg = match parse_config_as(&text, command) {
        Ok(c) => c,
        Err(e) => {
            let f = Failure::Config(e);
            eprintln!("error: {f}");
            return ExitCode::from(f.exit_code());
        }
    };
    if args.output.is_some() {
        cfg.output = args.output;
    }
    match dispatch(&cfg) {
        Ok(status) => {
            eprintln!("{status}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
