use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use symtrig_cli::{
    cmd_generate, cmd_scalar_demo, cmd_simulate, cmd_verify, CliError, GenerateArgs, Kind,
    VerifyArgs,
};

/// Discrete trigonometric and hyperbolic systems: generate, simulate, verify.
#[derive(Parser)]
#[command(name = "symtrig", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded coefficient file.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        /// Horizon: the file holds N + 1 coefficient pairs.
        #[arg(long = "N")]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bound on ‖A_k‖_F (default 1 for trig, 0.5 for hyperbolic).
        #[arg(long)]
        amplitude: Option<f64>,
        /// Comma-separated ±1 entries of D (hyperbolic).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        sign_diag: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the principal solution at k0 as CSV.
    Simulate {
        coeffs: PathBuf,
        #[arg(long, default_value_t = 0)]
        k0: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the identity suite and write a JSON report.
    Verify {
        coeffs: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        partner_seed: Option<u64>,
        #[arg(long)]
        pivot_tol: Option<f64>,
        #[arg(long)]
        partner_amplitude: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a scalar recurrence with its closed form.
    ScalarDemo {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        steps: usize,
        /// Angle φ (trig) or rate a (hyperbolic).
        #[arg(long, visible_alias = "a", allow_hyphen_values = true)]
        angle: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Generate {
            kind,
            n,
            horizon,
            seed,
            amplitude,
            sign_diag,
            out,
        } => {
            let args = GenerateArgs {
                kind,
                n,
                horizon,
                amplitude,
                seed,
                sign_diag: sign_diag.as_deref(),
            };
            cmd_generate(&args, &out)?;
            Ok(0)
        }
        Command::Simulate { coeffs, k0, out } => {
            cmd_simulate(&coeffs, k0, &out)?;
            Ok(0)
        }
        Command::Verify {
            coeffs,
            tol,
            partner_seed,
            pivot_tol,
            partner_amplitude,
            out,
        } => {
            let args = VerifyArgs {
                tol,
                partner_seed,
                pivot_tol,
                partner_amplitude,
            };
            let report = cmd_verify(&coeffs, &args, &out)?;
            let total = report.validation.len() + report.records.len();
            let failed: Vec<_> = report.failures().collect();
            for r in &failed {
                eprintln!(
                    "FAIL {}: residual {:.3e} > tolerance {:.3e}",
                    r.id, r.max_residual, r.tolerance
                );
            }
            println!("{}/{} checks passed", total - failed.len(), total);
            Ok(report.exit_code())
        }
        Command::ScalarDemo {
            kind,
            steps,
            angle,
            out,
        } => {
            let worst = cmd_scalar_demo(kind, steps, angle, &out)?;
            println!("max abs_err {worst:.3e}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if let CliError::Invalid(report) = &e {
                eprintln!("{e}");
                eprintln!(
                    "{}",
                    serde_json::to_string_pretty(report).expect("plain data serializes")
                );
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
