mod commands;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use liesym::Error;

#[derive(Parser, Debug)]
#[command(
    name = "liesym",
    version,
    about = "Lie point symmetries of scalar evolution equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// File holding the equation, e.g. `u_t + u*u_x - u_x2`
    pub file: Option<String>,
    /// Built-in equation: viscoelastic-tube, burgers, kdv
    #[arg(long, conflicts_with = "file")]
    pub preset: Option<String>,
    /// Parameter values `k=v,...` for the first point
    #[arg(long)]
    pub params: Option<String>,
    /// Parameter values `k=v,...` for the second point
    #[arg(long)]
    pub second_point: Option<String>,
    /// Polynomial degree of the infinitesimal ansatz
    #[arg(long, default_value_t = 3)]
    pub degree: u32,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the determining equations
    Analyze(Source),
    /// Commutator and adjoint tables and series flags
    Tables(Source),
    /// Check a list of one-dimensional representatives
    Optimal {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Report sign(alpha) instead of alpha
        #[arg(long)]
        coarse: bool,
        /// Representative, possibly with one free parameter (repeatable)
        #[arg(long = "rep")]
        reps: Vec<String>,
    },
    /// Reduce along a combination of generators
    Reduce {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        generator: String,
        #[arg(long)]
        solve: bool,
    },
    /// Residuals of a candidate solution
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long, required_unless_present = "elliptic")]
        solution: Option<String>,
        /// x0,x1,t0,t1,nx,nt
        #[arg(long, default_value = "0,1,1,2,100,100")]
        grid: String,
        /// Apply a group flow first, e.g. G3:s
        #[arg(long)]
        transform: Option<String>,
        /// Write x,t,residual samples to this CSV file
        #[arg(long)]
        dump: Option<String>,
        /// Screen a0,A,B,m,k,c0 in the travelling-wave equation
        #[arg(long, conflicts_with = "solution")]
        elliptic: Option<String>,
    },
    /// Prolongation coefficients of a vector field
    Prolong {
        /// `xi ; eta ; phi`
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long)]
        json: bool,
    },
    /// Full pipeline on the viscoelastic-tube equation against reference data
    #[command(name = "paper-repro")]
    Reproduce {
        #[arg(long)]
        json: bool,
    },
}

pub const MISMATCH: u8 = 1;
pub const USAGE: u8 = 2;
pub const INTERNAL: u8 = 3;

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Syntax { .. }
        | Error::UnknownSymbol(_)
        | Error::OrderOverflow { .. }
        | Error::NonPolynomial(_)
        | Error::Invalid(_)
        | Error::Domain(_) => USAGE,
        Error::Unsupported(_) | Error::ResidualDependence(_) | Error::NonTerminating(..) => MISMATCH,
        Error::NullspaceMismatch(_) | Error::Verification(_) | Error::NonClosure { .. } | Error::Numeric(_) => INTERNAL,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match exit_code(e) {
        USAGE => "usage",
        MISMATCH => "mismatch",
        _ => "internal",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LIESYM_LOG", "warn")).init();
    let cli = Cli::parse();
    let json = match &cli.command {
        Command::Analyze(s) | Command::Tables(s) => s.json,
        Command::Optimal { source, .. } | Command::Reduce { source, .. } | Command::Verify { source, .. } => {
            source.json
        }
        Command::Prolong { json, .. } | Command::Reproduce { json } => *json,
    };
    let result = match cli.command {
        Command::Analyze(s) => commands::analyze(&s),
        Command::Tables(s) => commands::tables(&s),
        Command::Optimal {
            source,
            samples,
            coarse,
            reps,
        } => commands::optimal(&source, samples, coarse, &reps),
        Command::Reduce {
            source,
            generator,
            solve,
        } => commands::reduce(&source, &generator, solve),
        Command::Verify {
            source,
            solution,
            grid,
            transform,
            dump,
            elliptic,
        } => commands::verify(
            &source,
            solution.as_deref(),
            &grid,
            transform.as_deref(),
            dump.as_deref(),
            elliptic.as_deref(),
        ),
        Command::Prolong { field, order, .. } => commands::prolong(&field, order),
        Command::Reproduce { .. } => commands::reproduce(),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = if json {
                writeln!(
                    stdout,
                    "{}",
                    serde_json::to_string_pretty(&out.json).expect("serializable")
                )
            } else {
                write!(stdout, "{}", out.text)
            };
            ExitCode::from(out.code)
        }
        Err(e) => {
            let code = exit_code(&e);
            if json {
                let v = serde_json::json!({
                    "error": error_kind(&e),
                    "message": e.to_string(),
                    "exit_code": code,
                });
                let _ = writeln!(
                    std::io::stdout(),
                    "{}",
                    serde_json::to_string_pretty(&v).expect("serializable")
                );
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code)
        }
    }
}
