//! `pjflow` — batch front-end for the flow library.
//!
//! ```text
//! pjflow <command> [--config FILE] [--r X | --lambda X] [--init SPEC]
//!        [--window A B] [--n N] [--t-end T] [--dt DT] [--out DIR]
//! ```
//!
//! Exit codes: 0 success, 2 config error, 3 blow-up reached, 4 numerical
//! failure. `PJFLOW_THREADS` caps the limit-sweep parallelism.

mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pjflow_core::Error;
use scenario::{resolve, Overrides};

#[derive(Parser)]
#[command(name = "pjflow", version, about = "Exact flows, blow-up analysis and geodesics for the r-Hunter-Saxton / generalized Proudman-Johnson equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// JSON scenario file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exponent r (nonzero real or "inf"). Exactly one of --r/--lambda.
    #[arg(long)]
    r: Option<String>,
    /// λ = 1/r (0 selects r = inf). Exactly one of --r/--lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// Initial data: gaussian[:c,w,a] | hat[:b0,b1,b2,a] | sine[:k,a] | file:PATH.
    #[arg(long)]
    init: Option<String>,
    /// Line window a b.
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    /// Sample count.
    #[arg(long)]
    n: Option<usize>,
    /// Final time.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Time step (or parameter step for bvp).
    #[arg(long)]
    dt: Option<f64>,
    /// Evaluation time for limit-sweep (defaults to --t-end).
    #[arg(long)]
    t: Option<f64>,
    /// Exponent list for limit-sweep, e.g. "2,4,8,...,256".
    #[arg(long)]
    rs: Option<String>,
    /// Left boundary map (grid CSV/JSON); identity when omitted.
    #[arg(long)]
    phi0: Option<PathBuf>,
    /// Right boundary map (grid CSV/JSON).
    #[arg(long)]
    phi1: Option<PathBuf>,
    /// Output directory (default pjflow_out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include residual verifications in the manifest.
    #[arg(long)]
    residuals: bool,
    /// Spatial scheme for crosscheck: central | upwind.
    #[arg(long)]
    scheme: Option<String>,
}

impl From<RunArgs> for Overrides {
    fn from(a: RunArgs) -> Self {
        Overrides {
            config: a.config,
            r: a.r,
            lambda: a.lambda,
            init: a.init,
            window: a.window,
            n: a.n,
            t_end: a.t_end,
            dt: a.dt,
            t: a.t,
            rs: a.rs,
            phi0: a.phi0,
            phi1: a.phi1,
            out: a.out,
            residuals: a.residuals,
            scheme: a.scheme,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact geodesic flow from initial velocity data.
    Flow(RunArgs),
    /// Blow-up time of the flow for the given initial data.
    Blowup(RunArgs),
    /// Geodesic distance between two maps.
    Distance(RunArgs),
    /// Minimizing geodesic between two boundary maps.
    Bvp(RunArgs),
    /// Periodic geodesic on the L^r-sphere.
    Periodic(RunArgs),
    /// Independent nonlocal-transport integrator vs the exact flow.
    Crosscheck(RunArgs),
    /// Convergence of the flow maps as r grows.
    #[command(name = "limit-sweep")]
    LimitSweep(RunArgs),
    /// Closed-form piecewise-linear flow.
    Pl(RunArgs),
    /// Check a config file and report violations without running anything.
    Validate { path: PathBuf },
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::BlowUp { .. } | Error::BoundaryHit { .. } | Error::NoBlowUp | Error::Shock { .. } => {
            ExitCode::from(3)
        }
        Error::Config(_) | Error::InvalidInput(_) | Error::Io(_) | Error::Serde(_) => {
            ExitCode::from(2)
        }
        Error::MonotonicityViolation { .. }
        | Error::NonFinite { .. }
        | Error::DomainMismatch(_)
        | Error::UnsupportedDomain(_)
        | Error::OutOfImage { .. }
        | Error::OffSphere { .. }
        | Error::NotTangent { .. }
        | Error::InsufficientData(_) => ExitCode::from(4),
    }
}

fn run_command(name: &str, args: RunArgs) -> ExitCode {
    let overrides: Overrides = args.into();
    let scenario = match resolve(name, &overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::dispatch(&scenario) {
        Ok(outcome) if outcome.blowup_reached => ExitCode::from(3),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn validate_command(path: &std::path::Path) -> ExitCode {
    let file = match scenario::load_config(path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let command = file.command.clone().unwrap_or_else(|| "flow".to_string());
    let problems = scenario::validate(&command, &file, &Overrides::default());
    // the exponent requirement applies to a bare file too
    if problems.is_empty() {
        println!("OK");
        ExitCode::SUCCESS
    } else {
        for p in &problems {
            println!("violation: {p}");
        }
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Flow(a) => run_command("flow", a),
        Command::Blowup(a) => run_command("blowup", a),
        Command::Distance(a) => run_command("distance", a),
        Command::Bvp(a) => run_command("bvp", a),
        Command::Periodic(a) => run_command("periodic", a),
        Command::Crosscheck(a) => run_command("crosscheck", a),
        Command::LimitSweep(a) => run_command("limit-sweep", a),
        Command::Pl(a) => run_command("pl", a),
        Command::Validate { path } => validate_command(&path),
    }
}
