//! Command-line front end: argument and config handling, and one function per subcommand.
//!
//! Exit codes: 0 success, 1 audit failure or other runtime error, 2 invalid
//! homogeneous point, 3 malformed input, 4 validity drift during a flow,
//! 5 equivalence failure.

pub mod args;
pub mod commands;
pub mod config;

use bracketflow::Error;

pub use args::Cli;
use args::Command;
use commands::Global;
use config::InputError;

pub fn run(cli: &Cli) -> anyhow::Result<u8> {
    let loaded = config::load(cli.config.as_deref())?;
    let out = cli.out.clone().or_else(|| loaded.config.out.clone());
    let g = Global { loaded, out: out.as_deref(), tol: cli.tol };
    match &cli.command {
        Command::Ricci(a) => commands::ricci(a, &g),
        Command::Flow(a) => commands::flow(a, &g),
        Command::Sweep(a) => commands::sweep(a, &g),
        Command::Check(a) => commands::check(a, &g),
        Command::Equiv(a) => commands::equiv(a, &g),
    }
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InputError>() || cause.is::<serde_json::Error>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidPoint(_) => 2,
                Error::ValidityDrift { .. } => 4,
                Error::Malformed(_)
                | Error::Parameter(_)
                | Error::DimensionMismatch { .. }
                | Error::NoRealization
                | Error::ZeroScalarCurvature
                | Error::ZeroBracketNorm
                | Error::FlatInitialPoint
                | Error::Json(_) => 3,
                _ => 1,
            };
        }
    }
    1
}
