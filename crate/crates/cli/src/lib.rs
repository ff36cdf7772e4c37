//! Command-line front end for `gst-core`.
//!
//! Exit codes: 0 success, 1 check or validation failure, 2 usage error,
//! 3 endpoints in different components.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;

use std::io::Write;
use std::path::Path;

pub use args::{Cli, Command, Format};
use commands::{Endpoints, Report};
use gst_core::geometry::export::{cloud_csv, cloud_json, to_json_string};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIFFERENT_COMPONENTS: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    DifferentComponents(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(_) | CliError::Io(_) => EXIT_CHECK_FAILED,
            CliError::DifferentComponents(_) => EXIT_DIFFERENT_COMPONENTS,
        }
    }
}

pub fn render<R: Report>(report: &R, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => {
            let mut s = to_json_string(report).map_err(|e| CliError::Failed(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => report.csv(),
        Format::Text => report.text(),
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn finish<R: Report>(report: &R, format: Format, out: Option<&Path>) -> Result<i32, CliError> {
    emit(&render(report, format)?, out)?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Runs one parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Form { n, output } => finish(&commands::form(n)?, output.format, output.out.as_deref()),
        Command::Restricted { n, output } => {
            finish(&commands::restricted(n)?, output.format, output.out.as_deref())
        }
        Command::Oracle { n, trials, x, seed, output } => finish(
            &commands::oracle(n, trials, x.as_deref(), seed.seed)?,
            output.format,
            output.out.as_deref(),
        ),
        Command::Components { n, samples, eps, check, cloud_out, seed, output } => {
            let grid = eps.eps_min.zip(eps.eps_max).map(|(lo, hi)| (lo, hi, eps.eps_steps));
            let run = commands::components(n, samples, seed.seed, grid, check)?;
            if let Some(path) = cloud_out {
                let json = path.extension().is_some_and(|e| e == "json");
                let body = if json {
                    cloud_json(&run.cloud).map_err(|e| CliError::Failed(e.to_string()))?
                } else {
                    cloud_csv(&run.cloud)
                };
                std::fs::write(path, body)?;
            }
            if let (Some(w), false) = (&run.report.warning, output.format == Format::Text) {
                eprintln!("warning: {w}");
            }
            finish(&run.report, output.format, output.out.as_deref())
        }
        Command::Path {
            n,
            p,
            q,
            random_pair,
            opposite_cylinders,
            step,
            waypoints_csv,
            seed,
            output,
        } => {
            let endpoints = match (&p, &q, random_pair) {
                (Some(p), Some(q), false) => Endpoints::Given(p, q),
                (None, None, true) => Endpoints::Random { opposite_cylinders },
                _ => return Err(CliError::Usage("give --p and --q, or --random-pair".into())),
            };
            let report = commands::path(n, endpoints, step, seed.seed)?;
            if let Some(path) = waypoints_csv {
                std::fs::write(path, commands::waypoints_csv(&report.points))?;
            }
            finish(&report, output.format, output.out.as_deref())
        }
        Command::Report { nmax, samples, trials, pairs, seed, format, out } => finish(
            &commands::full_report(nmax, samples, trials, pairs, seed.seed)?,
            format,
            out.as_deref(),
        ),
    }
}
