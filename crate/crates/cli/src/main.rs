mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use mop_lattice::io::{to_pretty, write_text, Report};
use mop_lattice::Error;
use serde_json::json;

use args::Cli;

/// Exit status and a stable name for each error kind.
fn classify(e: &Error) -> (u8, &'static str) {
    match e {
        Error::Domain(_) => (2, "domain"),
        Error::InvalidParams(_) => (2, "invalid_params"),
        Error::InsufficientMoments { .. } => (2, "insufficient_moments"),
        Error::WindowTooLarge { .. } => (2, "window_too_large"),
        Error::Shape(_) => (2, "shape"),
        Error::Io(_) => (2, "io"),
        Error::Parse(_) => (2, "parse"),
        Error::NotNormal { .. } => (3, "not_normal"),
        Error::NotSymmetrizable { .. } => (4, "not_symmetrizable"),
        Error::DegenerateDenominator { .. } => (5, "degenerate_denominator"),
        Error::DegenerateSystem { .. } => (5, "degenerate_system"),
        Error::InconsistentField { .. } => (6, "inconsistent_field"),
        Error::InconsistentOverlap { .. } => (6, "inconsistent_overlap"),
        Error::PathInconsistent { .. } => (6, "path_inconsistent"),
        Error::Convergence { .. } => (7, "convergence"),
        Error::Fit { .. } => (7, "fit"),
    }
}

/// Exit status for a report whose checks ran but did not all pass.
pub const CHECK_FAILED: u8 = 6;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let report_path = cli.command.common().report.clone();
    let (report, code) = match commands::run(&cli.command) {
        Ok(report) => {
            let code = if report.pass { 0 } else { CHECK_FAILED };
            (report, code)
        }
        Err(failure) => {
            let (code, kind) = classify(&failure.error);
            eprintln!("moplat {name}: {}", failure.error);
            let mut report = failure.partial.map_or_else(|| Report::new(name), |r| *r);
            report.pass = false;
            report.detail("error", json!({ "kind": kind, "message": failure.error.to_string() }));
            (report, code)
        }
    };
    let text = to_pretty(&report.to_json());
    print!("{text}");
    if let Some(path) = report_path {
        if let Err(e) = write_text(&path, &text) {
            eprintln!("moplat {name}: cannot write report: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
