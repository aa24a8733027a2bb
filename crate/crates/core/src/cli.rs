//! Command-line front end.
//!
//! Exit codes: 0 certified / success, 1 rejected, 2 unsupported,
//! 3 input error (unreadable file, malformed XML, bad arguments).

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::checker::{check_certificate_with, CheckOptions, CheckResult};
use crate::cpf::{parse_cpf, ParseErrorKind};
use crate::xsd::{xsd_to_ir_text, XsdError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "verify",
    version,
    about = "Check termination certificates of term rewrite systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a certificate (problem and proof in one file).
    Check {
        /// Print every visited proof node and side condition.
        #[arg(long, short)]
        verbose: bool,
        /// Threads for checking sibling SCC subproofs.
        #[arg(long, short, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
        file: PathBuf,
    },
    /// Translate an XSD subset to ordered datatype definitions.
    Xsd2types {
        /// Write the output here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        file: PathBuf,
    },
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match cli.command {
        Command::Check { verbose, jobs, file } => cmd_check(&file, verbose, jobs as usize, out, err),
        Command::Xsd2types { output, file } => cmd_xsd2types(&file, output.as_deref(), out, err),
    }
}

pub fn cmd_check(file: &std::path::Path, verbose: bool, jobs: usize, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let bytes = match std::fs::read(file) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(err, "ERROR: {}: {e}", file.display());
            return EXIT_INPUT;
        }
    };
    let cert = match parse_cpf(&bytes) {
        Ok(c) => c,
        Err(e) => {
            if let ParseErrorKind::Unsupported(element) = &e.kind {
                // Same shape as checker paths, which start at the proof element.
                let path = e.path.to_string();
                let path = path.strip_prefix("certificationProblem/").unwrap_or(&path);
                let _ = writeln!(out, "UNSUPPORTED: {path}: {element}");
                let _ = writeln!(err, "{}:{e}", file.display());
                return EXIT_UNSUPPORTED;
            }
            let _ = writeln!(err, "ERROR: {}:{e}", file.display());
            return EXIT_INPUT;
        }
    };
    let (result, trace) = check_certificate_with(&cert, CheckOptions { jobs, trace: verbose });
    for line in &trace {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "{result}");
    match &result {
        CheckResult::Ok => EXIT_OK,
        CheckResult::Ko(e) => {
            if let Some(w) = &e.witness {
                let _ = writeln!(err, "offending rule: {w}");
            }
            EXIT_REJECTED
        }
        CheckResult::Unsupported(_) => EXIT_UNSUPPORTED,
    }
}

pub fn cmd_xsd2types(
    file: &std::path::Path,
    output: Option<&std::path::Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let bytes = match std::fs::read(file) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(err, "ERROR: {}: {e}", file.display());
            return EXIT_INPUT;
        }
    };
    let text = match xsd_to_ir_text(&bytes) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "ERROR: {}: {e}", file.display());
            return match e {
                XsdError::Unsupported { .. } => EXIT_UNSUPPORTED,
                XsdError::XmlMalformed { .. } | XsdError::UnresolvedRef(_) => EXIT_INPUT,
            };
        }
    };
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                let _ = writeln!(err, "ERROR: {}: {e}", path.display());
                return EXIT_INPUT;
            }
        }
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    EXIT_OK
}
