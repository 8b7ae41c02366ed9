//! The `bmps` command-line front end.
//!
//! Every subcommand resolves a [`ModelSpec`], runs its pipeline and renders
//! one deterministic report. Reports carry a [`Header`] with the canonical
//! invocation, so `bmps rerun` can reproduce them exactly.

pub mod analyze;
pub mod args;
pub mod logical;
pub mod model;
pub mod report;
pub mod ring;
pub mod stab;

use std::fmt;

use bmps_core::LabError;

pub use args::{Cli, Command, Common, Format};
pub use model::{ModelSpec, Resolved, StabilizerSource, Unitary};
pub use report::{Header, Output};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Bad input: flags, model strings, files, operators outside the algebra.
pub const EXIT_VALIDATION: i32 = 2;
/// A resource cap was hit.
pub const EXIT_CAP: i32 = 3;
/// Two routes that must agree did not.
pub const EXIT_INCONSISTENT: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Lab(LabError),
    Usage(String),
    Io(String),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Lab(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lab(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lab(LabError::ResourceCap { .. }) => EXIT_CAP,
            CliError::Lab(LabError::NumericalInconsistency(_) | LabError::Linalg(_)) => {
                EXIT_INCONSISTENT
            }
            _ => EXIT_VALIDATION,
        }
    }

    /// A suggestion printed under the error message.
    pub fn hint(&self) -> Option<&'static str> {
        let e = match self {
            CliError::Lab(e) => e,
            CliError::Usage(_) => return Some("run `bmps help` for the accepted flags and model strings"),
            CliError::Io(_) => return Some("check that the path exists and is readable"),
        };
        Some(match e {
            LabError::ResourceCap { .. } => {
                "raise --cap-amplitudes if memory allows, or lower --lmax / --n"
            }
            LabError::UnknownLabel(_) => "labels are case sensitive; B and E labels come from the model",
            LabError::Parse { .. } => "fix the input at the reported line and column",
            LabError::NotEncodable(_) => {
                "the operator is outside the correctable algebra; `bmps analyze` prints its blocks"
            }
            LabError::NoLogicalOperator(_) => "enlarge --support or increase --n",
            LabError::InvalidArgument(m) if m.contains("model") => {
                "see `bmps help analyze` for the model syntax"
            }
            LabError::NumericalInconsistency(_) | LabError::Linalg(_) => {
                "loosen the --tol-* thresholds only if the residuals in the report are rounding-sized"
            }
            _ => return None,
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Runs a parsed command line and returns what should be printed.
pub fn run(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Analyze(a) => analyze::run(a),
        Command::RingScan(a) => ring::run(a),
        Command::Logical(a) => logical::run(a),
        Command::Stab(a) => stab::run(a),
        Command::Rerun { report } => {
            let text = std::fs::read_to_string(report)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", report.display())))?;
            let header = Header::from_report(&text)?;
            let cli = Cli::from_argv(&header.argv)?;
            if matches!(cli.command, Command::Rerun { .. }) {
                return Err(CliError::Usage("a report cannot rerun another rerun".into()));
            }
            run(&cli)
        }
    }
}

/// Parses `argv` (program name first), runs it, and writes the output.
/// Returns the process exit status.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(out) => {
            let _ = stdout.write_all(out.text.as_bytes());
            if let Some(msg) = &out.diagnostic {
                let _ = writeln!(stderr, "error: {msg}");
            }
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if let Some(h) = e.hint() {
                let _ = writeln!(stderr, "hint: {h}");
            }
            e.exit_code()
        }
    }
}
