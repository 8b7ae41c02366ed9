//! Report headers and rendering.

use serde::{Deserialize, Serialize};

use bmps_core::{Caps, Tolerances};

use crate::args::{Common, Format};
use crate::{CliError, CliResult, EXIT_OK};

/// Provenance block at the top of every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub command: String,
    /// Canonical model string, seed included.
    pub model: Option<String>,
    pub seed: u64,
    pub caps: Caps,
    pub tolerances: Tolerances,
    /// Arguments after the program name that reproduce this report.
    pub argv: Vec<String>,
    pub version: String,
}

impl Header {
    pub fn new(command: &str, common: &Common, argv: Vec<String>) -> CliResult<Self> {
        Ok(Header {
            command: command.into(),
            model: match common.model {
                Some(_) => Some(common.spec()?.to_string()),
                None => None,
            },
            seed: common.seed,
            caps: common.caps(),
            tolerances: common.tolerances()?,
            argv,
            version: env!("CARGO_PKG_VERSION").into(),
        })
    }

    /// Reads the header back from a JSON report or a CSV report's `#` line.
    pub fn from_report(text: &str) -> CliResult<Header> {
        let bad = |e: serde_json::Error| CliError::Usage(format!("not a bmps report: {e}"));
        let trimmed = text.trim_start();
        if let Some(rest) = trimmed.strip_prefix('#') {
            let line = rest.lines().next().unwrap_or("");
            return serde_json::from_str(line.trim()).map_err(bad);
        }
        #[derive(Deserialize)]
        struct WithHeader {
            header: Header,
        }
        Ok(serde_json::from_str::<WithHeader>(trimmed).map_err(bad)?.header)
    }
}

/// What a command prints, and the exit status to return.
#[derive(Clone, Debug)]
pub struct Output {
    pub text: String,
    pub code: i32,
    /// Printed to stderr when the report itself signals a failure.
    pub diagnostic: Option<String>,
}

impl Output {
    pub fn ok(text: String) -> Self {
        Output {
            text,
            code: EXIT_OK,
            diagnostic: None,
        }
    }

    pub fn failing(mut self, code: i32, diagnostic: String) -> Self {
        self.code = code;
        self.diagnostic = Some(diagnostic);
        self
    }
}

#[derive(Serialize)]
struct Framed<'a, T: Serialize> {
    header: &'a Header,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with the header first.
pub fn render_json<T: Serialize>(header: &Header, body: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(&Framed { header, body })
        .map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// CSV with a leading `# {header}` comment line.
pub fn render_csv<R: Serialize>(header: &Header, rows: &[R]) -> CliResult<String> {
    let io = |e: csv::Error| CliError::Io(format!("cannot write CSV: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| CliError::Io(format!("cannot write CSV: {e}")))?;
    let head = serde_json::to_string(header).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(format!("# {head}\n{}", String::from_utf8_lossy(&body)))
}

/// Renders either form; `rows` is only used for CSV.
pub fn render<T: Serialize, R: Serialize>(
    format: Format,
    header: &Header,
    body: &T,
    rows: &[R],
) -> CliResult<String> {
    match format {
        Format::Json => render_json(header, body),
        Format::Csv => render_csv(header, rows),
    }
}
