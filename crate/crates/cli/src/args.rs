//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bmps_core::tol::DEFAULT_MAX_AMPLITUDES;
use bmps_core::{Caps, Tolerances};

use crate::model::ModelSpec;
use crate::{CliError, CliResult};

const MODEL_HELP: &str = "Model: paulitwirl:identity | paulitwirl:haar[:SEED] | paulitwirl:matrix:FILE | \
product_trivial | identity_to_b:D | random:D:DB:DE[:SEED] | stabilizer:NAME | stabilizer:file:FILE | \
stabilizer:random:K:NB:NE[:SEED] | custom:FILE. Built-in stabilizer names: twirl, identity, discard, cluster";

#[derive(Parser, Clone, Debug)]
#[command(name = "bmps", version, about = "Boundary MPS laboratory: channels, correctable algebras, CMI and stabilizer SPT checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug)]
pub enum Command {
    /// Dual complementarity, algebra saturation and the three CMI routes.
    Analyze(AnalyzeArgs),
    /// Entropy of the boundary of closed rings of increasing length.
    RingScan(RingScanArgs),
    /// Logical operator of a bond operator on a chosen output support.
    Logical(LogicalArgs),
    /// Exact GF(2) analysis of a Clifford encoder.
    Stab(StabArgs),
    /// Re-executes the invocation recorded in a report's header.
    Rerun {
        /// A JSON report, or a CSV report with its `#` header line.
        report: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    #[arg(long, help = MODEL_HELP)]
    pub model: Option<String>,
    /// Seed for models and samplers that take one.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of complex amplitudes any single object may hold.
    #[arg(long, default_value_t = DEFAULT_MAX_AMPLITUDES)]
    pub cap_amplitudes: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
    #[arg(long, default_value_t = Tolerances::default().span)]
    pub tol_span: f64,
    #[arg(long, default_value_t = Tolerances::default().expectation)]
    pub tol_expectation: f64,
    #[arg(long, default_value_t = Tolerances::default().logical)]
    pub tol_logical: f64,
    #[arg(long, default_value_t = Tolerances::default().saturation)]
    pub tol_saturation: f64,
    #[arg(long, default_value_t = Tolerances::default().cmi_positive)]
    pub tol_cmi_positive: f64,
}

impl Common {
    pub fn spec(&self) -> CliResult<ModelSpec> {
        let model = self
            .model
            .as_deref()
            .ok_or_else(|| CliError::Usage("--model is required".into()))?;
        Ok(ModelSpec::parse(model, self.seed)?)
    }

    pub fn caps(&self) -> Caps {
        Caps {
            max_amplitudes: self.cap_amplitudes,
        }
    }

    pub fn tolerances(&self) -> CliResult<Tolerances> {
        let t = Tolerances {
            span: self.tol_span,
            expectation: self.tol_expectation,
            logical: self.tol_logical,
            saturation: self.tol_saturation,
            cmi_positive: self.tol_cmi_positive,
        };
        for (name, v) in [
            ("--tol-span", t.span),
            ("--tol-expectation", t.expectation),
            ("--tol-logical", t.logical),
            ("--tol-saturation", t.saturation),
            ("--tol-cmi-positive", t.cmi_positive),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Usage(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        Ok(t)
    }

    /// Flags in canonical form, with the model string canonicalized.
    pub fn argv(&self) -> CliResult<Vec<String>> {
        let mut v = Vec::new();
        if self.model.is_some() {
            push(&mut v, "--model", self.spec()?);
        }
        v.extend([
            "--seed".into(),
            self.seed.to_string(),
            "--cap-amplitudes".into(),
            self.cap_amplitudes.to_string(),
            "--out".into(),
            self.out.as_str().into(),
            "--tol-span".into(),
            self.tol_span.to_string(),
            "--tol-expectation".into(),
            self.tol_expectation.to_string(),
            "--tol-logical".into(),
            self.tol_logical.to_string(),
            "--tol-saturation".into(),
            self.tol_saturation.to_string(),
            "--tol-cmi-positive".into(),
            self.tol_cmi_positive.to_string(),
        ]);
        Ok(v)
    }
}

#[derive(Args, Clone, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest chain length in the algebra-saturation check.
    #[arg(long, default_value_t = 2)]
    pub n_max: usize,
}

#[derive(Args, Clone, Debug)]
pub struct RingScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 3)]
    pub lmin: usize,
    #[arg(long, default_value_t = 6)]
    pub lmax: usize,
    /// Comma-separated seeds; each replaces the model's seed. Defaults to --seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Worker threads for the scan.
    #[arg(long, default_value_t = 2)]
    pub workers: usize,
}

#[derive(Args, Clone, Debug)]
pub struct LogicalArgs {
    #[command(flatten)]
    pub common: Common,
    /// I, X, Y, Z, a Pauli string such as XZ for several bond qubits, or a JSON matrix file.
    #[arg(long)]
    pub op: String,
    /// Number of chain sites.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Comma-separated output labels; defaults to every B site plus C.
    #[arg(long, value_delimiter = ',')]
    pub support: Vec<String>,
}

#[derive(Args, Clone, Debug)]
pub struct StabArgs {
    #[command(flatten)]
    pub common: Common,
    /// Analyze this many random Clifford encoders instead of --model.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Largest number of bond qubits in a batch.
    #[arg(long, default_value_t = 3)]
    pub kmax: usize,
    /// Worker threads for a batch.
    #[arg(long, default_value_t = 2)]
    pub workers: usize,
}

fn push(v: &mut Vec<String>, flag: &str, value: impl ToString) {
    v.push(flag.into());
    v.push(value.to_string());
}

impl Cli {
    pub fn from_argv(argv: &[String]) -> CliResult<Cli> {
        Cli::try_parse_from(std::iter::once("bmps".to_string()).chain(argv.iter().cloned()))
            .map_err(|e| CliError::Usage(format!("recorded invocation does not parse: {e}")))
    }
}

impl AnalyzeArgs {
    pub fn argv(&self) -> CliResult<Vec<String>> {
        let mut v = vec!["analyze".to_string()];
        v.extend(self.common.argv()?);
        push(&mut v, "--n-max", self.n_max);
        Ok(v)
    }
}

impl RingScanArgs {
    pub fn argv(&self) -> CliResult<Vec<String>> {
        let mut v = vec!["ring-scan".to_string()];
        v.extend(self.common.argv()?);
        push(&mut v, "--lmin", self.lmin);
        push(&mut v, "--lmax", self.lmax);
        if !self.seeds.is_empty() {
            let s: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
            push(&mut v, "--seeds", s.join(","));
        }
        push(&mut v, "--workers", self.workers);
        Ok(v)
    }
}

impl LogicalArgs {
    pub fn argv(&self) -> CliResult<Vec<String>> {
        let mut v = vec!["logical".to_string()];
        v.extend(self.common.argv()?);
        push(&mut v, "--op", &self.op);
        push(&mut v, "--n", self.n);
        if !self.support.is_empty() {
            push(&mut v, "--support", self.support.join(","));
        }
        Ok(v)
    }
}

impl StabArgs {
    pub fn argv(&self) -> CliResult<Vec<String>> {
        let mut v = vec!["stab".to_string()];
        v.extend(self.common.argv()?);
        if let Some(b) = self.batch {
            push(&mut v, "--batch", b);
        }
        push(&mut v, "--kmax", self.kmax);
        push(&mut v, "--workers", self.workers);
        Ok(v)
    }
}
