//! `bmps stab`: GF(2) tables, SPT verdict and the dense cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use bmps_core::algebra::algebra_saturation_check;
use bmps_core::chain::{build_open_chain, chain_cmi};
use bmps_core::stabilizer::{
    algebra_table_on, logical_pauli_enumeration, spt_detect, stabilizer_cmi,
    stabilizer_cmi_formula, stabilizer_saturation, AlgebraTable, LogicalEnumeration, SptVerdict,
    StabilizerIsometry, StabilizerSaturation, TableColumn,
};
use bmps_core::{Caps, LabError, Tolerances};

use crate::args::StabArgs;
use crate::model::{ModelSpec, StabilizerSource};
use crate::report::{render, Header, Output};
use crate::{CliError, CliResult, EXIT_INCONSISTENT};

/// Allowed gap between an exact GF(2) value and its dense counterpart.
pub const DENSE_AGREEMENT: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct EncoderInfo {
    #[serde(rename = "K")]
    pub k: usize,
    pub outputs: usize,
    pub b_labels: Vec<String>,
    pub e_labels: Vec<String>,
    pub tableau: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub support: Vec<String>,
    pub table: AlgebraTable,
    pub blocks: Vec<(usize, usize)>,
    pub algebra_dim: u128,
    pub commutant_columns: Vec<TableColumn>,
}

impl TableReport {
    fn new(v: &StabilizerIsometry, support: &[&str]) -> CliResult<Self> {
        let table = algebra_table_on(v, support)?;
        Ok(TableReport {
            support: support.iter().map(|s| s.to_string()).collect(),
            blocks: table.blocks(),
            algebra_dim: table.algebra_dim(),
            commutant_columns: table.commutant_columns(),
            table,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tables {
    #[serde(rename = "A")]
    pub a: TableReport,
    #[serde(rename = "B")]
    pub b: TableReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct Logicals {
    #[serde(rename = "BC")]
    pub bc: LogicalEnumeration,
    #[serde(rename = "E")]
    pub e: LogicalEnumeration,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactCmi {
    pub n1: i64,
    pub n2: i64,
    pub formula: i64,
}

/// Dense brute-force values, when the chain fits under the caps.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DenseCheck {
    pub cmi_n1: Option<f64>,
    pub deviation: Option<f64>,
    /// Numeric algebra saturation, the precondition of the biconditional.
    pub saturated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabReport {
    pub encoder: EncoderInfo,
    pub tables: Tables,
    pub logicals: Logicals,
    pub verdict: SptVerdict,
    pub cmi: ExactCmi,
    pub saturation: StabilizerSaturation,
    pub dense: DenseCheck,
    pub g_sum_ok: bool,
    pub consistent: bool,
}

/// Dense CMI, plus the numeric saturation check when `saturation` is given.
fn dense_check(
    v: &StabilizerIsometry,
    exact: i64,
    caps: Caps,
    saturation: Option<&Tolerances>,
) -> CliResult<DenseCheck> {
    let attempt = || -> Result<DenseCheck, LabError> {
        let model = v.to_chain_model(caps)?;
        let cmi = chain_cmi(&build_open_chain(&model, 1)?)?.value;
        let saturated = match saturation {
            Some(tol) => Some(algebra_saturation_check(&model, 2, tol)?.pass),
            None => None,
        };
        Ok(DenseCheck {
            cmi_n1: Some(cmi),
            deviation: Some((cmi - exact as f64).abs()),
            saturated,
            skipped: None,
        })
    };
    match attempt() {
        Ok(d) => Ok(d),
        Err(e @ LabError::ResourceCap { .. }) => Ok(DenseCheck {
            skipped: Some(e.to_string()),
            ..DenseCheck::default()
        }),
        Err(e) => Err(e.into()),
    }
}

pub fn stab(v: &StabilizerIsometry, caps: Caps, tol: &Tolerances) -> CliResult<StabReport> {
    let verdict = spt_detect(v)?;
    let cmi = ExactCmi {
        n1: stabilizer_cmi(v, 1)?,
        n2: stabilizer_cmi(v, 2)?,
        formula: stabilizer_cmi_formula(v)?,
    };
    let dense = dense_check(v, cmi.n1, caps, Some(tol))?;
    let g_sum_ok = verdict.g_bc + verdict.g_e == 2 * v.k();
    let consistent = g_sum_ok
        && cmi.n1 == cmi.formula
        && verdict.nontrivial == (cmi.n1 > 0)
        && dense.deviation.is_none_or(|d| d <= DENSE_AGREEMENT);
    Ok(StabReport {
        encoder: EncoderInfo {
            k: v.k(),
            outputs: v.num_outputs(),
            b_labels: v.b_labels(),
            e_labels: v.e_labels(),
            tableau: v.to_tableau_text(),
        },
        tables: Tables {
            a: TableReport::new(v, &["B", "C"])?,
            b: TableReport::new(v, &["E", "C"])?,
        },
        logicals: Logicals {
            bc: logical_pauli_enumeration(v, &["B", "C"])?,
            e: logical_pauli_enumeration(v, &["E"])?,
        },
        saturation: stabilizer_saturation(v)?,
        verdict,
        cmi,
        dense,
        g_sum_ok,
        consistent,
    })
}

/// One random encoder of a batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchSample {
    pub model: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "g_BC")]
    pub g_bc: Option<usize>,
    #[serde(rename = "g_E")]
    pub g_e: Option<usize>,
    pub nontrivial: Option<bool>,
    pub cmi_gf2: Option<i64>,
    pub cmi_dense: Option<f64>,
    pub saturated_gf2: Option<bool>,
    /// Numeric saturation; only computed when the exact check passes.
    pub saturated_dense: Option<bool>,
    /// `nontrivial` matches `cmi_dense > tol`; only judged on saturated samples.
    pub biconditional: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchSummary {
    pub samples: usize,
    pub saturated: usize,
    pub nontrivial: usize,
    pub biconditional_mismatches: usize,
    pub g_violations: usize,
    pub dense_mismatches: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchReport {
    pub summary: BatchSummary,
    pub samples: Vec<BatchSample>,
}

/// The encoders of a batch: `K` up to `kmax`, at least one `B` and one `E`
/// qubit, and at most `2K + 2` outputs.
pub fn batch_specs(count: usize, kmax: usize, seed: u64) -> Vec<ModelSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=kmax.max(1));
            let nb = rng.random_range(1..=2 * k);
            let ne = (2 * k - nb).max(1) + rng.random_range(0..=1);
            ModelSpec::Stabilizer(StabilizerSource::Random(k, nb, ne, rng.random()))
        })
        .collect()
}

pub fn batch_sample(spec: &ModelSpec, caps: Caps, tol: &Tolerances) -> BatchSample {
    let mut s = BatchSample {
        model: spec.to_string(),
        k: 0,
        g_bc: None,
        g_e: None,
        nontrivial: None,
        cmi_gf2: None,
        cmi_dense: None,
        saturated_gf2: None,
        saturated_dense: None,
        biconditional: None,
        error: None,
    };
    let mut fill = || -> CliResult<()> {
        let v = spec.clifford()?;
        s.k = v.k();
        let verdict = spt_detect(&v)?;
        s.g_bc = Some(verdict.g_bc);
        s.g_e = Some(verdict.g_e);
        s.nontrivial = Some(verdict.nontrivial);
        let exact = stabilizer_cmi(&v, 1)?;
        s.cmi_gf2 = Some(exact);
        let saturated_gf2 = stabilizer_saturation(&v)?.pass;
        s.saturated_gf2 = Some(saturated_gf2);
        let dense = dense_check(&v, exact, caps, saturated_gf2.then_some(tol))?;
        s.cmi_dense = dense.cmi_n1;
        s.saturated_dense = dense.saturated;
        if let (Some(true), Some(cmi)) = (dense.saturated, dense.cmi_n1) {
            s.biconditional = Some(verdict.nontrivial == (cmi > tol.cmi_positive));
        }
        if let Some(reason) = dense.skipped {
            s.error = Some(reason);
        }
        Ok(())
    };
    if let Err(e) = fill() {
        s.error = Some(e.to_string());
    }
    s
}

pub fn batch(specs: &[ModelSpec], workers: usize, caps: Caps, tol: &Tolerances) -> CliResult<BatchReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let samples: Vec<BatchSample> =
        pool.install(|| specs.par_iter().map(|s| batch_sample(s, caps, tol)).collect());
    let count = |f: &dyn Fn(&BatchSample) -> bool| samples.iter().filter(|s| f(s)).count();
    let summary = BatchSummary {
        samples: samples.len(),
        saturated: count(&|s| s.saturated_dense == Some(true)),
        nontrivial: count(&|s| s.nontrivial == Some(true)),
        biconditional_mismatches: count(&|s| s.biconditional == Some(false)),
        g_violations: count(&|s| matches!((s.g_bc, s.g_e), (Some(a), Some(b)) if a + b != 2 * s.k)),
        dense_mismatches: count(&|s| match (s.cmi_gf2, s.cmi_dense) {
            (Some(g), Some(d)) => (g as f64 - d).abs() > DENSE_AGREEMENT,
            _ => false,
        }),
        errors: count(&|s| s.error.is_some()),
    };
    Ok(BatchReport { summary, samples })
}

#[derive(Serialize)]
struct Row {
    quantity: &'static str,
    value: String,
}

pub fn run(args: &StabArgs) -> CliResult<Output> {
    let common = &args.common;
    let header = Header::new("stab", common, args.argv()?)?;
    let tol = common.tolerances()?;
    if let Some(count) = args.batch {
        let specs = batch_specs(count, args.kmax, common.seed);
        let report = batch(&specs, args.workers, common.caps(), &tol)?;
        let out = Output::ok(render(common.out, &header, &report, &report.samples)?);
        let s = &report.summary;
        if s.biconditional_mismatches + s.g_violations + s.dense_mismatches > 0 {
            return Ok(out.failing(
                EXIT_INCONSISTENT,
                format!(
                    "numerical inconsistency: {} biconditional mismatches, {} g-count violations, {} GF(2)/dense CMI mismatches",
                    s.biconditional_mismatches, s.g_violations, s.dense_mismatches
                ),
            ));
        }
        return Ok(out);
    }
    let v = common.spec()?.clifford()?;
    let report = stab(&v, common.caps(), &tol)?;
    let rows = vec![
        Row { quantity: "K", value: report.encoder.k.to_string() },
        Row { quantity: "g_BC", value: report.verdict.g_bc.to_string() },
        Row { quantity: "g_E", value: report.verdict.g_e.to_string() },
        Row { quantity: "nontrivial", value: report.verdict.nontrivial.to_string() },
        Row { quantity: "cmi_gf2", value: report.cmi.n1.to_string() },
        Row { quantity: "cmi_formula", value: report.cmi.formula.to_string() },
        Row {
            quantity: "cmi_dense",
            value: report.dense.cmi_n1.map(|c| c.to_string()).unwrap_or_default(),
        },
        Row { quantity: "saturated", value: report.saturation.pass.to_string() },
        Row { quantity: "consistent", value: report.consistent.to_string() },
    ];
    let out = Output::ok(render(common.out, &header, &report, &rows)?);
    Ok(if report.consistent {
        out
    } else {
        out.failing(
            EXIT_INCONSISTENT,
            "numerical inconsistency: the exact and dense routes disagree; see `consistent` in the report".into(),
        )
    })
}
