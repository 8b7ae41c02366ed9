//! `bmps analyze`: the CMI pipeline on the open chain.

use serde::Serialize;

use bmps_core::algebra::{
    algebra_saturation_check, block_decomposition, commutant, dual_complementarity_check,
    AlgebraSaturationReport, AlgebraSummary, DualComplementarityReport,
};
use bmps_core::chain::{
    build_open_chain, chain_cmi, cmi_formula, coherent_information_route, saturation_check,
    ChainModel, CmiReport, SaturationReport,
};
use bmps_core::{LabError, Tolerances};

use crate::args::AnalyzeArgs;
use crate::report::{render, Header, Output};
use crate::{CliResult, EXIT_INCONSISTENT};

#[derive(Clone, Debug, Serialize)]
pub struct ModelInfo {
    pub bond_dim: usize,
    pub b_dim: usize,
    pub e_dim: usize,
    pub b_labels: Vec<String>,
    pub e_labels: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Algebras {
    #[serde(rename = "A")]
    pub a: AlgebraSummary,
    #[serde(rename = "B")]
    pub b: AlgebraSummary,
    /// `dim B'`; the CMI is positive iff `B'` is a proper subalgebra of `A`.
    pub commutant_b_dim: usize,
}

/// A CMI route that may be unavailable.
#[derive(Clone, Debug, Serialize)]
pub struct Route {
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unavailable: Option<String>,
}

impl Route {
    fn from(r: Result<f64, LabError>) -> Self {
        match r {
            Ok(v) => Route {
                value: Some(v),
                unavailable: None,
            },
            Err(e) => Route {
                value: None,
                unavailable: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CmiRoutes {
    pub brute_force_n1: CmiReport,
    pub brute_force_n2: CmiReport,
    pub formula: Route,
    pub coherent_information: Route,
    /// Largest gap between the brute-force value at `n = 1` and the other routes.
    pub max_deviation: f64,
    pub positive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub model: ModelInfo,
    pub dual_complementarity: DualComplementarityReport,
    pub algebras: Algebras,
    pub algebra_saturation: AlgebraSaturationReport,
    pub cmi: CmiRoutes,
    pub saturation: SaturationReport,
    pub consistent: bool,
}

#[derive(Serialize)]
struct Row {
    quantity: &'static str,
    value: String,
}

pub fn analyze(model: &ChainModel, n_max: usize, tol: &Tolerances) -> CliResult<AnalyzeReport> {
    let d = model.bond_dim();
    let dual = dual_complementarity_check(model, tol)?;
    let blocks_a = block_decomposition(&dual.a)?;
    let blocks_b = block_decomposition(&dual.b)?;
    let algebras = Algebras {
        a: dual.a.summary()?,
        b: dual.b.summary()?,
        commutant_b_dim: commutant(&dual.b)?.dim(),
    };
    let n1 = chain_cmi(&build_open_chain(model, 1)?)?;
    let n2 = chain_cmi(&build_open_chain(model, 2)?)?;
    let formula = Route::from(if dual.pass {
        cmi_formula(&blocks_a, &blocks_b, d)
    } else {
        Err(LabError::InvalidArgument(
            "the block formula needs dual complementarity, which fails".into(),
        ))
    });
    let coherent = Route::from(coherent_information_route(model, tol).map(|r| r.value));
    let max_deviation = [formula.value, coherent.value]
        .into_iter()
        .flatten()
        .map(|v| (v - n1.value).abs())
        .fold(0.0, f64::max);
    let consistent = max_deviation <= tol.saturation;
    let positive = n1.value > tol.cmi_positive;
    Ok(AnalyzeReport {
        model: ModelInfo {
            bond_dim: d,
            b_dim: model.b_dim(),
            e_dim: model.e_dim(),
            b_labels: model.b_labels().to_vec(),
            e_labels: model.e_labels().to_vec(),
        },
        algebra_saturation: algebra_saturation_check(model, n_max, tol)?,
        saturation: saturation_check(model, tol)?,
        dual_complementarity: dual,
        algebras,
        cmi: CmiRoutes {
            brute_force_n1: n1,
            brute_force_n2: n2,
            formula,
            coherent_information: coherent,
            max_deviation,
            positive,
        },
        consistent,
    })
}

fn rows(r: &AnalyzeReport) -> Vec<Row> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let blocks = |s: &AlgebraSummary| {
        s.blocks
            .iter()
            .map(|[n, m]| format!("({n},{m})"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    vec![
        Row { quantity: "dual_complementarity", value: r.dual_complementarity.pass.to_string() },
        Row { quantity: "blocks_A", value: blocks(&r.algebras.a) },
        Row { quantity: "blocks_B", value: blocks(&r.algebras.b) },
        Row { quantity: "algebra_saturation", value: r.algebra_saturation.pass.to_string() },
        Row { quantity: "cmi_brute_force_n1", value: r.cmi.brute_force_n1.value.to_string() },
        Row { quantity: "cmi_brute_force_n2", value: r.cmi.brute_force_n2.value.to_string() },
        Row { quantity: "cmi_formula", value: opt(r.cmi.formula.value) },
        Row { quantity: "cmi_coherent_information", value: opt(r.cmi.coherent_information.value) },
        Row { quantity: "cmi_saturated", value: r.saturation.cmi_saturated.to_string() },
        Row { quantity: "consistent", value: r.consistent.to_string() },
    ]
}

pub fn run(args: &AnalyzeArgs) -> CliResult<Output> {
    let common = &args.common;
    let header = Header::new("analyze", common, args.argv()?)?;
    let tol = common.tolerances()?;
    let resolved = common.spec()?.resolve(common.caps())?;
    let report = analyze(&resolved.chain, args.n_max, &tol)?;
    let text = render(common.out, &header, &report, &rows(&report))?;
    let out = Output::ok(text);
    Ok(if report.consistent {
        out
    } else {
        out.failing(
            EXIT_INCONSISTENT,
            format!(
                "numerical inconsistency: CMI routes disagree by {:e} (tolerance {:e})",
                report.cmi.max_deviation, tol.saturation
            ),
        )
    })
}
