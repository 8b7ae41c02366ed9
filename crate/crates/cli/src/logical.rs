//! `bmps logical`: the operator `Õ` on an output support with `Õ W = W O`.

use std::path::Path;

use serde::Serialize;

use bmps_core::algebra::{logical_operators, operator_schmidt_rank, LogicalSolution};
use bmps_core::chain::ChainModel;
use bmps_core::stabilizer::PauliOperator;
use bmps_core::tensor::ComplexMatrix;
use bmps_core::{LabError, Tolerances};

use crate::args::LogicalArgs;
use crate::report::{render, Header, Output};
use crate::{CliError, CliResult};

#[derive(Clone, Debug, Serialize)]
pub struct LogicalReport {
    pub op: String,
    pub n: usize,
    pub solution: LogicalSolution,
    /// Support labels on either side of the Schmidt cut.
    pub cut: [Vec<String>; 2],
    pub schmidt_rank: usize,
    pub tensor_product: bool,
}

#[derive(Serialize)]
struct Row {
    quantity: &'static str,
    value: String,
}

/// `I`, `X`, `Y`, `Z`, a signed Pauli string, or a JSON matrix file.
pub fn parse_operator(op: &str, d: usize) -> CliResult<ComplexMatrix> {
    let body = op.trim_start_matches(['+', '-']);
    let is_pauli = !body.is_empty() && body.chars().all(|c| "IXYZ".contains(c));
    let m = if is_pauli {
        let p: PauliOperator = op.parse()?;
        if 1usize << p.num_qubits() != d {
            return Err(LabError::DimensionMismatch(format!(
                "`{op}` acts on {} qubits but the bond dimension is {d}",
                p.num_qubits()
            ))
            .into());
        }
        p.to_matrix()
    } else {
        let path = Path::new(op);
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("`{op}` is neither a Pauli string nor a readable matrix file ({e})"))
        })?;
        serde_json::from_str(&text).map_err(|e| LabError::Parse {
            line: e.line(),
            column: e.column(),
            message: format!("{}: {e}", path.display()),
        })?
    };
    Ok(m)
}

/// Every `B` site plus `C`.
pub fn default_support(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("B{k}")).chain(["C".to_string()]).collect()
}

pub fn logical(
    model: &ChainModel,
    op: &str,
    n: usize,
    support: &[String],
    tol: &Tolerances,
) -> CliResult<LogicalReport> {
    let o = parse_operator(op, model.bond_dim())?;
    let solution = logical_operators(model, &o, n, support, tol)?;
    let (left, right): (Vec<String>, Vec<String>) = solution
        .support
        .labels()
        .into_iter()
        .map(String::from)
        .partition(|l| l.starts_with('B'));
    let schmidt_rank = operator_schmidt_rank(&solution.particular, &solution.support, &left)?;
    Ok(LogicalReport {
        op: op.to_string(),
        n,
        cut: [left, right],
        schmidt_rank,
        tensor_product: schmidt_rank == 1,
        solution,
    })
}

pub fn run(args: &LogicalArgs) -> CliResult<Output> {
    let common = &args.common;
    let header = Header::new("logical", common, args.argv()?)?;
    let tol = common.tolerances()?;
    let resolved = common.spec()?.resolve(common.caps())?;
    let support = if args.support.is_empty() {
        default_support(args.n)
    } else {
        args.support.clone()
    };
    let report = logical(&resolved.chain, &args.op, args.n, &support, &tol)?;
    let rows = vec![
        Row { quantity: "unique", value: report.solution.unique.to_string() },
        Row { quantity: "kernel_dim", value: report.solution.kernel_dim.to_string() },
        Row { quantity: "residual", value: report.solution.residual.to_string() },
        Row { quantity: "schmidt_rank", value: report.schmidt_rank.to_string() },
    ];
    Ok(Output::ok(render(common.out, &header, &report, &rows)?))
}
