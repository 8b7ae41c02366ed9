//! `bmps ring-scan`: boundary entropy of closed rings and the fitted constant.

use rayon::prelude::*;
use serde::Serialize;

use bmps_core::chain::{fit_c0, ring_entropy};
use bmps_core::stabilizer::stabilizer_entropy;
use bmps_core::{Caps, LabError};

use crate::args::RingScanArgs;
use crate::model::ModelSpec;
use crate::report::{render, Header, Output};
use crate::{CliError, CliResult, EXIT_INCONSISTENT};

/// Allowed gap between dense and GF(2) entropies.
pub const GF2_AGREEMENT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingPoint {
    pub seed: u64,
    pub l: usize,
    /// Dense `S(ρ_B)` in bits.
    pub s_bits: f64,
    /// The same entropy by GF(2) rank arithmetic, for Clifford models.
    pub s_gf2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingFit {
    pub seed: u64,
    pub model: String,
    /// `c0` in `S = 2 l - c0`, least squares with the slope fixed.
    pub c0: f64,
    pub residual: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingError {
    pub seed: u64,
    pub l: usize,
    pub message: String,
    pub code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingScan {
    pub points: Vec<RingPoint>,
    pub fits: Vec<RingFit>,
    pub errors: Vec<RingError>,
    /// Largest `|S_bits - S_gf2|` over Clifford points.
    pub gf2_deviation: Option<f64>,
}

#[derive(Serialize)]
struct Row {
    row: &'static str,
    seed: u64,
    l: Option<usize>,
    #[serde(rename = "S_bits")]
    s_bits: Option<f64>,
    #[serde(rename = "S_gf2")]
    s_gf2: Option<f64>,
    c0_fit: Option<f64>,
    residual: Option<f64>,
    error: Option<String>,
}

fn point(spec: &ModelSpec, seed: u64, l: usize, caps: Caps) -> Result<RingPoint, LabError> {
    let resolved = spec.resolve(caps)?;
    let s_bits = ring_entropy(&resolved.chain, l)?;
    let s_gf2 = match &resolved.clifford {
        Some(v) => Some(stabilizer_entropy(v, l, &["B"])? as f64),
        None => None,
    };
    Ok(RingPoint { seed, l, s_bits, s_gf2 })
}

/// Scans `l` in `lmin..=lmax` for every seed. Jobs run on `workers` threads;
/// the result order is by seed then `l` regardless of completion order.
pub fn scan(
    spec: &ModelSpec,
    seeds: &[u64],
    lmin: usize,
    lmax: usize,
    workers: usize,
    caps: Caps,
) -> CliResult<RingScan> {
    if lmin < 2 || lmax < lmin {
        return Err(CliError::Usage(format!(
            "need 2 <= --lmin <= --lmax, got {lmin}..{lmax}"
        )));
    }
    let jobs: Vec<(u64, usize)> = seeds
        .iter()
        .flat_map(|&s| (lmin..=lmax).map(move |l| (s, l)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RingPoint, LabError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(seed, l)| point(&spec.with_seed(seed), seed, l, caps))
            .collect()
    });

    let mut out = RingScan {
        points: Vec::new(),
        fits: Vec::new(),
        errors: Vec::new(),
        gf2_deviation: None,
    };
    for (&(seed, l), r) in jobs.iter().zip(results) {
        match r {
            Ok(p) => out.points.push(p),
            Err(e) => out.errors.push(RingError {
                seed,
                l,
                code: CliError::Lab(e.clone()).exit_code(),
                message: e.to_string(),
            }),
        }
    }
    for &seed in seeds {
        let pts: Vec<(usize, f64)> = out
            .points
            .iter()
            .filter(|p| p.seed == seed)
            .map(|p| (p.l, p.s_bits))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let (c0, residual) = fit_c0(&pts);
        out.fits.push(RingFit {
            seed,
            model: spec.with_seed(seed).to_string(),
            c0,
            residual,
            points: pts.len(),
        });
    }
    out.gf2_deviation = out
        .points
        .iter()
        .filter_map(|p| p.s_gf2.map(|g| (g - p.s_bits).abs()))
        .reduce(f64::max);
    Ok(out)
}

fn rows(scan: &RingScan) -> Vec<Row> {
    let mut rows = Vec::new();
    let seeds: Vec<u64> = {
        let mut s: Vec<u64> = scan
            .points
            .iter()
            .map(|p| p.seed)
            .chain(scan.errors.iter().map(|e| e.seed))
            .collect();
        s.dedup();
        s
    };
    for seed in seeds {
        for p in scan.points.iter().filter(|p| p.seed == seed) {
            rows.push(Row {
                row: "point",
                seed,
                l: Some(p.l),
                s_bits: Some(p.s_bits),
                s_gf2: p.s_gf2,
                c0_fit: None,
                residual: None,
                error: None,
            });
        }
        for e in scan.errors.iter().filter(|e| e.seed == seed) {
            rows.push(Row {
                row: "error",
                seed,
                l: Some(e.l),
                s_bits: None,
                s_gf2: None,
                c0_fit: None,
                residual: None,
                error: Some(e.message.clone()),
            });
        }
        for f in scan.fits.iter().filter(|f| f.seed == seed) {
            rows.push(Row {
                row: "fit",
                seed,
                l: None,
                s_bits: None,
                s_gf2: None,
                c0_fit: Some(f.c0),
                residual: Some(f.residual),
                error: None,
            });
        }
    }
    rows
}

pub fn run(args: &RingScanArgs) -> CliResult<Output> {
    let common = &args.common;
    let header = Header::new("ring-scan", common, args.argv()?)?;
    let spec = common.spec()?;
    let seeds = if args.seeds.is_empty() {
        vec![spec.seed().unwrap_or(common.seed)]
    } else {
        args.seeds.clone()
    };
    let result = scan(&spec, &seeds, args.lmin, args.lmax, args.workers, common.caps())?;
    let text = render(common.out, &header, &result, &rows(&result))?;
    let out = Output::ok(text);
    if let Some(e) = result.errors.first() {
        return Ok(out.failing(
            e.code,
            format!("{} of the ring sizes failed, first at seed {} l = {}: {}", result.errors.len(), e.seed, e.l, e.message),
        ));
    }
    if let Some(dev) = result.gf2_deviation {
        if dev > GF2_AGREEMENT {
            return Ok(out.failing(
                EXIT_INCONSISTENT,
                format!("numerical inconsistency: dense and GF(2) ring entropies differ by {dev:e}"),
            ));
        }
    }
    Ok(out)
}
