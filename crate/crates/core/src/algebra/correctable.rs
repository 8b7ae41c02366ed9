use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{close_under_products, commutant, extend_span, orthonormal_span, OperatorAlgebra};
use crate::chain::ChainModel;
use crate::channel::{complementary, KrausChannel};
use crate::error::{LabError, Result};
use crate::tensor::{ComplexMatrix, C64};
use crate::tol::Tolerances;

/// Orthonormal basis of `span{K_a^dagger K_b}`.
pub fn error_span(ch: &KrausChannel) -> Vec<ComplexMatrix> {
    let adj: Vec<ComplexMatrix> = ch.kraus().iter().map(|k| k.adjoint()).collect();
    let mut prods = Vec::with_capacity(adj.len() * adj.len());
    for a in &adj {
        for b in ch.kraus() {
            prods.push(a.matmul(b));
        }
    }
    orthonormal_span(&prods)
}

/// Commutant of the algebra generated by an error span.
pub fn correctable_algebra_of_span(span: &[ComplexMatrix], d: usize) -> Result<OperatorAlgebra> {
    let mut basis = Vec::new();
    extend_span(&mut basis, &[ComplexMatrix::identity(d)]);
    extend_span(&mut basis, span);
    let adjoints: Vec<ComplexMatrix> = span.iter().map(|s| s.adjoint()).collect();
    extend_span(&mut basis, &adjoints);
    commutant(&close_under_products(d, basis))
}

/// `A_E = Alg{K_a^dagger K_b}'`.
pub fn correctable_algebra(ch: &KrausChannel) -> Result<OperatorAlgebra> {
    correctable_algebra_of_span(&error_span(ch), ch.in_dim())
}

/// Above this many products `K_a^dagger (I ⊗ Y) K_b` the span is sampled instead.
const EXACT_PRODUCTS: usize = 4096;
/// Samples beyond the largest possible span dimension `D^2`.
const SKETCH_OVERSAMPLING: usize = 16;

/// `(I_dx ⊗ Y) K` without forming the Kronecker product.
fn identity_kron_times(dx: usize, y: &ComplexMatrix, k: &ComplexMatrix) -> ComplexMatrix {
    let d = y.rows();
    let mut out = ComplexMatrix::zeros(k.rows(), k.cols());
    for x in 0..dx {
        for i in 0..d {
            for j in 0..d {
                let yij = y.get(i, j);
                if yij == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..k.cols() {
                    let v = out.get(x * d + i, c) + yij * k.get(x * d + j, c);
                    out.set(x * d + i, c, v);
                }
            }
        }
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn combine(mats: &[ComplexMatrix], rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(mats[0].rows(), mats[0].cols());
    for m in mats {
        out += &m.scale(gaussian(rng));
    }
    out
}

/// Random elements `A^dagger (I ⊗ Y) B` with `A`, `B` in the Kraus span and
/// `Y` in `span`. The products form the image of a multilinear map, so
/// generic samples span the same space as all of them.
fn sketch(
    kraus: &[ComplexMatrix],
    span: &[ComplexMatrix],
    dx: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<ComplexMatrix> {
    (0..samples)
        .map(|_| {
            let a = combine(kraus, rng);
            let b = combine(kraus, rng);
            let y = combine(span, rng);
            a.adjoint().matmul(&identity_kron_times(dx, &y, &b))
        })
        .collect()
}

/// Error span of `Ẽ^(n)` (or of `Tr_C ∘ Ẽ^(n)` when `traced`) for a tilde map
/// `step: C -> X ⊗ C`, without forming the `k^n` Kraus operators.
///
/// Uses `S(Φ2 ∘ Φ1) = span{K_a^dagger Y K_b : Y ∈ S(Φ2)}` with
/// `Ẽ^(n) = (id_X ⊗ Ẽ^(n-1)) ∘ Ẽ`, starting from `S(id) = C I` or `S(Tr) = M_D`.
pub fn iterated_error_span(step: &KrausChannel, n: usize, traced: bool) -> Result<Vec<ComplexMatrix>> {
    let d = step.in_dim();
    if step.out_dim() % d != 0 {
        return Err(LabError::DimensionMismatch(format!(
            "step output dimension {} is not a multiple of the input {d}",
            step.out_dim()
        )));
    }
    let dx = step.out_dim() / d;
    let mut span = if traced {
        OperatorAlgebra::full(d).basis().to_vec()
    } else {
        vec![ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt())]
    };
    let adj: Vec<ComplexMatrix> = step.kraus().iter().map(|k| k.adjoint()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..n {
        let products = adj.len() * adj.len() * span.len();
        let prods = if products <= EXACT_PRODUCTS {
            let mut prods = Vec::with_capacity(products);
            for y in &span {
                for kb in step.kraus() {
                    let right = identity_kron_times(dx, y, kb);
                    for ka in &adj {
                        prods.push(ka.matmul(&right));
                    }
                }
            }
            prods
        } else {
            sketch(step.kraus(), &span, dx, d * d + SKETCH_OVERSAMPLING, &mut rng)
        };
        let next = orthonormal_span(&prods);
        let same = next.len() == span.len() && {
            let alg = OperatorAlgebra::from_orthonormal(d, span.clone());
            next.iter().all(|x| alg.distance(x) <= 1e-10)
        };
        span = next;
        if same {
            break;
        }
    }
    Ok(span)
}

/// Outcome of the complementary-recovery test and its Heisenberg and
/// Schrödinger reformulations.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub pass: bool,
    pub max_residual: f64,
    /// Span distance between `A_{E^c}` and `A_E'`.
    pub span_residual: f64,
    /// `max_O |E^dagger(O) - P_A(E^dagger(O))|` over matrix units `O`.
    pub observable_residual: f64,
    /// `max_X |E(P_A(X)) - E(X)|` over matrix units `X`.
    pub state_residual: f64,
    pub correctable_dim: usize,
    pub complement_dim: usize,
    pub commutant_dim: usize,
    pub witnesses: Vec<String>,
    #[serde(skip)]
    pub algebra: Option<OperatorAlgebra>,
}

/// `A_{E^c} = A_E'`, cross-checked against `P_A^dagger ∘ E^dagger = E^dagger`
/// and `E ∘ P_A = E`.
pub fn complementary_recovery_check(ch: &KrausChannel, tol: &Tolerances) -> Result<RecoveryReport> {
    let a = correctable_algebra(ch)?;
    let ac = correctable_algebra(&complementary(ch)?)?;
    let a_prime = commutant(&a)?;
    let span_residual = ac.span_distance(&a_prime);

    let dout = ch.out_dim();
    let mut observable_residual = 0.0f64;
    for r in 0..dout {
        for c in 0..dout {
            let heis = ch.adjoint_apply(&ComplexMatrix::unit(dout, dout, r, c))?;
            let proj = a.conditional_expectation(&heis)?;
            observable_residual = observable_residual.max((&heis - &proj).frobenius_norm());
        }
    }
    let din = ch.in_dim();
    let mut state_residual = 0.0f64;
    for r in 0..din {
        for c in 0..din {
            let x = ComplexMatrix::unit(din, din, r, c);
            let direct = ch.apply_matrix(&x)?;
            let via = ch.apply_matrix(&a.conditional_expectation(&x)?)?;
            state_residual = state_residual.max((&direct - &via).frobenius_norm());
        }
    }

    let span_ok = span_residual <= tol.span;
    let obs_ok = observable_residual <= tol.expectation;
    let state_ok = state_residual <= tol.expectation;
    if span_ok != obs_ok || obs_ok != state_ok {
        return Err(LabError::NumericalInconsistency(format!(
            "complementary recovery tests disagree: span {span_residual:e}, \
             observable {observable_residual:e}, state {state_residual:e}"
        )));
    }
    let mut witnesses = Vec::new();
    let ac_in_commutant = a_prime.containment_residual(&ac);
    let commutant_in_ac = ac.containment_residual(&a_prime);
    if ac_in_commutant > tol.span {
        witnesses.push(format!(
            "complement algebra leaves the commutant (residual {ac_in_commutant:e})"
        ));
    }
    if commutant_in_ac > tol.span {
        witnesses.push(format!(
            "commutant ({}-dim) is larger than the complement algebra ({}-dim)",
            a_prime.dim(),
            ac.dim()
        ));
    }
    Ok(RecoveryReport {
        pass: span_ok,
        max_residual: span_residual.max(observable_residual).max(state_residual),
        span_residual,
        observable_residual,
        state_residual,
        correctable_dim: a.dim(),
        complement_dim: ac.dim(),
        commutant_dim: a_prime.dim(),
        witnesses,
        algebra: Some(a),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DualComplementarityReport {
    pub pass: bool,
    pub e_tilde: RecoveryReport,
    pub f_tilde: RecoveryReport,
    /// `A = A_Ẽ`.
    #[serde(skip)]
    pub a: OperatorAlgebra,
    /// `B = A_F̃`.
    #[serde(skip)]
    pub b: OperatorAlgebra,
}

/// Complementary recovery for both `Ẽ` and `F̃`.
pub fn dual_complementarity_check(
    model: &ChainModel,
    tol: &Tolerances,
) -> Result<DualComplementarityReport> {
    let mut e = complementary_recovery_check(&model.tilde_e()?, tol)?;
    let mut f = complementary_recovery_check(&model.tilde_f()?, tol)?;
    let a = e.algebra.take().expect("recovery report carries its algebra");
    let b = f.algebra.take().expect("recovery report carries its algebra");
    Ok(DualComplementarityReport {
        pass: e.pass && f.pass,
        e_tilde: e,
        f_tilde: f,
        a,
        b,
    })
}

/// Span distances between the one-step and n-step correctable algebras.
#[derive(Clone, Debug, Serialize)]
pub struct SaturationLevel {
    pub n: usize,
    pub e: f64,
    pub f: f64,
    pub traced_e: f64,
    pub traced_f: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgebraSaturationReport {
    pub pass: bool,
    pub max_residual: f64,
    pub levels: Vec<SaturationLevel>,
}

/// `A_Ẽ = A_{Ẽ^(n)}`, `A_F̃ = A_{F̃^(n)}` and the same with `C` traced, for `2 <= n <= n_max`.
pub fn algebra_saturation_check(
    model: &ChainModel,
    n_max: usize,
    tol: &Tolerances,
) -> Result<AlgebraSaturationReport> {
    if n_max < 2 {
        return Err(LabError::InvalidArgument("n_max must be at least 2".into()));
    }
    let d = model.bond_dim();
    let et = model.tilde_e()?;
    let ft = model.tilde_f()?;
    let alg = |step: &KrausChannel, n: usize, traced: bool| -> Result<OperatorAlgebra> {
        correctable_algebra_of_span(&iterated_error_span(step, n, traced)?, d)
    };
    let base = [
        alg(&et, 1, false)?,
        alg(&ft, 1, false)?,
        alg(&et, 1, true)?,
        alg(&ft, 1, true)?,
    ];
    let mut levels = Vec::new();
    for n in 2..=n_max {
        let dist = |i: usize, step: &KrausChannel, traced: bool| -> Result<f64> {
            Ok(base[i].span_distance(&alg(step, n, traced)?))
        };
        levels.push(SaturationLevel {
            n,
            e: dist(0, &et, false)?,
            f: dist(1, &ft, false)?,
            traced_e: dist(2, &et, true)?,
            traced_f: dist(3, &ft, true)?,
        });
    }
    let max_residual = levels
        .iter()
        .flat_map(|l| [l.e, l.f, l.traced_e, l.traced_f])
        .fold(0.0, f64::max);
    Ok(AlgebraSaturationReport {
        pass: max_residual <= tol.span,
        max_residual,
        levels,
    })
}
