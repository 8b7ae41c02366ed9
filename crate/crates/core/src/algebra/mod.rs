//! Finite-dimensional operator algebras: closures, commutants, Wedderburn
//! blocks, conditional expectations and correctable algebras.

mod blocks;
mod correctable;
mod logical;

pub use blocks::{block_decomposition, block_decomposition_seeded, BlockDecomposition};
pub use correctable::{
    algebra_saturation_check, complementary_recovery_check, correctable_algebra,
    correctable_algebra_of_span, dual_complementarity_check, error_span, iterated_error_span,
    DualComplementarityReport, RecoveryReport, SaturationLevel, AlgebraSaturationReport,
};
pub use logical::{logical_operators, operator_schmidt_rank, LogicalSolution};

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::tensor::{ComplexMatrix, C64};
use crate::tol;

/// Unital *-closed span of operators, held as a Hilbert-Schmidt orthonormal basis.
#[derive(Clone, Debug)]
pub struct OperatorAlgebra {
    dim: usize,
    basis: Vec<ComplexMatrix>,
}

/// Serialized summary of an algebra.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgebraSummary {
    pub blocks: Vec<[usize; 2]>,
    pub dim: usize,
    pub center_dim: usize,
}

impl OperatorAlgebra {
    /// `M_d`.
    pub fn full(d: usize) -> Self {
        let basis = (0..d * d)
            .map(|k| ComplexMatrix::unit(d, d, k / d, k % d))
            .collect();
        OperatorAlgebra { dim: d, basis }
    }

    /// `C I` in dimension `d`.
    pub fn scalars(d: usize) -> Self {
        OperatorAlgebra {
            dim: d,
            basis: vec![ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt())],
        }
    }

    /// Diagonal matrices.
    pub fn diagonal(d: usize) -> Self {
        OperatorAlgebra {
            dim: d,
            basis: (0..d).map(|i| ComplexMatrix::unit(d, d, i, i)).collect(),
        }
    }

    /// Wraps an orthonormal basis already known to span a unital *-algebra.
    pub(crate) fn from_orthonormal(dim: usize, basis: Vec<ComplexMatrix>) -> Self {
        OperatorAlgebra { dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the algebra as a vector space.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// Hilbert-Schmidt orthogonal projection onto the algebra.
    pub fn conditional_expectation(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.dim, self.dim) {
            return Err(LabError::DimensionMismatch(format!(
                "{:?} operator for an algebra on dimension {}",
                x.shape(),
                self.dim
            )));
        }
        Ok(project(&self.basis, x))
    }

    /// Distance of a normalized `x` from the algebra.
    pub fn distance(&self, x: &ComplexMatrix) -> f64 {
        let n = x.frobenius_norm();
        if n == 0.0 {
            return 0.0;
        }
        (x - &project(&self.basis, x)).frobenius_norm() / n
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.distance(x) <= tol
    }

    /// Largest distance of any basis element of `other` from `self`.
    pub fn containment_residual(&self, other: &OperatorAlgebra) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.distance(b))
            .fold(0.0, f64::max)
    }

    /// Symmetric span distance; zero iff the spans agree.
    pub fn span_distance(&self, other: &OperatorAlgebra) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.containment_residual(other)
            .max(other.containment_residual(self))
    }

    pub fn span_equals(&self, other: &OperatorAlgebra, tol: f64) -> bool {
        self.span_distance(other) <= tol
    }

    /// Conjugates every element by a unitary: `W^dagger a W`.
    pub fn conjugate_by(&self, w: &ComplexMatrix) -> OperatorAlgebra {
        let wd = w.adjoint();
        OperatorAlgebra {
            dim: self.dim,
            basis: self.basis.iter().map(|b| wd.matmul(b).matmul(w)).collect(),
        }
    }

    /// `A ⊗ B` for algebras on separate factors.
    pub fn tensor(&self, other: &OperatorAlgebra) -> OperatorAlgebra {
        let mut basis = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.basis {
            for b in &other.basis {
                basis.push(a.kron(b));
            }
        }
        OperatorAlgebra {
            dim: self.dim * other.dim,
            basis,
        }
    }

    pub fn summary(&self) -> Result<AlgebraSummary> {
        let blocks = block_decomposition(self)?;
        Ok(AlgebraSummary {
            blocks: blocks.blocks().iter().map(|&(n, m)| [n, m]).collect(),
            dim: self.dim(),
            center_dim: blocks.blocks().len(),
        })
    }
}

fn project(basis: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
    for b in basis {
        out += &b.scale(b.hs_inner(x));
    }
    out
}

/// Grows an orthonormal basis by the parts of `candidates` outside its span.
/// Returns how many elements were added.
pub(crate) fn extend_span(basis: &mut Vec<ComplexMatrix>, candidates: &[ComplexMatrix]) -> usize {
    let before = basis.len();
    // rounding-level candidates would otherwise be normalized into noise directions
    let scale = candidates.iter().map(|c| c.frobenius_norm()).fold(0.0, f64::max);
    for c in candidates {
        let n = c.frobenius_norm();
        if n <= tol::RANK_RELATIVE * scale {
            continue;
        }
        let mut r = c.scale_real(1.0 / n);
        // two passes keep the basis orthonormal to working precision
        for _ in 0..2 {
            for b in basis.iter() {
                let coeff = b.hs_inner(&r);
                r = &r - &b.scale(coeff);
            }
        }
        let rn = r.frobenius_norm();
        if rn > tol::RANK_RELATIVE {
            basis.push(r.scale_real(1.0 / rn));
        }
    }
    basis.len() - before
}

/// Orthonormal basis of the span of `mats`.
pub(crate) fn orthonormal_span(mats: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut basis = Vec::new();
    extend_span(&mut basis, mats);
    basis
}

/// Smallest unital *-algebra containing the generators.
pub fn algebra_closure(generators: &[ComplexMatrix]) -> Result<OperatorAlgebra> {
    let d = match generators.first() {
        Some(g) => g.rows(),
        None => {
            return Err(LabError::InvalidArgument(
                "closure needs at least one generator to fix the dimension".into(),
            ))
        }
    };
    if let Some(g) = generators.iter().find(|g| g.shape() != (d, d)) {
        return Err(LabError::DimensionMismatch(format!(
            "generator of shape {:?} among {d}x{d} generators",
            g.shape()
        )));
    }
    let mut seeds = vec![ComplexMatrix::identity(d)];
    for g in generators {
        seeds.push(g.clone());
        seeds.push(g.adjoint());
    }
    let mut basis = Vec::new();
    extend_span(&mut basis, &seeds);
    Ok(close_under_products(d, basis))
}

/// Closes an orthonormal, *-closed, unital span under multiplication.
pub(crate) fn close_under_products(d: usize, mut basis: Vec<ComplexMatrix>) -> OperatorAlgebra {
    let full = d * d;
    let mut fresh_from = 0;
    while basis.len() < full {
        let len = basis.len();
        let mut products = Vec::new();
        for i in 0..len {
            for j in 0..len {
                if i < fresh_from && j < fresh_from {
                    continue;
                }
                products.push(basis[i].matmul(&basis[j]));
            }
        }
        fresh_from = len;
        if extend_span(&mut basis, &products) == 0 {
            break;
        }
    }
    OperatorAlgebra { dim: d, basis }
}

/// Null space of a stacked linear map given as a matrix, as unit column vectors.
fn null_space(m: &ComplexMatrix) -> Result<Vec<Vec<C64>>> {
    let cols = m.cols();
    // a thin SVD already has the complete right factor when rows >= cols
    let (_, s, v) = if m.rows() >= cols { m.thin_svd()? } else { m.full_svd()? };
    let smax = s.first().copied().unwrap_or(0.0);
    let cut = tol::RANK_RELATIVE * smax.max(1.0);
    Ok((0..cols)
        .filter(|&j| s.get(j).map_or(true, |&x| x < cut))
        .map(|j| v.column(j))
        .collect())
}

/// All `X` with `[X, G] = 0` for every `G` in the algebra.
pub fn commutant(alg: &OperatorAlgebra) -> Result<OperatorAlgebra> {
    let d = alg.dim;
    let dd = d * d;
    let id = ComplexMatrix::identity(d);
    // Row-major vec: vec(XG) = (I ⊗ G^T) vec(X), vec(GX) = (G ⊗ I) vec(X).
    let gens = &alg.basis;
    let mut stacked = ComplexMatrix::zeros(gens.len() * dd, dd);
    for (g_idx, g) in gens.iter().enumerate() {
        let block = &id.kron(&g.transpose()) - &g.kron(&id);
        for r in 0..dd {
            for c in 0..dd {
                stacked.set(g_idx * dd + r, c, block.get(r, c));
            }
        }
    }
    let basis = null_space(&stacked)?
        .into_iter()
        .map(|v| ComplexMatrix::from_vec(d, d, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(OperatorAlgebra {
        dim: d,
        basis: orthonormal_span(&basis),
    })
}

/// Orthonormal basis of `Z(A) = A ∩ A'`.
pub fn center(alg: &OperatorAlgebra) -> Result<OperatorAlgebra> {
    let d = alg.dim;
    let m = alg.basis.len();
    let dd = d * d;
    // coefficients c with [sum_i c_i B_i, B_j] = 0 for all j
    let mut stacked = ComplexMatrix::zeros(m * dd, m);
    for (j, bj) in alg.basis.iter().enumerate() {
        for (i, bi) in alg.basis.iter().enumerate() {
            let c = bi.commutator(bj);
            for (r, &z) in c.as_slice().iter().enumerate() {
                stacked.set(j * dd + r, i, z);
            }
        }
    }
    let elems: Vec<ComplexMatrix> = null_space(&stacked)?
        .into_iter()
        .map(|coef| {
            let mut z = ComplexMatrix::zeros(d, d);
            for (c, b) in coef.iter().zip(&alg.basis) {
                z += &b.scale(*c);
            }
            z
        })
        .collect();
    Ok(OperatorAlgebra {
        dim: d,
        basis: orthonormal_span(&elems),
    })
}

/// Hermitian elements spanning the same real space as the basis' Hermitian parts.
pub(crate) fn hermitian_parts(basis: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let half = C64::new(0.5, 0.0);
    let half_i = C64::new(0.0, -0.5);
    let mut out = Vec::with_capacity(2 * basis.len());
    for b in basis {
        let bd = b.adjoint();
        out.push((b + &bd).scale(half));
        out.push((b - &bd).scale(half_i));
    }
    out
}

pub fn conditional_expectation(alg: &OperatorAlgebra, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    alg.conditional_expectation(x)
}

/// Deviation of the basis from closure under adjoint and products, for tests.
pub fn closure_defect(alg: &OperatorAlgebra) -> f64 {
    let mut worst = alg.distance(&ComplexMatrix::identity(alg.dim));
    for a in &alg.basis {
        worst = worst.max(alg.distance(&a.adjoint()));
        for b in &alg.basis {
            worst = worst.max(alg.distance(&a.matmul(b)));
        }
    }
    worst
}
