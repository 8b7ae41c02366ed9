use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{center, hermitian_parts, orthonormal_span, OperatorAlgebra};
use crate::error::{LabError, Result};
use crate::tensor::{ComplexMatrix, C64};

const ATTEMPTS: usize = 5;
/// Eigenvalues closer than this (relative to the spectral scale) are one cluster.
const CLUSTER_GAP: f64 = 1e-7;
/// Distinct clusters must be separated by at least this much.
const SEPARATION: f64 = 1e-4;
const PATTERN_TOL: f64 = 1e-8;

/// Wedderburn data `A ≅ ⊕_k M_{n_k} ⊗ I_{n_k'}` with the aligning unitary.
#[derive(Clone, Debug, Serialize)]
pub struct BlockDecomposition {
    blocks: Vec<(usize, usize)>,
    basis_change: ComplexMatrix,
}

impl BlockDecomposition {
    /// Block pattern in the standard basis.
    pub fn from_blocks(blocks: Vec<(usize, usize)>) -> Result<Self> {
        if blocks.iter().any(|&(n, m)| n == 0 || m == 0) {
            return Err(LabError::InvalidArgument(format!(
                "block sizes must be positive: {blocks:?}"
            )));
        }
        let d = blocks.iter().map(|(n, m)| n * m).sum();
        Ok(BlockDecomposition {
            blocks,
            basis_change: ComplexMatrix::identity(d),
        })
    }

    /// `(n_k, n_k')` pairs.
    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn basis_change(&self) -> &ComplexMatrix {
        &self.basis_change
    }

    pub fn ambient_dim(&self) -> usize {
        self.blocks.iter().map(|(n, m)| n * m).sum()
    }

    /// Vector-space dimension `sum n_k^2`.
    pub fn algebra_dim(&self) -> usize {
        self.blocks.iter().map(|(n, _)| n * n).sum()
    }

    /// Rebuilds the algebra `W (⊕ M_{n_k} ⊗ I) W^dagger`.
    pub fn algebra(&self) -> OperatorAlgebra {
        let d = self.ambient_dim();
        let w = &self.basis_change;
        let wd = w.adjoint();
        let mut basis = Vec::with_capacity(self.algebra_dim());
        let mut offset = 0;
        for &(n, m) in &self.blocks {
            let norm = 1.0 / (m as f64).sqrt();
            for i in 0..n {
                for j in 0..n {
                    let mut e = ComplexMatrix::zeros(d, d);
                    for r in 0..m {
                        e.set(offset + i * m + r, offset + j * m + r, C64::new(norm, 0.0));
                    }
                    basis.push(w.matmul(&e).matmul(&wd));
                }
            }
            offset += n * m;
        }
        OperatorAlgebra::from_orthonormal(d, basis)
    }

    /// Largest Frobenius mass of `W^dagger b W` outside the declared pattern.
    pub fn off_pattern_mass(&self, alg: &OperatorAlgebra) -> f64 {
        let w = &self.basis_change;
        let wd = w.adjoint();
        alg.basis()
            .iter()
            .map(|b| {
                let t = wd.matmul(b).matmul(w);
                (&t - &self.project_pattern(&t)).frobenius_norm()
            })
            .fold(0.0, f64::max)
    }

    fn project_pattern(&self, t: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(t.rows(), t.cols());
        let mut offset = 0;
        for &(n, m) in &self.blocks {
            for i in 0..n {
                for j in 0..n {
                    let avg: C64 = (0..m)
                        .map(|r| t.get(offset + i * m + r, offset + j * m + r))
                        .sum::<C64>()
                        / m as f64;
                    for r in 0..m {
                        out.set(offset + i * m + r, offset + j * m + r, avg);
                    }
                }
            }
            offset += n * m;
        }
        out
    }
}

pub fn block_decomposition(alg: &OperatorAlgebra) -> Result<BlockDecomposition> {
    block_decomposition_seeded(alg, 0x5eed)
}

/// Wedderburn decomposition; the random generic elements are drawn from `seed`.
pub fn block_decomposition_seeded(alg: &OperatorAlgebra, seed: u64) -> Result<BlockDecomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = center(alg)?;
    let mut last = String::new();
    for _ in 0..ATTEMPTS {
        match attempt(alg, &z, &mut rng) {
            Ok(Some(bd)) => return Ok(bd),
            Ok(None) => last = "degenerate generic element".into(),
            Err(e) => return Err(e),
        }
    }
    Err(LabError::NumericalInconsistency(format!(
        "block decomposition failed after {ATTEMPTS} draws: {last}"
    )))
}

fn random_hermitian(parts: &[ComplexMatrix], dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim, dim);
    for p in parts {
        h += &p.scale_real(rng.random_range(-1.0..1.0));
    }
    // symmetrize away rounding
    (&h + &h.adjoint()).scale_real(0.5)
}

/// Groups ascending eigenvalues; `None` if two groups are too close to trust.
fn clusters(values: &[f64]) -> Option<Vec<std::ops::Range<usize>>> {
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > CLUSTER_GAP * scale {
            if i < values.len() && values[i] - values[i - 1] < SEPARATION * scale {
                return None;
            }
            out.push(start..i);
            start = i;
        }
    }
    Some(out)
}

fn columns(m: &ComplexMatrix, range: std::ops::Range<usize>) -> ComplexMatrix {
    let start = range.start;
    ComplexMatrix::from_fn(m.rows(), range.len(), |r, c| m.get(r, start + c))
}

fn attempt(
    alg: &OperatorAlgebra,
    z: &OperatorAlgebra,
    rng: &mut ChaCha8Rng,
) -> Result<Option<BlockDecomposition>> {
    let d = alg.ambient_dim();
    let h = random_hermitian(&hermitian_parts(z.basis()), d, rng);
    let (vals, vecs) = h.hermitian_eigen()?;
    let Some(groups) = clusters(&vals) else {
        return Ok(None);
    };
    if groups.len() != z.dim() {
        return Ok(None);
    }
    let mut blocks = Vec::new();
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for g in groups {
        let rank = g.len();
        let q = columns(&vecs, g);
        let qd = q.adjoint();
        let compressed: Vec<ComplexMatrix> =
            alg.basis().iter().map(|b| qd.matmul(b).matmul(&q)).collect();
        let sub = orthonormal_span(&compressed);
        let n = (sub.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != sub.len() || rank % n != 0 {
            return Err(LabError::NumericalInconsistency(format!(
                "central block of rank {rank} carries a {}-dimensional algebra",
                sub.len()
            )));
        }
        let m = rank / n;
        let Some(local) = block_basis(&sub, rank, n, m, rng)? else {
            return Ok(None);
        };
        let ambient = q.matmul(&local);
        for c in 0..rank {
            cols.push(ambient.column(c));
        }
        blocks.push((n, m));
    }
    let w = ComplexMatrix::from_fn(d, d, |r, c| cols[c][r]);
    let bd = BlockDecomposition {
        blocks,
        basis_change: w,
    };
    if bd.off_pattern_mass(alg) > PATTERN_TOL || bd.basis_change.isometry_deviation() > PATTERN_TOL
    {
        return Ok(None);
    }
    Ok(Some(bd))
}

/// Orthonormal basis of a central block in which the compressed algebra reads
/// `M_n ⊗ I_m`: `f_{i,j} = e_{i1} f_{1,j}` with matrix units built from a
/// generic element.
fn block_basis(
    sub: &[ComplexMatrix],
    rank: usize,
    n: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Option<ComplexMatrix>> {
    if n == 1 {
        return Ok(Some(ComplexMatrix::identity(rank)));
    }
    let parts = hermitian_parts(sub);
    let g = random_hermitian(&parts, rank, rng);
    let (vals, vecs) = g.hermitian_eigen()?;
    let Some(groups) = clusters(&vals) else {
        return Ok(None);
    };
    if groups.len() != n || groups.iter().any(|r| r.len() != m) {
        return Ok(None);
    }
    let pis: Vec<ComplexMatrix> = groups.into_iter().map(|r| columns(&vecs, r)).collect();
    let b = random_hermitian(&parts, rank, rng);
    let b_p1 = b.matmul(&pis[0]);
    let mut out = ComplexMatrix::zeros(rank, rank);
    for (i, pi) in pis.iter().enumerate() {
        let f = if i == 0 {
            pis[0].clone()
        } else {
            let coupling = pi.adjoint().matmul(&b_p1);
            let scale = coupling.frobenius_norm() / (m as f64).sqrt();
            if scale < SEPARATION {
                return Ok(None);
            }
            pi.matmul(&coupling).scale_real(1.0 / scale)
        };
        for j in 0..m {
            for r in 0..rank {
                out.set(r, i * m + j, f.get(r, j));
            }
        }
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::algebra_closure;
    use crate::tensor::paulis;

    fn pattern(alg: &OperatorAlgebra) -> Vec<(usize, usize)> {
        let mut b = block_decomposition(alg).unwrap().blocks().to_vec();
        b.sort();
        b
    }

    #[test]
    fn scalars_in_dim_three() {
        assert_eq!(pattern(&OperatorAlgebra::scalars(3)), vec![(1, 3)]);
    }

    #[test]
    fn full_tensor_identity() {
        let alg = OperatorAlgebra::full(2).tensor(&OperatorAlgebra::scalars(2));
        assert_eq!(pattern(&alg), vec![(2, 2)]);
    }

    #[test]
    fn diagonal_qubit() {
        assert_eq!(pattern(&OperatorAlgebra::diagonal(2)), vec![(1, 1), (1, 1)]);
    }

    #[test]
    fn mixed_pattern_round_trip() {
        // M_2 ⊗ I_2 ⊕ C on dimension 5, hidden by a unitary
        let [_, x, y, z] = paulis();
        let embed = |m: &ComplexMatrix| {
            let big = m.kron(&ComplexMatrix::identity(2));
            ComplexMatrix::from_fn(5, 5, |r, c| if r < 4 && c < 4 { big.get(r, c) } else { C64::new(0.0, 0.0) })
        };
        let mut p = ComplexMatrix::zeros(5, 5);
        p.set(4, 4, C64::new(1.0, 0.0));
        let u = crate::tensor::haar_unitary(5, 11).unwrap();
        let gens: Vec<_> = [embed(&x), embed(&y), embed(&z), p]
            .iter()
            .map(|g| u.matmul(g).matmul(&u.adjoint()))
            .collect();
        let alg = algebra_closure(&gens).unwrap();
        assert_eq!(alg.dim(), 5);
        let bd = block_decomposition(&alg).unwrap();
        let mut b = bd.blocks().to_vec();
        b.sort();
        assert_eq!(b, vec![(1, 1), (2, 2)]);
        assert!(bd.off_pattern_mass(&alg) < 1e-8);
        assert!(bd.algebra().span_equals(&alg, 1e-8));
    }
}
