use serde::Serialize;

use super::correctable_algebra;
use crate::chain::{build_open_chain, ChainModel};
use crate::channel::KrausChannel;
use crate::error::{LabError, Result};
use crate::tensor::{axis_offsets, permute_operator, ComplexMatrix, SubsystemLayout, C64};
use crate::tol::{self, Tolerances};

/// A solution `Õ` of `(Õ ⊗ I) W = W O` on a chosen support.
#[derive(Clone, Debug, Serialize)]
pub struct LogicalSolution {
    /// Minimum-norm solution.
    pub particular: ComplexMatrix,
    pub support: SubsystemLayout,
    /// Dimension of the space of operators `X` with `(X ⊗ I) W = 0`.
    pub kernel_dim: usize,
    pub unique: bool,
    pub residual: f64,
}

/// The chain isometry `W: C0 -> B1 E1 … Bn En C` with `φ^(n) = (id ⊗ W) ω_D`.
pub(crate) fn chain_isometry(model: &ChainModel, n: usize) -> Result<(ComplexMatrix, SubsystemLayout)> {
    let phi = build_open_chain(model, n)?;
    let d = model.bond_dim();
    let layout = phi.psi().layout();
    let out = layout.select(&(1..layout.len()).collect::<Vec<_>>());
    let dout = out.total_dim();
    let s = (d as f64).sqrt();
    let amps = phi.psi().amplitudes();
    let w = ComplexMatrix::from_fn(dout, d, |r, a| amps[a * dout + r] * s);
    Ok((w, out))
}

/// Finds `Õ` on `support` with `V(O|ψ>) = (Õ ⊗ I) V|ψ>` for the n-site chain.
pub fn logical_operators<S: AsRef<str>>(
    model: &ChainModel,
    o: &ComplexMatrix,
    n: usize,
    support: &[S],
    tol: &Tolerances,
) -> Result<LogicalSolution> {
    let d = model.bond_dim();
    if o.shape() != (d, d) {
        return Err(LabError::DimensionMismatch(format!(
            "{:?} operator for bond dimension {d}",
            o.shape()
        )));
    }
    let (w, out) = chain_isometry(model, n)?;
    let s_axes = out.indices(support)?;
    let r_axes = out.complement(&s_axes);
    let dims = out.dims();
    let so = axis_offsets(&dims, &s_axes);
    let ro = axis_offsets(&dims, &r_axes);
    let (ds, dr) = (so.len(), ro.len());

    let to_support = KrausChannel::from_parts(
        ro.iter()
            .map(|&r| ComplexMatrix::from_fn(ds, d, |s, i| w.get(so[s] + r, i)))
            .collect(),
        SubsystemLayout::single("C0", d)?,
        out.select(&s_axes),
    )?;
    let alg = correctable_algebra(&to_support)?;
    let miss = o.max_abs_diff(&alg.conditional_expectation(o)?);
    if miss > tol.expectation {
        return Err(LabError::NotEncodable(miss));
    }

    // (Õ ⊗ I) W = W O  ⇔  Õ Wm = Bm with Wm[s, (r, i)] = W[(s, r), i]
    let wo = w.matmul(o);
    let wm = ComplexMatrix::from_fn(ds, dr * d, |s, c| w.get(so[s] + ro[c / d], c % d));
    let bm = ComplexMatrix::from_fn(ds, dr * d, |s, c| wo.get(so[s] + ro[c / d], c % d));
    let (u, sv, v) = wm.thin_svd()?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&x| x > tol::RANK_RELATIVE * smax).count();
    let inv: Vec<C64> = sv
        .iter()
        .map(|&x| {
            if x > tol::RANK_RELATIVE * smax {
                C64::new(1.0 / x, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let pinv = v
        .matmul(&ComplexMatrix::from_diagonal(&inv))
        .matmul(&u.adjoint());
    let particular = bm.matmul(&pinv);
    let residual = particular.matmul(&wm).max_abs_diff(&bm);
    if residual > tol.logical {
        return Err(LabError::NoLogicalOperator(residual));
    }
    let kernel_dim = ds * (ds - rank);
    Ok(LogicalSolution {
        particular,
        support: out.select(&s_axes),
        kernel_dim,
        unique: kernel_dim == 0,
        residual,
    })
}

/// Number of product terms needed to write `o` across the cut `left | rest`.
pub fn operator_schmidt_rank<S: AsRef<str>>(
    o: &ComplexMatrix,
    layout: &SubsystemLayout,
    left: &[S],
) -> Result<usize> {
    let left_axes = layout.indices(left)?;
    let mut order: Vec<String> = left_axes
        .iter()
        .map(|&i| layout.factors()[i].label.clone())
        .collect();
    order.extend(
        layout
            .complement(&left_axes)
            .into_iter()
            .map(|i| layout.factors()[i].label.clone()),
    );
    let (p, _) = permute_operator(o, layout, &order)?;
    let dl: usize = left_axes.iter().map(|&i| layout.factors()[i].dim).product();
    let dr = layout.total_dim() / dl;
    // O[(l, r), (l', r')] -> R[(l, l'), (r, r')]
    let reshuffled = ComplexMatrix::from_fn(dl * dl, dr * dr, |a, b| {
        let (l, lp) = (a / dl, a % dl);
        let (r, rp) = (b / dr, b % dr);
        p.get(l * dr + r, lp * dr + rp)
    });
    Ok(reshuffled
        .singular_values()?
        .into_iter()
        .filter(|&s| s > tol::SCHMIDT)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{haar_unitary, paulis};

    fn two_qubits() -> SubsystemLayout {
        SubsystemLayout::new([("a", 2), ("b", 2)]).unwrap()
    }

    #[test]
    fn product_has_rank_one() {
        let [_, x, y, _] = paulis();
        let u = haar_unitary(2, 4).unwrap();
        assert_eq!(operator_schmidt_rank(&x.kron(&u), &two_qubits(), &["a"]).unwrap(), 1);
        assert_eq!(operator_schmidt_rank(&y.kron(&x), &two_qubits(), &["b"]).unwrap(), 1);
    }

    #[test]
    fn swap_has_rank_four() {
        let swap = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]);
        assert_eq!(operator_schmidt_rank(&swap, &two_qubits(), &["a"]).unwrap(), 4);
    }

    #[test]
    fn cnot_has_rank_two() {
        let cnot = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        assert_eq!(operator_schmidt_rank(&cnot, &two_qubits(), &["a"]).unwrap(), 2);
    }

    #[test]
    fn interleaved_cut() {
        // (X ⊗ Z) on a,c and I on b: across {a, c} | {b} the rank is one
        let [i, x, _, z] = paulis();
        let l = SubsystemLayout::new([("a", 2), ("b", 2), ("c", 2)]).unwrap();
        let op = x.kron(&i).kron(&z);
        assert_eq!(operator_schmidt_rank(&op, &l, &["a", "c"]).unwrap(), 1);
        assert_eq!(operator_schmidt_rank(&op, &l, &["c"]).unwrap(), 1);
    }
}
