//! Built-in site isometries.

use crate::chain::ChainModel;
use crate::channel::Isometry;
use crate::error::{LabError, Result};
use crate::tensor::{haar_unitary, paulis, ComplexMatrix, SubsystemLayout, C64};
use crate::tol::Caps;

fn qubit_pair() -> Result<SubsystemLayout> {
    SubsystemLayout::new([("L", 2), ("R", 2)])
}

/// `V_U = sum_i (1/2) (P_i ⊗ P_i U) ⊗ |i>_E`, output `Bl Br E`.
///
/// Tracing `E` gives the twirl `σ -> (1/4) sum_i (P_i ⊗ P_i U) σ (P_i ⊗ U^dagger P_i)`.
pub fn paulitwirl(u: &ComplexMatrix) -> Result<ChainModel> {
    if u.shape() != (2, 2) || u.isometry_deviation() > 1e-10 {
        return Err(LabError::InvalidArgument(
            "the twirl model needs a 2x2 unitary".into(),
        ));
    }
    let p = paulis();
    let kraus: Vec<ComplexMatrix> = p
        .iter()
        .map(|pi| pi.kron(&pi.matmul(u)).scale_real(0.5))
        .collect();
    let v = ComplexMatrix::from_fn(16, 4, |row, col| kraus[row % 4].get(row / 4, col));
    let out = SubsystemLayout::new([("Bl", 2), ("Br", 2), ("E", 4)])?;
    let v = Isometry::new(v, qubit_pair()?, out)?;
    ChainModel::new(v, &["Bl", "Br"], &["E"], Caps::default())
}

/// `E' ⊗ id` with `E'(ρ) = ρ/2 + XρX/4 + ZρZ/4` on the left leg, dilated
/// into a three-dimensional environment.
pub fn product_trivial() -> Result<ChainModel> {
    let [i, x, _, z] = paulis();
    let kraus = [
        i.scale_real(std::f64::consts::FRAC_1_SQRT_2),
        x.scale_real(0.5),
        z.scale_real(0.5),
    ];
    let id = ComplexMatrix::identity(2);
    let wide: Vec<ComplexMatrix> = kraus.iter().map(|k| k.kron(&id)).collect();
    let v = ComplexMatrix::from_fn(12, 4, |row, col| wide[row % 3].get(row / 3, col));
    let out = SubsystemLayout::new([("Bl", 2), ("Br", 2), ("E", 3)])?;
    let v = Isometry::new(v, qubit_pair()?, out)?;
    ChainModel::new(v, &["Bl", "Br"], &["E"], Caps::default())
}

/// `|l r> -> |l r>_B ⊗ |0>_E` with bond dimension `d`.
pub fn identity_to_b(d: usize) -> Result<ChainModel> {
    if d == 0 {
        return Err(LabError::InvalidArgument("bond dimension 0".into()));
    }
    let dd = d * d;
    let v = ComplexMatrix::from_fn(2 * dd, dd, |row, col| {
        if row == 2 * col {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let v = Isometry::new(
        v,
        SubsystemLayout::new([("L", d), ("R", d)])?,
        SubsystemLayout::new([("B", dd), ("E", 2)])?,
    )?;
    ChainModel::new(v, &["B"], &["E"], Caps::default())
}

/// The first `d^2` columns of a Haar unitary on `B ⊗ E`.
pub fn random_isometry(d: usize, b_dim: usize, e_dim: usize, seed: u64) -> Result<ChainModel> {
    let dout = b_dim * e_dim;
    if dout < d * d {
        return Err(LabError::InvalidArgument(format!(
            "an isometry from {} into {dout} dimensions does not exist",
            d * d
        )));
    }
    let u = haar_unitary(dout, seed)?;
    let v = ComplexMatrix::from_fn(dout, d * d, |r, c| u.get(r, c));
    let v = Isometry::new(
        v,
        SubsystemLayout::new([("L", d), ("R", d)])?,
        SubsystemLayout::new([("B", b_dim), ("E", e_dim)])?,
    )?;
    ChainModel::new(v, &["B"], &["E"], Caps::default())
}
