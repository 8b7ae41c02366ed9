//! Dense complex linear algebra over labeled tensor-product spaces.

mod layout;
mod matrix;
mod state;

pub use layout::{Factor, SubsystemLayout};
pub(crate) use layout::axis_offsets;
pub use matrix::{paulis, ComplexMatrix, C64};
pub(crate) use matrix::{ONE, ZERO};
pub use state::{
    entropy_of, entropy_of_spectrum, max_entangled, max_entangled_on, permute_operator,
    von_neumann_entropy,
    DensityOperator, RegionEntropy, StateVector,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{LabError, Result};

/// Kronecker product that also concatenates layouts where there are any.
pub trait TensorProduct: Sized {
    fn tensor_product(&self, other: &Self) -> Result<Self>;
}

impl TensorProduct for ComplexMatrix {
    fn tensor_product(&self, other: &Self) -> Result<Self> {
        Ok(self.kron(other))
    }
}

impl TensorProduct for StateVector {
    fn tensor_product(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

impl TensorProduct for DensityOperator {
    fn tensor_product(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> Result<T> {
    a.tensor_product(b)
}

/// Haar-distributed unitary, deterministic in `seed`.
pub fn haar_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(dim, &mut rng)
}

pub fn haar_unitary_with(dim: usize, rng: &mut impl rand::Rng) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(LabError::InvalidArgument("unitary dimension must be positive".into()));
    }
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let (q, r_diag) = g.qr_with_diagonal();
    // Fixing the phases of diag(R) makes the distribution exactly Haar.
    let phases: Vec<C64> = r_diag
        .iter()
        .map(|&r| if r.norm() > 0.0 { r / r.norm() } else { ONE })
        .collect();
    Ok(q.matmul(&ComplexMatrix::from_diagonal(&phases)))
}
