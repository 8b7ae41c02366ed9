use serde::{Deserialize, Serialize};

use super::layout::{axis_offsets, SubsystemLayout};
use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{LabError, Result};
use crate::tol;

/// Normalized pure state on a labeled tensor product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    layout: SubsystemLayout,
}

/// Density operator on a labeled tensor product.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    layout: SubsystemLayout,
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            matrix: ComplexMatrix,
            layout: SubsystemLayout,
        }
        let raw = Raw::deserialize(d)?;
        DensityOperator::new(raw.matrix, raw.layout).map_err(serde::de::Error::custom)
    }
}

/// Anything that can report the von Neumann entropy of a labeled region.
pub trait RegionEntropy {
    fn layout(&self) -> &SubsystemLayout;

    /// Entropy in bits of the reduction onto `labels`.
    fn region_entropy<S: AsRef<str>>(&self, labels: &[S]) -> Result<f64>;
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>, layout: SubsystemLayout) -> Result<Self> {
        let s = Self::from_parts(amplitudes, layout)?;
        let norm = s.norm();
        if (norm - 1.0).abs() > tol::STATE {
            return Err(LabError::InvalidState(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(s)
    }

    /// Rescales to unit norm.
    pub fn normalized(amplitudes: Vec<C64>, layout: SubsystemLayout) -> Result<Self> {
        let mut s = Self::from_parts(amplitudes, layout)?;
        let norm = s.norm();
        if norm == 0.0 {
            return Err(LabError::InvalidState("zero vector".into()));
        }
        s.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub(crate) fn from_parts(amplitudes: Vec<C64>, layout: SubsystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "{} amplitudes for a layout of dimension {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        Ok(StateVector { amplitudes, layout })
    }

    /// Computational basis state; `digits` gives one index per factor.
    pub fn basis(layout: SubsystemLayout, digits: &[usize]) -> Result<Self> {
        let dims = layout.dims();
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(d, n)| d >= n) {
            return Err(LabError::InvalidArgument(format!(
                "basis digits {digits:?} do not fit dims {dims:?}"
            )));
        }
        let flat = digits.iter().zip(&dims).fold(0, |acc, (d, n)| acc * n + d);
        let mut amps = vec![ZERO; layout.total_dim()];
        amps[flat] = C64::new(1.0, 0.0);
        Ok(StateVector {
            amplitudes: amps,
            layout,
        })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&other.layout)?;
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for &a in &self.amplitudes {
            amps.extend(other.amplitudes.iter().map(|&b| a * b));
        }
        Ok(StateVector {
            amplitudes: amps,
            layout,
        })
    }

    pub fn relabel(mut self, from: &str, to: &str) -> Result<StateVector> {
        self.layout = self.layout.relabel(from, to)?;
        Ok(self)
    }

    /// Reorders the factors to the given label order.
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<StateVector> {
        let axes = full_order(&self.layout, order)?;
        let map = axis_offsets(&self.layout.dims(), &axes);
        Ok(StateVector {
            amplitudes: map.iter().map(|&i| self.amplitudes[i]).collect(),
            layout: self.layout.select(&axes),
        })
    }

    /// Matrix with rows indexed by `rows_axes` and columns by the remaining axes.
    fn reshape(&self, rows_axes: &[usize]) -> ComplexMatrix {
        let dims = self.layout.dims();
        let rest = self.layout.complement(rows_axes);
        let ro = axis_offsets(&dims, rows_axes);
        let co = axis_offsets(&dims, &rest);
        ComplexMatrix::from_fn(ro.len(), co.len(), |i, j| self.amplitudes[ro[i] + co[j]])
    }

    /// Reduced density operator on `keep`, factors in original order.
    pub fn reduce<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let axes = self.layout.indices(keep)?;
        let m = self.reshape(&axes);
        Ok(DensityOperator {
            matrix: m.matmul(&m.adjoint()),
            layout: self.layout.select(&axes),
        })
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
            layout: self.layout.clone(),
        }
    }
}

impl RegionEntropy for StateVector {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    fn region_entropy<S: AsRef<str>>(&self, labels: &[S]) -> Result<f64> {
        let axes = self.layout.indices(labels)?;
        let rest = self.layout.complement(&axes);
        // The two reductions of a pure state share their nonzero spectrum.
        let dim = |ax: &[usize]| ax.iter().map(|&i| self.layout.dims()[i]).product::<usize>();
        let side = if dim(&axes) <= dim(&rest) { axes } else { rest };
        let m = self.reshape(&side);
        entropy_of(&m.matmul(&m.adjoint()))
    }
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        let rho = Self::from_parts(matrix, layout)?;
        rho.matrix.require_hermitian(tol::HERMITIAN)?;
        let tr = rho.matrix.trace();
        if (tr.re - 1.0).abs() > tol::STATE || tr.im.abs() > tol::STATE {
            return Err(LabError::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = rho
            .matrix
            .hermitian_eigenvalues()?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -tol::STATE {
            return Err(LabError::InvalidState(format!(
                "minimum eigenvalue {min:e} is negative"
            )));
        }
        Ok(rho)
    }

    /// Shape check only; callers guarantee the state conditions.
    pub(crate) fn from_parts(matrix: ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.shape() != (d, d) {
            return Err(LabError::DimensionMismatch(format!(
                "{:?} matrix for a layout of dimension {d}",
                matrix.shape()
            )));
        }
        Ok(DensityOperator { matrix, layout })
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        DensityOperator {
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            layout,
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator {
            matrix: self.matrix.kron(&other.matrix),
            layout: self.layout.concat(&other.layout)?,
        })
    }

    pub fn relabel(mut self, from: &str, to: &str) -> Result<DensityOperator> {
        self.layout = self.layout.relabel(from, to)?;
        Ok(self)
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<DensityOperator> {
        let (matrix, layout) = permute_operator(&self.matrix, &self.layout, order)?;
        Ok(DensityOperator { matrix, layout })
    }

    /// Reduction onto `keep`, factors in original order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let axes = self.layout.indices(keep)?;
        Ok(DensityOperator {
            matrix: trace_out(&self.matrix, &self.layout.dims(), &axes),
            layout: self.layout.select(&axes),
        })
    }

    pub fn entropy(&self) -> Result<f64> {
        entropy_of(&self.matrix)
    }
}

impl RegionEntropy for DensityOperator {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    fn region_entropy<S: AsRef<str>>(&self, labels: &[S]) -> Result<f64> {
        self.partial_trace(labels)?.entropy()
    }
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    rho.entropy()
}

/// Entropy in bits of a Hermitian matrix's spectrum, dropping tiny eigenvalues.
pub fn entropy_of(m: &ComplexMatrix) -> Result<f64> {
    Ok(entropy_of_spectrum(&m.hermitian_eigenvalues()?))
}

pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&p| p > tol::EIGEN_CLIP)
        .map(|&p| -p * p.log2())
        .sum();
    // -0.0 from an all-ones spectrum reads badly in reports
    s.max(0.0)
}

/// Partial trace of a square matrix over every axis not in `keep_axes`.
pub(crate) fn trace_out(m: &ComplexMatrix, dims: &[usize], keep_axes: &[usize]) -> ComplexMatrix {
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !keep_axes.contains(i)).collect();
    let ko = axis_offsets(dims, keep_axes);
    let to = axis_offsets(dims, &rest);
    ComplexMatrix::from_fn(ko.len(), ko.len(), |a, b| {
        to.iter().map(|&t| m.get(ko[a] + t, ko[b] + t)).sum()
    })
}

/// Reorders the tensor factors of a square operator on `layout`.
pub fn permute_operator<S: AsRef<str>>(
    m: &ComplexMatrix,
    layout: &SubsystemLayout,
    order: &[S],
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    let d = layout.total_dim();
    if m.shape() != (d, d) {
        return Err(LabError::DimensionMismatch(format!(
            "{:?} operator on a layout of dimension {d}",
            m.shape()
        )));
    }
    let axes = full_order(layout, order)?;
    let map = axis_offsets(&layout.dims(), &axes);
    Ok((
        ComplexMatrix::from_fn(d, d, |i, j| m.get(map[i], map[j])),
        layout.select(&axes),
    ))
}

fn full_order<S: AsRef<str>>(layout: &SubsystemLayout, order: &[S]) -> Result<Vec<usize>> {
    if order.len() != layout.len() {
        return Err(LabError::InvalidArgument(format!(
            "permutation lists {} of {} factors",
            order.len(),
            layout.len()
        )));
    }
    layout.indices(order)?;
    order.iter().map(|l| layout.index_of(l.as_ref())).collect()
}

/// `|omega_D> = sum_i |ii> / sqrt(D)` on factors `L` and `R`.
pub fn max_entangled(d: usize) -> Result<StateVector> {
    max_entangled_on(d, "L", "R")
}

pub fn max_entangled_on(d: usize, left: &str, right: &str) -> Result<StateVector> {
    if d == 0 {
        return Err(LabError::InvalidArgument("bond dimension must be positive".into()));
    }
    let layout = SubsystemLayout::new([(left, d), (right, d)])?;
    let mut amps = vec![ZERO; d * d];
    let a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        amps[i * d + i] = a;
    }
    StateVector::from_parts(amps, layout)
}
