use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Products with at least this many multiply-adds go through faer's blocked kernels.
const DENSE_MATMUL_THRESHOLD: usize = 32 * 32 * 32;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LabError::DimensionMismatch(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Builds a matrix from rows of real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// `|ket><bra|` for two column vectors.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        Self::from_fn(ket.len(), bra.len(), |i, j| ket[i] * bra[j].conj())
    }

    /// The matrix unit `|i><j|` in dimension `rows x cols`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data[i * cols + j] = ONE;
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert-Schmidt inner product `Tr(self^dagger other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!(self.shape(), other.shape(), "hs_inner shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Deviation of `self^dagger self` from the identity.
    pub fn isometry_deviation(&self) -> f64 {
        let g = self.adjoint().matmul(self);
        g.max_abs_diff(&Self::identity(self.cols))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {:?} x {:?}",
            self.shape(),
            other.shape()
        );
        if self.rows * self.cols * other.cols >= DENSE_MATMUL_THRESHOLD {
            return Self::from_faer(self.to_faer().as_ref() * other.to_faer().as_ref());
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * x` for a column vector `x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len(), "apply shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = other.shape();
        let mut out = Self::zeros(self.rows * r2, self.cols * c2);
        let out_cols = out.cols;
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                if a == ZERO {
                    continue;
                }
                for i2 in 0..r2 {
                    let base = (i1 * r2 + i2) * out_cols + j1 * c2;
                    let src = other.row(i2);
                    for (o, &b) in out.data[base..base + c2].iter_mut().zip(src) {
                        *o = a * b;
                    }
                }
            }
        }
        out
    }

    /// Commutator `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian(crate::tol::HERMITIAN)?;
        if self.rows == 0 {
            return Ok(Vec::new());
        }
        self.to_faer()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| LabError::Linalg(format!("{e:?}")))
    }

    /// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
    /// matrix whose columns are the matching orthonormal eigenvectors.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        self.require_hermitian(crate::tol::HERMITIAN)?;
        let evd = self
            .to_faer()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| LabError::Linalg(format!("{e:?}")))?;
        let values = evd.S().column_vector().iter().map(|z| z.re).collect();
        Ok((values, Self::from_faer_ref(evd.U())))
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if self.rows == 0 || self.cols == 0 {
            return Ok(Vec::new());
        }
        self.to_faer()
            .singular_values()
            .map_err(|e| LabError::Linalg(format!("{e:?}")))
    }

    /// Thin SVD `self = U diag(s) V^dagger`.
    pub fn thin_svd(&self) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
        let svd = self
            .to_faer()
            .thin_svd()
            .map_err(|e| LabError::Linalg(format!("{e:?}")))?;
        let s = svd.S().column_vector().iter().map(|z| z.re).collect();
        Ok((
            Self::from_faer_ref(svd.U()),
            s,
            Self::from_faer_ref(svd.V()),
        ))
    }

    /// Full SVD; `V` is square so its trailing columns span the null space.
    pub fn full_svd(&self) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
        let svd = self
            .to_faer()
            .svd()
            .map_err(|e| LabError::Linalg(format!("{e:?}")))?;
        let s = svd.S().column_vector().iter().map(|z| z.re).collect();
        Ok((
            Self::from_faer_ref(svd.U()),
            s,
            Self::from_faer_ref(svd.V()),
        ))
    }

    /// Householder QR; returns `(Q, diag(R))` with `Q` square.
    pub(crate) fn qr_with_diagonal(&self) -> (ComplexMatrix, Vec<C64>) {
        let qr = self.to_faer().qr();
        let q = Self::from_faer(qr.compute_Q());
        let r = qr.R();
        let diag = (0..self.rows.min(self.cols)).map(|i| r[(i, i)]).collect();
        (q, diag)
    }

    pub(crate) fn require_hermitian(&self, tol: f64) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > tol {
            return Err(LabError::NotHermitian(dev));
        }
        Ok(())
    }

    pub(crate) fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub(crate) fn from_faer(m: Mat<C64>) -> Self {
        Self::from_faer_ref(m.as_ref())
    }

    pub(crate) fn from_faer_ref(m: MatRef<'_, C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(16) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(16) {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            if self.cols > 16 {
                write!(f, "...")?;
            }
            writeln!(f)?;
        }
        if self.rows > 16 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

// Wire format: nested arrays of [re, im] pairs, one inner array per row.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<[f64; 2]> = self.row(i).iter().map(|z| [z.re, z.im]).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RowsVisitor;

        impl<'de> Visitor<'de> for RowsVisitor {
            type Value = ComplexMatrix;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of rows of [re, im] pairs")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<ComplexMatrix, A::Error> {
                let mut rows: Vec<Vec<[f64; 2]>> = Vec::new();
                while let Some(row) = seq.next_element()? {
                    rows.push(row);
                }
                let cols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != cols) {
                    return Err(de::Error::custom("ragged matrix rows"));
                }
                let data = rows
                    .iter()
                    .flatten()
                    .map(|&[re, im]| C64::new(re, im))
                    .collect();
                Ok(ComplexMatrix {
                    rows: rows.len(),
                    cols,
                    data,
                })
            }
        }

        deserializer.deserialize_seq(RowsVisitor)
    }
}

/// The single-qubit Pauli matrices `[I, X, Y, Z]`.
pub fn paulis() -> [ComplexMatrix; 4] {
    let o = ZERO;
    let l = ONE;
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_vec(2, 2, vec![o, l, l, o]).unwrap(),
        ComplexMatrix::from_vec(2, 2, vec![o, -I, I, o]).unwrap(),
        ComplexMatrix::from_vec(2, 2, vec![l, o, o, -l]).unwrap(),
    ]
}
