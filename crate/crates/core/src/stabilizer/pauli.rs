use std::fmt;
use std::str::FromStr;

use bitvec::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};
use crate::tensor::{ComplexMatrix, C64};

pub type Bits = BitVec<u64, Lsb0>;

/// `i^phase · X^x · Z^z` on `n` qubits, all `X` factors to the left.
///
/// A `Y` on one qubit is `i·XZ`, so a Hermitian operator has
/// `phase ≡ |x ∧ z| (mod 2)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x: Bits,
    z: Bits,
    phase: u8,
}

pub(crate) fn and_count(a: &BitSlice<u64, Lsb0>, b: &BitSlice<u64, Lsb0>) -> usize {
    a.iter_ones().filter(|&i| b[i]).count()
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            x: bitvec![u64, Lsb0; 0; n],
            z: bitvec![u64, Lsb0; 0; n],
            phase: 0,
        }
    }

    /// Hermitian Pauli from its symplectic parts, sign `+`.
    pub fn from_bits(x: Bits, z: Bits) -> Self {
        assert_eq!(x.len(), z.len(), "x and z parts differ in length");
        let phase = (and_count(&x, &z) % 4) as u8;
        PauliOperator { x, z, phase }
    }

    pub fn from_parts(x: Bits, z: Bits, phase: u8) -> Self {
        assert_eq!(x.len(), z.len(), "x and z parts differ in length");
        PauliOperator {
            x,
            z,
            phase: phase % 4,
        }
    }

    /// Single-qubit `X`, `Y` or `Z` on qubit `q`.
    pub fn single(n: usize, q: usize, kind: char) -> Self {
        let mut p = Self::identity(n);
        match kind {
            'X' => p.x.set(q, true),
            'Z' => p.z.set(q, true),
            'Y' => {
                p.x.set(q, true);
                p.z.set(q, true);
                p.phase = 1;
            }
            'I' => {}
            other => panic!("not a Pauli letter: {other}"),
        }
        p
    }

    /// Symplectic vector `(x | z)` of length `2n`.
    pub fn from_symplectic(v: &BitSlice<u64, Lsb0>) -> Self {
        let n = v.len() / 2;
        Self::from_bits(v[..n].to_bitvec(), v[n..].to_bitvec())
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &Bits {
        &self.x
    }

    pub fn z_bits(&self) -> &Bits {
        &self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn symplectic(&self) -> Bits {
        let mut v = self.x.clone();
        v.extend_from_bitslice(&self.z);
        v
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize + and_count(&self.x, &self.z)) % 2 == 0
    }

    /// `+1` or `-1` for a Hermitian operator written with `Y` letters.
    pub fn sign(&self) -> i8 {
        let rel = (self.phase as usize + 4 - and_count(&self.x, &self.z) % 4) % 4;
        match rel {
            0 => 1,
            2 => -1,
            _ => 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.not_any() && self.z.not_any()
    }

    pub fn weight(&self) -> usize {
        (0..self.num_qubits())
            .filter(|&q| self.x[q] || self.z[q])
            .count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits())
            .filter(|&q| self.x[q] || self.z[q])
            .collect()
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.x[q], self.z[q]) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    pub fn commutes(&self, other: &PauliOperator) -> bool {
        self.symplectic_product(other) == 0
    }

    /// `x·z' + z·x' mod 2`.
    pub fn symplectic_product(&self, other: &PauliOperator) -> u8 {
        ((and_count(&self.x, &other.z) + and_count(&self.z, &other.x)) % 2) as u8
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliOperator) -> PauliOperator {
        assert_eq!(self.num_qubits(), other.num_qubits());
        // Z^z X^x' = (-1)^{z·x'} X^x' Z^z
        let swap = 2 * and_count(&self.z, &other.x);
        let mut x = self.x.clone();
        x ^= other.x.as_bitslice();
        let mut z = self.z.clone();
        z ^= other.z.as_bitslice();
        PauliOperator {
            x,
            z,
            phase: ((self.phase as usize + other.phase as usize + swap) % 4) as u8,
        }
    }

    pub fn times_i(&self, k: u8) -> PauliOperator {
        let mut p = self.clone();
        p.phase = (p.phase + k) % 4;
        p
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOperator) -> PauliOperator {
        let mut x = self.x.clone();
        x.extend_from_bitslice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_bitslice(&other.z);
        PauliOperator {
            x,
            z,
            phase: (self.phase + other.phase) % 4,
        }
    }

    /// The factor on `qubits`, in that order; the phase is dropped.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOperator {
        let x = qubits.iter().map(|&q| self.x[q]).collect();
        let z = qubits.iter().map(|&q| self.z[q]).collect();
        PauliOperator::from_bits(x, z)
    }

    /// The factor on `qubits`, in that order, keeping the phase. Exact when
    /// the other qubits carry the identity or `qubits` is a permutation.
    pub fn select(&self, qubits: &[usize]) -> PauliOperator {
        let x = qubits.iter().map(|&q| self.x[q]).collect();
        let z = qubits.iter().map(|&q| self.z[q]).collect();
        PauliOperator::from_parts(x, z, self.phase)
    }

    /// Splits `i^p X^x Z^z` into the Hermitian factor on `qubits` (sign `+`)
    /// and the remainder on the complement, which carries the phase.
    pub fn split(&self, qubits: &[usize]) -> (PauliOperator, PauliOperator) {
        let rest: Vec<usize> = (0..self.num_qubits())
            .filter(|q| !qubits.contains(q))
            .collect();
        let part = self.restrict(qubits);
        let mut other = self.restrict(&rest);
        let xz = and_count(&part.x, &part.z) as u8;
        other.phase = (self.phase + 4 - xz % 4) % 4;
        (part, other)
    }

    /// Places this operator on `positions` of an `n`-qubit register.
    pub fn embed(&self, n: usize, positions: &[usize]) -> PauliOperator {
        assert_eq!(positions.len(), self.num_qubits());
        let mut p = PauliOperator::identity(n);
        for (k, &q) in positions.iter().enumerate() {
            p.x.set(q, self.x[k]);
            p.z.set(q, self.z[k]);
        }
        p.phase = self.phase;
        p
    }

    /// `P^T`: a sign flip for every `Y`.
    pub fn transpose(&self) -> PauliOperator {
        self.times_i((2 * (and_count(&self.x, &self.z) % 2)) as u8)
    }

    /// Dense matrix with qubit 0 as the most significant tensor factor.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.num_qubits();
        let dim = 1usize << n;
        let (xm, zm) = (self.x_mask(), self.z_mask());
        let ph = phase_value(self.phase);
        let mut m = ComplexMatrix::zeros(dim, dim);
        for col in 0..dim {
            let sign = if (zm & col).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m.set(col ^ xm, col, ph * sign);
        }
        m
    }

    /// `self |v>` for a dense vector in the same qubit ordering.
    pub fn apply_to(&self, v: &[C64]) -> Vec<C64> {
        let (xm, zm) = (self.x_mask(), self.z_mask());
        let ph = phase_value(self.phase);
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (j, a) in v.iter().enumerate() {
            let sign = if (zm & j).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[j ^ xm] = *a * ph * sign;
        }
        out
    }

    fn x_mask(&self) -> usize {
        mask(&self.x)
    }

    fn z_mask(&self) -> usize {
        mask(&self.z)
    }
}

fn mask(bits: &Bits) -> usize {
    let n = bits.len();
    assert!(n < usize::BITS as usize, "too many qubits for a dense index");
    bits.iter_ones().fold(0, |m, q| m | 1 << (n - 1 - q))
}

pub(crate) fn phase_value(p: u8) -> C64 {
    match p % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliOperator {
    /// `+XYZ`, `-IZ`, or `+iXZ` for non-Hermitian operators.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = (self.phase as usize + 4 - and_count(&self.x, &self.z) % 4) % 4;
        let prefix = ["+", "+i", "-", "-i"][rel];
        f.write_str(prefix)?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        parse_row(s, 1)
    }
}

/// Parses one tableau row; errors carry `line` and a 1-based column.
pub(crate) fn parse_row(s: &str, line: usize) -> Result<PauliOperator> {
    let err = |column: usize, message: String| LabError::Parse {
        line,
        column,
        message,
    };
    let chars: Vec<(usize, char)> = s.char_indices().map(|(i, c)| (i + 1, c)).collect();
    let mut pos = 0;
    let mut rel: u8 = 0;
    if let Some(&(_, c)) = chars.first() {
        if c == '+' || c == '-' {
            rel = if c == '-' { 2 } else { 0 };
            pos = 1;
        }
    }
    if let Some(&(_, 'i')) = chars.get(pos) {
        rel = (rel + 1) % 4;
        pos += 1;
    }
    let mut x = Bits::new();
    let mut z = Bits::new();
    for &(col, c) in &chars[pos..] {
        let (xb, zb) = match c {
            'I' | '_' => (false, false),
            'X' => (true, false),
            'Y' => (true, true),
            'Z' => (false, true),
            c if c.is_whitespace() => continue,
            other => return Err(err(col, format!("unexpected character `{other}`"))),
        };
        x.push(xb);
        z.push(zb);
    }
    if x.is_empty() {
        return Err(err(chars.len().max(1), "empty Pauli string".into()));
    }
    let xz = and_count(&x, &z) as u8;
    Ok(PauliOperator::from_parts(x, z, rel + xz))
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::paulis;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn letters_match_dense_paulis() {
        let [i, x, y, z] = paulis();
        assert!(p("I").to_matrix().max_abs_diff(&i) < 1e-15);
        assert!(p("X").to_matrix().max_abs_diff(&x) < 1e-15);
        assert!(p("Y").to_matrix().max_abs_diff(&y) < 1e-15);
        assert!(p("Z").to_matrix().max_abs_diff(&z) < 1e-15);
        assert!(p("-XZ").to_matrix().max_abs_diff(&x.kron(&z).scale_real(-1.0)) < 1e-15);
    }

    #[test]
    fn product_matches_dense_product() {
        let ops = ["+XY", "-ZZ", "+iYI", "-iXZ", "+YY"];
        for a in ops {
            for b in ops {
                let (pa, pb) = (p(a), p(b));
                let dense = pa.to_matrix().matmul(&pb.to_matrix());
                assert!(pa.mul(&pb).to_matrix().max_abs_diff(&dense) < 1e-14, "{a}·{b}");
                let comm = pa.to_matrix().commutator(&pb.to_matrix()).max_abs() < 1e-14;
                assert_eq!(pa.commutes(&pb), comm, "{a} {b}");
            }
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["+XYZI", "-YY", "+iZ", "-iXX"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("XZ").to_string(), "+XZ");
        assert!(p("-Y").is_hermitian());
        assert!(!p("iY").is_hermitian());
        assert_eq!(p("-Y").sign(), -1);
    }

    #[test]
    fn parse_reports_column() {
        match "+XQZ".parse::<PauliOperator>() {
            Err(LabError::Parse { column, .. }) => assert_eq!(column, 3),
            other => panic!("{other:?}"),
        }
        assert!("+".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn split_and_embed() {
        let q = p("-YXZ");
        let (part, rest) = q.split(&[0, 2]);
        assert_eq!(part.to_string(), "+YZ");
        let back = part.embed(3, &[0, 2]).mul(&rest.embed(3, &[1]));
        assert_eq!(back, q);
    }

    #[test]
    fn transpose_matches_dense() {
        for s in ["+XYZ", "-YY", "+iZY"] {
            let t = p(s).transpose().to_matrix();
            assert!(t.max_abs_diff(&p(s).to_matrix().transpose()) < 1e-15);
        }
    }

    #[test]
    fn apply_matches_matrix() {
        let q = p("-iYXZ");
        let v: Vec<C64> = (0..8).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let dense = q.to_matrix().apply(&v);
        let fast = q.apply_to(&v);
        for (a, b) in dense.iter().zip(&fast) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
