use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::clifford::Clifford;
use super::gf2::{left_null_space, rank, solve};
use super::pauli::{parse_row, Bits, PauliOperator};
use crate::chain::ChainModel;
use crate::channel::Isometry;
use crate::error::{LabError, Result};
use crate::tensor::{ComplexMatrix, SubsystemLayout, C64};
use crate::tol::Caps;

/// A Clifford encoder `V: L ⊗ R -> B ⊗ E` on qubits, `L` and `R` having `K`
/// qubits each.
///
/// Input qubits `0..K` form `L` and `K..2K` form `R`. `V` is stored through
/// the images `V X_i = X̄_i V`, `V Z_i = Z̄_i V` and the stabilizers of its
/// range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerIsometry {
    k: usize,
    labels: Vec<String>,
    b_qubits: Vec<usize>,
    e_qubits: Vec<usize>,
    logical_x: Vec<PauliOperator>,
    logical_z: Vec<PauliOperator>,
    stabilizers: Vec<PauliOperator>,
}

fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidArgument(msg.into())
}

impl StabilizerIsometry {
    /// Checks the defining relations and the `B`/`E` partition.
    pub fn new(
        k: usize,
        labels: Vec<String>,
        b_qubits: Vec<usize>,
        logical_x: Vec<PauliOperator>,
        logical_z: Vec<PauliOperator>,
        stabilizers: Vec<PauliOperator>,
    ) -> Result<Self> {
        let n = labels.len();
        if k == 0 {
            return Err(invalid("K must be at least 1"));
        }
        if n < 2 * k {
            return Err(invalid(format!("{n} output qubits cannot hold {} input qubits", 2 * k)));
        }
        if b_qubits.iter().any(|&q| q >= n) {
            return Err(invalid("B qubit index out of range"));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(LabError::DuplicateLabel(l.clone()));
            }
        }
        let e_qubits: Vec<usize> = (0..n).filter(|q| !b_qubits.contains(q)).collect();
        let v = StabilizerIsometry {
            k,
            labels,
            b_qubits,
            e_qubits,
            logical_x,
            logical_z,
            stabilizers,
        };
        v.validate()?;
        Ok(v)
    }

    fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        let m = 2 * self.k;
        if self.logical_x.len() != m || self.logical_z.len() != m {
            return Err(invalid(format!("need {m} logical X and Z images")));
        }
        if self.stabilizers.len() != n - m {
            return Err(invalid(format!(
                "need {} stabilizers for {n} outputs and {m} inputs, got {}",
                n - m,
                self.stabilizers.len()
            )));
        }
        let all: Vec<&PauliOperator> = self
            .stabilizers
            .iter()
            .chain(&self.logical_x)
            .chain(&self.logical_z)
            .collect();
        if all.iter().any(|p| p.num_qubits() != n) {
            return Err(invalid("Pauli length differs from the output qubit count"));
        }
        if all.iter().any(|p| !p.is_hermitian()) {
            return Err(invalid("tableau rows must be Hermitian"));
        }
        for (i, s) in self.stabilizers.iter().enumerate() {
            if self.stabilizers[..i].iter().any(|t| !s.commutes(t)) {
                return Err(invalid(format!("stabilizer {} does not commute with the others", i + 1)));
            }
            if self.logical_x.iter().chain(&self.logical_z).any(|l| !s.commutes(l)) {
                return Err(invalid(format!("stabilizer {} does not commute with a logical", i + 1)));
            }
        }
        for i in 0..m {
            for j in 0..m {
                let xx = self.logical_x[i].commutes(&self.logical_x[j]);
                let zz = self.logical_z[i].commutes(&self.logical_z[j]);
                let xz = self.logical_x[i].commutes(&self.logical_z[j]);
                if !xx || !zz || xz == (i == j) {
                    return Err(invalid("logical images do not reproduce the input symplectic form"));
                }
            }
        }
        let vecs: Vec<Bits> = all.iter().map(|p| p.symplectic()).collect();
        if rank(&vecs) != n + m {
            return Err(invalid("stabilizers and logicals are not independent"));
        }
        Ok(())
    }

    /// `U` acting on `|ψ_in> ⊗ |0...0>`: inputs on `inputs` (L then R),
    /// every other qubit an ancilla.
    pub fn from_clifford(
        k: usize,
        u: &Clifford,
        inputs: &[usize],
        labels: Vec<String>,
        b_qubits: Vec<usize>,
    ) -> Result<Self> {
        let n = u.num_qubits();
        if inputs.len() != 2 * k || labels.len() != n {
            return Err(invalid("input positions or labels do not match the Clifford"));
        }
        let logical_x = inputs.iter().map(|&q| u.x_image(q).clone()).collect();
        let logical_z = inputs.iter().map(|&q| u.z_image(q).clone()).collect();
        let stabilizers = (0..n)
            .filter(|q| !inputs.contains(q))
            .map(|q| u.z_image(q).clone())
            .collect();
        Self::new(k, labels, b_qubits, logical_x, logical_z, stabilizers)
    }

    /// A uniformly random Clifford encoder with `n_b + n_e` output qubits.
    pub fn random(k: usize, n_b: usize, n_e: usize, rng: &mut impl Rng) -> Result<Self> {
        let n = n_b + n_e;
        let u = Clifford::random(n, rng);
        let inputs: Vec<usize> = (0..2 * k).collect();
        let labels = (0..n_b)
            .map(|i| format!("B{i}"))
            .chain((0..n_e).map(|i| format!("E{i}")))
            .collect();
        Self::from_clifford(k, &u, &inputs, labels, (0..n_b).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bond_dim(&self) -> usize {
        1 << self.k
    }

    pub fn num_outputs(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn b_qubits(&self) -> &[usize] {
        &self.b_qubits
    }

    pub fn e_qubits(&self) -> &[usize] {
        &self.e_qubits
    }

    pub fn b_labels(&self) -> Vec<String> {
        self.b_qubits.iter().map(|&q| self.labels[q].clone()).collect()
    }

    pub fn e_labels(&self) -> Vec<String> {
        self.e_qubits.iter().map(|&q| self.labels[q].clone()).collect()
    }

    pub fn logical_x(&self) -> &[PauliOperator] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliOperator] {
        &self.logical_z
    }

    pub fn stabilizers(&self) -> &[PauliOperator] {
        &self.stabilizers
    }

    /// `P̄` with `V P = P̄ V` for a Pauli `P` on the `2K` input qubits.
    pub fn image(&self, p: &PauliOperator) -> PauliOperator {
        assert_eq!(p.num_qubits(), 2 * self.k);
        let mut out = PauliOperator::identity(self.num_outputs()).times_i(p.phase());
        for q in p.x_bits().iter_ones() {
            out = out.mul(&self.logical_x[q]);
        }
        for q in p.z_bits().iter_ones() {
            out = out.mul(&self.logical_z[q]);
        }
        out
    }

    /// Generators of the stabilizer group of `(V ⊗ I)|Φ+>^{⊗2K}`, outputs
    /// first and the input reference qubits last.
    pub fn choi_rows(&self) -> Vec<PauliOperator> {
        let m = 2 * self.k;
        let mut rows = Vec::with_capacity(self.num_outputs() + m);
        for i in 0..m {
            rows.push(self.logical_x[i].tensor(&PauliOperator::single(m, i, 'X')));
            rows.push(self.logical_z[i].tensor(&PauliOperator::single(m, i, 'Z')));
        }
        for s in &self.stabilizers {
            rows.push(s.tensor(&PauliOperator::identity(m)));
        }
        rows
    }

    /// Inverse of [`choi_rows`](Self::choi_rows).
    fn from_choi_rows(
        k: usize,
        labels: Vec<String>,
        b_qubits: Vec<usize>,
        rows: &[PauliOperator],
    ) -> Result<Self> {
        let n = labels.len();
        let m = 2 * k;
        let refs: Vec<usize> = (n..n + m).collect();
        let outs: Vec<usize> = (0..n).collect();
        let ref_parts: Vec<Bits> = rows.iter().map(|r| r.restrict(&refs).symplectic()).collect();
        let combine = |c: &Bits| -> PauliOperator {
            c.iter_ones()
                .fold(PauliOperator::identity(n + m), |acc, i| acc.mul(&rows[i]))
        };
        let images = |kind: char| -> Result<Vec<PauliOperator>> {
            (0..m)
                .map(|i| {
                    let target = PauliOperator::single(m, i, kind).symplectic();
                    let c = solve(&ref_parts, &target).ok_or_else(|| {
                        invalid(format!(
                            "the rows do not describe an isometry: no row combination acts as {kind} on input qubit {}",
                            i + 1
                        ))
                    })?;
                    Ok(combine(&c).select(&outs))
                })
                .collect()
        };
        let logical_x = images('X')?;
        let logical_z = images('Z')?;
        let stabilizers = left_null_space(&ref_parts)
            .iter()
            .map(|c| combine(c).select(&outs))
            .collect();
        Self::new(k, labels, b_qubits, logical_x, logical_z, stabilizers)
    }

    /// Text form: a `K` line, `B` and `E` label lines, then one Choi
    /// stabilizer per line over the outputs (B then E) followed by the `2K`
    /// input references (L then R).
    pub fn to_tableau_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "K {}", self.k);
        let _ = writeln!(s, "B {}", self.b_labels().join(" "));
        let _ = writeln!(s, "E {}", self.e_labels().join(" "));
        let n = self.num_outputs();
        let order: Vec<usize> = self
            .b_qubits
            .iter()
            .chain(&self.e_qubits)
            .copied()
            .chain(n..n + 2 * self.k)
            .collect();
        for row in self.choi_rows() {
            let text = row.select(&order).to_string();
            let split = text.len() - (n + 2 * self.k);
            let (sign, body) = text.split_at(split);
            let _ = writeln!(s, "{sign}{} {}", &body[..n], &body[n..]);
        }
        s
    }

    pub fn parse_tableau(text: &str) -> Result<Self> {
        let mut k = None;
        let mut b: Option<Vec<String>> = None;
        let mut e: Option<Vec<String>> = None;
        let mut rows: Vec<(usize, PauliOperator)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let col = content.len() - content.trim_start().len() + 1;
            let mut words = trimmed.split_whitespace();
            let head = words.next().unwrap_or("");
            let perr = |message: String| LabError::Parse {
                line,
                column: col,
                message,
            };
            match head {
                "K" => {
                    let v = words
                        .next()
                        .and_then(|w| w.parse::<usize>().ok())
                        .filter(|&v| v > 0)
                        .ok_or_else(|| perr("`K` needs a positive integer".into()))?;
                    k = Some(v);
                }
                "B" => b = Some(words.map(str::to_string).collect()),
                "E" => e = Some(words.map(str::to_string).collect()),
                _ => {
                    if k.is_none() || b.is_none() || e.is_none() {
                        return Err(perr("`K`, `B` and `E` lines must precede the rows".into()));
                    }
                    let p = parse_row(trimmed, line).map_err(|err| match err {
                        LabError::Parse { line, column, message } => LabError::Parse {
                            line,
                            column: column + col - 1,
                            message,
                        },
                        other => other,
                    })?;
                    rows.push((line, p));
                }
            }
        }
        let k = k.ok_or_else(|| LabError::Parse {
            line: text.lines().count().max(1),
            column: 1,
            message: "missing `K` line".into(),
        })?;
        let (b, e) = (b.unwrap_or_default(), e.unwrap_or_default());
        let n = b.len() + e.len();
        let width = n + 2 * k;
        for (line, p) in &rows {
            if p.num_qubits() != width {
                return Err(LabError::Parse {
                    line: *line,
                    column: 1,
                    message: format!(
                        "row has {} Pauli letters, expected {width} ({n} outputs and {} inputs)",
                        p.num_qubits(),
                        2 * k
                    ),
                });
            }
            if !p.is_hermitian() {
                return Err(LabError::Parse {
                    line: *line,
                    column: 1,
                    message: "row is not Hermitian".into(),
                });
            }
        }
        for (i, (line, p)) in rows.iter().enumerate() {
            if let Some((other, _)) = rows[..i].iter().find(|(_, q)| !p.commutes(q)) {
                return Err(LabError::Parse {
                    line: *line,
                    column: 1,
                    message: format!("row anticommutes with the row on line {other}"),
                });
            }
        }
        let mut independent: Vec<Bits> = Vec::new();
        for (line, p) in &rows {
            independent.push(p.symplectic());
            if rank(&independent) < independent.len() {
                return Err(LabError::Parse {
                    line: *line,
                    column: 1,
                    message: "row is a product of earlier rows".into(),
                });
            }
        }
        if rows.len() != width {
            let last = rows.last().map_or(1, |r| r.0);
            return Err(LabError::Parse {
                line: last,
                column: 1,
                message: format!("expected {width} rows, found {}", rows.len()),
            });
        }
        let labels: Vec<String> = b.iter().chain(&e).cloned().collect();
        let paulis: Vec<PauliOperator> = rows.into_iter().map(|(_, p)| p).collect();
        Self::from_choi_rows(k, labels, (0..b.len()).collect(), &paulis)
    }

    /// `V|0...0>`, the unique state stabilized by the `Z̄_i` and the stabilizers.
    fn reference_state(&self) -> Vec<C64> {
        let n = self.num_outputs();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut v: Vec<C64> = (0..1usize << n)
            .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        for g in self.logical_z.iter().chain(&self.stabilizers) {
            let gv = g.apply_to(&v);
            for (a, b) in v.iter_mut().zip(gv) {
                *a = (*a + b) * 0.5;
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let lead = v
            .iter()
            .copied()
            .find(|a| a.norm() > 1e-6 * norm)
            .unwrap_or(C64::new(1.0, 0.0));
        let fix = lead.conj() / (lead.norm() * norm);
        v.iter().map(|a| a * fix).collect()
    }

    /// Dense matrix with input layout `L R` (dimension `2^K` each) and one
    /// qubit factor per output label.
    pub fn to_isometry(&self) -> Result<Isometry> {
        let n = self.num_outputs();
        let m = 2 * self.k;
        let psi0 = self.reference_state();
        let mut mat = ComplexMatrix::zeros(1 << n, 1 << m);
        for col in 0..1usize << m {
            let mut v = psi0.clone();
            for i in 0..m {
                if col >> (m - 1 - i) & 1 == 1 {
                    v = self.logical_x[i].apply_to(&v);
                }
            }
            for (row, a) in v.into_iter().enumerate() {
                mat.set(row, col, a);
            }
        }
        let d = self.bond_dim();
        Isometry::new(
            mat,
            SubsystemLayout::new([("L", d), ("R", d)])?,
            SubsystemLayout::new(self.labels.iter().map(|l| (l.clone(), 2)))?,
        )
    }

    pub fn to_chain_model(&self, caps: Caps) -> Result<ChainModel> {
        caps.check("dense Clifford encoder", (1u128 << self.num_outputs()) << (2 * self.k))?;
        ChainModel::new(self.to_isometry()?, &self.b_labels(), &self.e_labels(), caps)
    }
}

