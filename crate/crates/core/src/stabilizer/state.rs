use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::gf2::{left_null_space, rank};
use super::isometry::StabilizerIsometry;
use super::pauli::{Bits, PauliOperator};
use crate::error::{LabError, Result};
use crate::tensor::C64;

/// A pure stabilizer state. Every qubit carries a label and a group name;
/// regions are addressed by either.
#[derive(Clone, Debug)]
pub struct StabilizerState {
    labels: Vec<String>,
    groups: Vec<String>,
    gens: Vec<PauliOperator>,
}

impl StabilizerState {
    /// `ω_D` with `D = 2^k`: `k` Bell pairs between the groups `left` and `right`.
    pub fn bell_pairs(k: usize, left: &str, right: &str) -> Self {
        let n = 2 * k;
        let name = |g: &str, i: usize| if k == 1 { g.to_string() } else { format!("{g}{i}") };
        let mut gens = Vec::with_capacity(n);
        for i in 0..k {
            for kind in ['X', 'Z'] {
                let a = PauliOperator::single(n, i, kind);
                gens.push(a.mul(&PauliOperator::single(n, k + i, kind)));
            }
        }
        StabilizerState {
            labels: (0..k).map(|i| name(left, i)).chain((0..k).map(|i| name(right, i))).collect(),
            groups: std::iter::repeat_n(left.to_string(), k)
                .chain(std::iter::repeat_n(right.to_string(), k))
                .collect(),
            gens,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.gens
    }

    pub fn tensor(&self, other: &StabilizerState) -> StabilizerState {
        let (n, m) = (self.num_qubits(), other.num_qubits());
        let gens = self
            .gens
            .iter()
            .map(|g| g.tensor(&PauliOperator::identity(m)))
            .chain(other.gens.iter().map(|g| PauliOperator::identity(n).tensor(g)))
            .collect();
        StabilizerState {
            labels: self.labels.iter().chain(&other.labels).cloned().collect(),
            groups: self.groups.iter().chain(&other.groups).cloned().collect(),
            gens,
        }
    }

    pub fn relabel_group(mut self, from: &str, to: &str) -> Self {
        for (g, l) in self.groups.iter_mut().zip(self.labels.iter_mut()) {
            if g == from {
                *g = to.to_string();
                if let Some(rest) = l.strip_prefix(from) {
                    *l = format!("{to}{rest}");
                }
            }
        }
        self
    }

    /// Qubits of the named groups or labels, in register order.
    pub fn qubits<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for t in tokens {
            let t = t.as_ref();
            let hits: Vec<usize> = (0..self.num_qubits())
                .filter(|&q| self.groups[q] == t)
                .collect();
            let hits = if hits.is_empty() {
                (0..self.num_qubits()).filter(|&q| self.labels[q] == t).collect()
            } else {
                hits
            };
            if hits.is_empty() {
                return Err(LabError::UnknownLabel(t.to_string()));
            }
            out.extend(hits);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Applies `V` with its input qubits on `inputs` (L then R). The outputs
    /// are appended in `V`'s order under the groups `b_group` and `e_group`.
    pub fn apply(
        &self,
        v: &StabilizerIsometry,
        inputs: &[usize],
        b_group: &str,
        e_group: &str,
    ) -> Result<StabilizerState> {
        if inputs.len() != 2 * v.k() {
            return Err(LabError::DimensionMismatch(format!(
                "the encoder takes {} qubits, {} given",
                2 * v.k(),
                inputs.len()
            )));
        }
        let kept: Vec<usize> = (0..self.num_qubits()).filter(|q| !inputs.contains(q)).collect();
        let mut gens = Vec::with_capacity(kept.len() + v.num_outputs());
        for g in &self.gens {
            let (part, rest) = g.split(inputs);
            gens.push(rest.tensor(&v.image(&part)));
        }
        for s in v.stabilizers() {
            gens.push(PauliOperator::identity(kept.len()).tensor(s));
        }
        let mut labels: Vec<String> = kept.iter().map(|&q| self.labels[q].clone()).collect();
        let mut groups: Vec<String> = kept.iter().map(|&q| self.groups[q].clone()).collect();
        for q in 0..v.num_outputs() {
            labels.push(v.labels()[q].clone());
            let g = if v.b_qubits().contains(&q) { b_group } else { e_group };
            groups.push(g.to_string());
        }
        Ok(StabilizerState { labels, groups, gens })
    }

    /// Entropy in bits of the reduced state on `qubits`: `rank(G|_R) - |R|`.
    pub fn entropy(&self, qubits: &[usize]) -> usize {
        if qubits.is_empty() {
            return 0;
        }
        let rows: Vec<Bits> = self
            .gens
            .iter()
            .map(|g| g.restrict(qubits).symplectic())
            .collect();
        rank(&rows) - qubits.len()
    }

    pub fn entropy_of<S: AsRef<str>>(&self, tokens: &[S]) -> Result<usize> {
        Ok(self.entropy(&self.qubits(tokens)?))
    }

    /// Generators of the stabilizer elements supported inside `qubits`.
    pub fn subgroup_on(&self, qubits: &[usize]) -> Vec<PauliOperator> {
        let outside: Vec<usize> = (0..self.num_qubits()).filter(|q| !qubits.contains(q)).collect();
        let rows: Vec<Bits> = self
            .gens
            .iter()
            .map(|g| g.restrict(&outside).symplectic())
            .collect();
        let n = self.num_qubits();
        left_null_space(&rows)
            .iter()
            .map(|c| {
                c.iter_ones()
                    .fold(PauliOperator::identity(n), |acc, i| acc.mul(&self.gens[i]))
            })
            .collect()
    }

    /// Dense amplitudes, qubit 0 most significant, up to a global phase.
    pub fn to_dense(&self) -> Vec<C64> {
        let n = self.num_qubits();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut v: Vec<C64> = (0..1usize << n)
            .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        for g in &self.gens {
            let gv = g.apply_to(&v);
            for (a, b) in v.iter_mut().zip(gv) {
                *a = (*a + b) * 0.5;
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter().map(|a| a / norm).collect()
    }
}

/// `φ^(n)` of the encoder: `A1` paired with the first `C`, then `n` sites
/// `B1 E1 ... Bn En`, and the final `C`.
pub fn chain_state(v: &StabilizerIsometry, n: usize) -> Result<StabilizerState> {
    let k = v.k();
    let mut psi = StabilizerState::bell_pairs(k, "A1", "C");
    for site in 1..=n {
        psi = psi.tensor(&StabilizerState::bell_pairs(k, "X", "C+"));
        let mut inputs = psi.qubits(&["C"])?;
        inputs.extend(psi.qubits(&["X"])?);
        psi = psi
            .apply(v, &inputs, &format!("B{site}"), &format!("E{site}"))?
            .relabel_group("C+", "C");
    }
    Ok(psi)
}

/// The closed ring of length `l`: site `k` takes `L_k R_k`, with `R_k`
/// paired to `L_{k+1}` cyclically.
pub fn ring_state(v: &StabilizerIsometry, l: usize) -> Result<StabilizerState> {
    if l == 0 {
        return Err(LabError::InvalidArgument("ring length must be positive".into()));
    }
    let k = v.k();
    let pair = |site: usize| {
        StabilizerState::bell_pairs(k, &format!("R{site}"), &format!("L{}", site % l + 1))
    };
    let mut psi = pair(1);
    for site in 2..=l {
        psi = psi.tensor(&pair(site));
    }
    for site in 1..=l {
        let mut inputs = psi.qubits(&[format!("L{site}")])?;
        inputs.extend(psi.qubits(&[format!("R{site}")])?);
        psi = psi.apply(v, &inputs, &format!("B{site}"), &format!("E{site}"))?;
    }
    Ok(psi)
}
