use serde::Serialize;

use super::clifford::Clifford;
use super::gf2::{span_equal, symplectic_complement, symplectic_product};
use super::isometry::StabilizerIsometry;
use super::pauli::{Bits, PauliOperator};
use super::state::{chain_state, ring_state, StabilizerState};
use crate::algebra::{algebra_closure, OperatorAlgebra};
use crate::error::{LabError, Result};

/// Gaussian elimination on Pauli operators, pivoting on `key(p)` and
/// multiplying operators so that phases stay exact.
fn pauli_rref(mut ops: Vec<PauliOperator>, key: impl Fn(&PauliOperator) -> Bits) -> Vec<PauliOperator> {
    let mut keys: Vec<Bits> = ops.iter().map(&key).collect();
    let ncols = keys.first().map_or(0, |k| k.len());
    let mut next = 0;
    for col in 0..ncols {
        let Some(found) = (next..ops.len()).find(|&r| keys[r][col]) else {
            continue;
        };
        ops.swap(next, found);
        keys.swap(next, found);
        for r in 0..ops.len() {
            if r != next && keys[r][col] {
                ops[r] = ops[r].mul(&ops[next]);
                keys[r] = key(&ops[r]);
            }
        }
        next += 1;
    }
    ops.truncate(next);
    ops
}

/// A logical Pauli of the encoding `C_0 -> B E C` and one representative.
#[derive(Clone, Debug, Serialize)]
pub struct LogicalPauli {
    /// Operator on the `K` input qubits.
    pub input: PauliOperator,
    /// Representative over the code qubits, identity off the support.
    pub representative: PauliOperator,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogicalEnumeration {
    /// Code qubits: the encoder outputs in order, then the `C` qubits.
    pub qubits: Vec<String>,
    pub support: Vec<String>,
    /// Number of independent logical operators on the support.
    pub count: usize,
    pub logicals: Vec<LogicalPauli>,
}

/// The one-site chain, the `A1` qubits and the code qubits (outputs then `C`).
struct Code {
    state: StabilizerState,
    a1: Vec<usize>,
    order: Vec<usize>,
}

impl Code {
    fn new(v: &StabilizerIsometry) -> Result<Self> {
        let state = chain_state(v, 1)?;
        let a1 = state.qubits(&["A1"])?;
        let mut order = state.qubits(&["B1", "E1"])?;
        order.sort_by_key(|&q| {
            // outputs keep the encoder's order
            let label = &state.labels()[q];
            v.labels().iter().position(|l| l == label).unwrap_or(usize::MAX)
        });
        order.extend(state.qubits(&["C"])?);
        Ok(Code { state, a1, order })
    }

    /// Maps `B`, `E`, `C` and qubit labels onto register positions.
    fn resolve<S: AsRef<str>>(&self, support: &[S]) -> Result<Vec<usize>> {
        let tokens: Vec<String> = support
            .iter()
            .map(|s| match s.as_ref() {
                "B" => "B1".to_string(),
                "E" => "E1".to_string(),
                other => other.to_string(),
            })
            .collect();
        let q = self.state.qubits(&tokens)?;
        if q.iter().any(|p| self.a1.contains(p)) {
            return Err(LabError::InvalidArgument(
                "the support must lie among the code qubits".into(),
            ));
        }
        Ok(q)
    }

    fn logicals(&self, support: &[usize]) -> Vec<LogicalPauli> {
        let mut region = self.a1.clone();
        region.extend_from_slice(support);
        let a1 = self.a1.clone();
        let key = |p: &PauliOperator| {
            let mut k = p.restrict(&a1).symplectic();
            k.extend_from_bitslice(&p.restrict(support).symplectic());
            k
        };
        let n = self.state.num_qubits();
        pauli_rref(self.state.subgroup_on(&region), key)
            .into_iter()
            .filter(|g| !g.restrict(&self.a1).is_identity())
            .map(|g| {
                let (part, _) = g.split(&self.a1);
                let rest = part.embed(n, &self.a1).mul(&g);
                LogicalPauli {
                    input: part.transpose(),
                    representative: rest.select(&self.order),
                }
            })
            .collect()
    }

    fn subspace(&self, support: &[usize]) -> Vec<Bits> {
        self.logicals(support)
            .iter()
            .map(|l| l.input.symplectic())
            .collect()
    }
}

/// Independent logical Paulis of the encoding `C_0 -> B E C` that have a
/// representative on `support` (`B`, `E`, `C` or individual qubit labels).
pub fn logical_pauli_enumeration<S: AsRef<str>>(
    v: &StabilizerIsometry,
    support: &[S],
) -> Result<LogicalEnumeration> {
    let code = Code::new(v)?;
    let qubits = code.resolve(support)?;
    let logicals = code.logicals(&qubits);
    Ok(LogicalEnumeration {
        qubits: code.order.iter().map(|&q| code.state.labels()[q].clone()).collect(),
        support: support.iter().map(|s| s.as_ref().to_string()).collect(),
        count: logicals.len(),
        logicals,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableColumn {
    ZOnly,
    ZAndX,
    Neither,
}

/// Generator table of a Pauli-generated algebra on `K` qubits, after a
/// Clifford change of frame: `l` qubits carry only `Z`, `m - l` carry `Z`
/// and `X`, the rest nothing.
#[derive(Clone, Debug, Serialize)]
pub struct AlgebraTable {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub columns: Vec<TableColumn>,
    /// Central generators, one per `Z`-only column.
    pub center: Vec<PauliOperator>,
    /// Anticommuting pairs, one per `Z`-and-`X` column.
    pub pairs: Vec<(PauliOperator, PauliOperator)>,
}

impl AlgebraTable {
    /// Table of the algebra spanned by the Paulis in the GF(2) span of `basis`.
    pub fn from_subspace(basis: &[Bits], k: usize) -> Self {
        let mut rest: Vec<Bits> = super::gf2::row_basis(basis);
        let mut center = Vec::new();
        let mut pairs = Vec::new();
        while let Some(v) = (!rest.is_empty()).then(|| rest.remove(0)) {
            match rest.iter().position(|u| symplectic_product(&v, u) == 1) {
                Some(j) => {
                    let u = rest.remove(j);
                    for w in rest.iter_mut() {
                        let (wu, wv) = (symplectic_product(w, &u), symplectic_product(w, &v));
                        if wu == 1 {
                            *w ^= v.as_bitslice();
                        }
                        if wv == 1 {
                            *w ^= u.as_bitslice();
                        }
                    }
                    pairs.push((PauliOperator::from_symplectic(&v), PauliOperator::from_symplectic(&u)));
                }
                None => center.push(PauliOperator::from_symplectic(&v)),
            }
        }
        let l = center.len();
        let m = l + pairs.len();
        let columns = (0..k)
            .map(|i| {
                if i < l {
                    TableColumn::ZOnly
                } else if i < m {
                    TableColumn::ZAndX
                } else {
                    TableColumn::Neither
                }
            })
            .collect();
        AlgebraTable {
            k,
            l,
            m,
            columns,
            center,
            pairs,
        }
    }

    /// Table of the commutant: `Z`-only columns stay, `Z`-and-`X` and
    /// `neither` swap.
    pub fn commutant_columns(&self) -> Vec<TableColumn> {
        self.columns
            .iter()
            .map(|c| match c {
                TableColumn::ZOnly => TableColumn::ZOnly,
                TableColumn::ZAndX => TableColumn::Neither,
                TableColumn::Neither => TableColumn::ZAndX,
            })
            .collect()
    }

    /// The commutant computed from the symplectic complement.
    pub fn commutant(&self) -> AlgebraTable {
        let basis = self.symplectic_basis();
        AlgebraTable::from_subspace(&symplectic_complement(&basis, self.k), self.k)
    }

    pub fn generators(&self) -> Vec<PauliOperator> {
        self.center
            .iter()
            .cloned()
            .chain(self.pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]))
            .collect()
    }

    fn symplectic_basis(&self) -> Vec<Bits> {
        self.generators().iter().map(|p| p.symplectic()).collect()
    }

    /// Vector-space dimension `2^l · 4^(m-l)`.
    pub fn algebra_dim(&self) -> u128 {
        1u128 << (self.l + 2 * (self.m - self.l))
    }

    /// `2^l` blocks of `M_{2^(m-l)} ⊗ I_{2^(K-m)}`.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        vec![(1 << (self.m - self.l), 1 << (self.k - self.m)); 1 << self.l]
    }

    /// `sum_k p_k log2(n_k / n'_k)` for this block pattern.
    pub fn log_ratio(&self) -> i64 {
        (self.m - self.l) as i64 - (self.k - self.m) as i64
    }

    /// Dense algebra generated by the table's Paulis.
    pub fn to_algebra(&self) -> Result<OperatorAlgebra> {
        let d = 1usize << self.k;
        let gens: Vec<_> = self.generators().iter().map(|p| p.to_matrix()).collect();
        if gens.is_empty() {
            return Ok(OperatorAlgebra::scalars(d));
        }
        algebra_closure(&gens)
    }
}

/// Table of the algebra correctable from `B C` (that of `Ẽ`).
pub fn algebra_table(v: &StabilizerIsometry) -> Result<AlgebraTable> {
    algebra_table_on(v, &["B", "C"])
}

pub fn algebra_table_on<S: AsRef<str>>(v: &StabilizerIsometry, support: &[S]) -> Result<AlgebraTable> {
    let code = Code::new(v)?;
    let q = code.resolve(support)?;
    Ok(AlgebraTable::from_subspace(&code.subspace(&q), v.k()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SptVerdict {
    pub nontrivial: bool,
    /// `P` in `A` outside `B'` and `Q` in `B` with `PQ = -QP`.
    pub witness_paulis: Vec<PauliOperator>,
    #[serde(rename = "g_BC")]
    pub g_bc: usize,
    #[serde(rename = "g_E")]
    pub g_e: usize,
    #[serde(rename = "K")]
    pub k: usize,
}

/// Looks for `P` in the algebra correctable from `B C` and `Q` in the one
/// correctable from `E C` with `PQ = -QP`; one exists iff `B'` is a proper
/// subalgebra of `A`.
pub fn spt_detect(v: &StabilizerIsometry) -> Result<SptVerdict> {
    let code = Code::new(v)?;
    let bc = code.resolve(&["B", "C"])?;
    let ec = code.resolve(&["E", "C"])?;
    let e = code.resolve(&["E"])?;
    let a = code.subspace(&bc);
    let b = code.subspace(&ec);
    let mut witness = Vec::new();
    'search: for p in &a {
        for q in &b {
            if symplectic_product(p, q) == 1 {
                witness = vec![PauliOperator::from_symplectic(p), PauliOperator::from_symplectic(q)];
                break 'search;
            }
        }
    }
    Ok(SptVerdict {
        nontrivial: !witness.is_empty(),
        witness_paulis: witness,
        g_bc: a.len(),
        g_e: code.subspace(&e).len(),
        k: v.k(),
    })
}

/// `I(A1 : C | B1...Bn)` in bits on the open chain, by rank arithmetic.
pub fn stabilizer_cmi(v: &StabilizerIsometry, n: usize) -> Result<i64> {
    let psi = chain_state(v, n)?;
    let b: Vec<String> = (1..=n).map(|k| format!("B{k}")).collect();
    let with = |extra: &[&str]| -> Result<i64> {
        let mut t: Vec<String> = b.clone();
        t.extend(extra.iter().map(|s| s.to_string()));
        Ok(psi.entropy_of(&t)? as i64)
    };
    Ok(with(&["A1"])? + with(&["C"])? - with(&[])? - with(&["A1", "C"])?)
}

/// The closed-form CMI from the two correctable algebras, in bits.
pub fn stabilizer_cmi_formula(v: &StabilizerIsometry) -> Result<i64> {
    Ok(algebra_table_on(v, &["B", "C"])?.log_ratio() + algebra_table_on(v, &["E", "C"])?.log_ratio())
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerSaturation {
    pub pass: bool,
    /// `[B C, E C, B, E]` at `n = 2`, each true when equal to `n = 1`.
    pub equal: [bool; 4],
}

/// `A_Ẽ = A_{Ẽ^(2)}`, `A_F̃ = A_{F̃^(2)}` and their `C`-traced versions.
pub fn stabilizer_saturation(v: &StabilizerIsometry) -> Result<StabilizerSaturation> {
    let spans = |n: usize| -> Result<Vec<Vec<Bits>>> {
        let psi = chain_state(v, n)?;
        let a1 = psi.qubits(&["A1"])?;
        let bs: Vec<String> = (1..=n).map(|k| format!("B{k}")).collect();
        let es: Vec<String> = (1..=n).map(|k| format!("E{k}")).collect();
        let with_c = |g: &[String]| {
            let mut t = g.to_vec();
            t.push("C".into());
            t
        };
        [with_c(&bs), with_c(&es), bs.clone(), es.clone()]
            .iter()
            .map(|tokens| {
                let mut region = a1.clone();
                region.extend(psi.qubits(tokens)?);
                Ok(psi
                    .subgroup_on(&region)
                    .iter()
                    .map(|g| g.restrict(&a1).symplectic())
                    .filter(|v| v.any())
                    .collect())
            })
            .collect()
    };
    let (one, two) = (spans(1)?, spans(2)?);
    let equal: Vec<bool> = one.iter().zip(&two).map(|(a, b)| span_equal(a, b)).collect();
    let equal = [equal[0], equal[1], equal[2], equal[3]];
    Ok(StabilizerSaturation {
        pass: equal.iter().all(|&e| e),
        equal,
    })
}

/// `S(ρ_R)` in bits on the closed ring of length `l`. Tokens are site groups
/// such as `B1`, `E3`, or `B` / `E` for all sites.
pub fn stabilizer_entropy<S: AsRef<str>>(v: &StabilizerIsometry, l: usize, region: &[S]) -> Result<usize> {
    if region.is_empty() {
        return Ok(0);
    }
    let psi = ring_state(v, l)?;
    let mut tokens = Vec::new();
    for r in region {
        match r.as_ref() {
            "B" | "E" => tokens.extend((1..=l).map(|k| format!("{}{k}", r.as_ref()))),
            other => tokens.push(other.to_string()),
        }
    }
    Ok(psi.entropy_of(&tokens)?)
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["twirl", "identity", "discard", "cluster"];

/// Built-in Clifford encoders with `K = 1`.
///
/// * `twirl`: Kraus operators `(1/2) P ⊗ P`, environment holding the Pauli label.
/// * `identity`: `|l r> -> |l r>_B |0>_E`.
/// * `discard`: both inputs go to `E`, `B` is a fresh `|0>`.
/// * `cluster`: `CZ (H ⊗ I)` with `L` becoming `B` and `R` becoming `E`.
pub fn builtin(name: &str) -> Result<StabilizerIsometry> {
    let labels = |ls: &[&str]| ls.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match name {
        "twirl" => {
            let mut u = Clifford::identity(4);
            u.h(2).h(3).cz(3, 0).cz(3, 1).cnot(2, 0).cnot(2, 1).cz(2, 3);
            StabilizerIsometry::from_clifford(1, &u, &[0, 1], labels(&["Bl", "Br", "E0", "E1"]), vec![0, 1])
        }
        "identity" => {
            let u = Clifford::identity(3);
            StabilizerIsometry::from_clifford(1, &u, &[0, 1], labels(&["Bl", "Br", "E"]), vec![0, 1])
        }
        "discard" => {
            let u = Clifford::identity(3);
            StabilizerIsometry::from_clifford(1, &u, &[1, 2], labels(&["B", "El", "Er"]), vec![0])
        }
        "cluster" => {
            let mut u = Clifford::identity(2);
            u.h(0).cz(0, 1);
            StabilizerIsometry::from_clifford(1, &u, &[0, 1], labels(&["B", "E"]), vec![0])
        }
        other => Err(LabError::InvalidArgument(format!(
            "unknown built-in encoder `{other}` (known: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}
