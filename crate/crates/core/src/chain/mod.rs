//! Open and closed chain states built from a site isometry, their entropies and
//! conditional mutual information.

use serde::Serialize;

use crate::algebra::{dual_complementarity_check, BlockDecomposition, OperatorAlgebra};
use crate::channel::{boundary_channels, tilde, Isometry, KrausChannel};
use crate::error::{LabError, Result};
use crate::tensor::{
    entropy_of, max_entangled_on, ComplexMatrix, DensityOperator, RegionEntropy, StateVector,
    SubsystemLayout, C64, ZERO,
};
use crate::tol::{Caps, Tolerances};

/// A site isometry `V: L ⊗ R -> B ⊗ E` together with its bond dimension.
///
/// The output factors are merged into one `B` and one `E` factor; the right
/// input leg `R` is the one that is entangled with the next site.
#[derive(Clone, Debug)]
pub struct ChainModel {
    v: Isometry,
    original: Isometry,
    d: usize,
    b_labels: Vec<String>,
    e_labels: Vec<String>,
    caps: Caps,
}

impl ChainModel {
    pub fn new<S: AsRef<str>>(
        v: Isometry,
        b_labels: &[S],
        e_labels: &[S],
        caps: Caps,
    ) -> Result<Self> {
        let din = v.in_layout().total_dim();
        let d = (din as f64).sqrt().round() as usize;
        if d * d != din || d == 0 {
            return Err(LabError::DimensionMismatch(format!(
                "isometry input dimension {din} is not D^2"
            )));
        }
        let out = v.out_layout();
        let b = out.indices(b_labels)?;
        let e = out.indices(e_labels)?;
        if b.iter().any(|i| e.contains(i)) || b.len() + e.len() != out.len() {
            return Err(LabError::InvalidArgument(format!(
                "B labels {:?} and E labels {:?} do not partition {:?}",
                b_labels.iter().map(|s| s.as_ref()).collect::<Vec<_>>(),
                e_labels.iter().map(|s| s.as_ref()).collect::<Vec<_>>(),
                out.labels()
            )));
        }
        let order: Vec<&str> = b_labels
            .iter()
            .chain(e_labels)
            .map(|s| s.as_ref())
            .collect();
        let db: usize = b.iter().map(|&i| out.dims()[i]).product();
        let de: usize = e.iter().map(|&i| out.dims()[i]).product();
        let merged = v.permute_output(&order)?.with_layouts(
            SubsystemLayout::new([("L", d), ("R", d)])?,
            SubsystemLayout::new([("B", db), ("E", de)])?,
        )?;
        Ok(ChainModel {
            v: merged,
            original: v,
            d,
            b_labels: b_labels.iter().map(|s| s.as_ref().to_string()).collect(),
            e_labels: e_labels.iter().map(|s| s.as_ref().to_string()).collect(),
            caps,
        })
    }

    /// Site isometry with output `[B, E]` and input `[L, R]`.
    pub fn isometry(&self) -> &Isometry {
        &self.v
    }

    /// The isometry as supplied, before merging output factors.
    pub fn original_isometry(&self) -> &Isometry {
        &self.original
    }

    pub fn bond_dim(&self) -> usize {
        self.d
    }

    pub fn b_dim(&self) -> usize {
        self.v.out_layout().factors()[0].dim
    }

    pub fn e_dim(&self) -> usize {
        self.v.out_layout().factors()[1].dim
    }

    pub fn b_labels(&self) -> &[String] {
        &self.b_labels
    }

    pub fn e_labels(&self) -> &[String] {
        &self.e_labels
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self
    }

    /// Schmidt coefficients of the bond pairs. Only the uniform spectrum is supported.
    pub fn schmidt_spectrum(&self) -> Vec<f64> {
        vec![1.0 / self.d as f64; self.d]
    }

    /// `E = Tr_E ∘ V` and `F = Tr_B ∘ V`.
    pub fn site_channels(&self) -> Result<(KrausChannel, KrausChannel)> {
        boundary_channels(&self.v, &["B"], &["E"])
    }

    /// `Ẽ: C -> B ⊗ C`.
    pub fn tilde_e(&self) -> Result<KrausChannel> {
        tilde(&self.site_channels()?.0, self.d)
    }

    /// `F̃: C -> E ⊗ C`.
    pub fn tilde_f(&self) -> Result<KrausChannel> {
        tilde(&self.site_channels()?.1, self.d)
    }
}

/// The pure state `φ^(n)` on `A1 (B1 E1) … (Bn En) C`.
#[derive(Clone, Debug)]
pub struct ChainState {
    psi: StateVector,
    n: usize,
}

impl ChainState {
    pub fn psi(&self) -> &StateVector {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b_labels(&self) -> Vec<String> {
        (1..=self.n).map(|k| format!("B{k}")).collect()
    }

    pub fn e_labels(&self) -> Vec<String> {
        (1..=self.n).map(|k| format!("E{k}")).collect()
    }

    fn with_ends(&self, middle: Vec<String>) -> Vec<String> {
        let mut keep = vec!["A1".to_string()];
        keep.extend(middle);
        keep.push("C".to_string());
        keep
    }

    /// `ρ^(n)`: the E factors traced out.
    pub fn rho(&self) -> Result<DensityOperator> {
        self.psi.reduce(&self.with_ends(self.b_labels()))
    }

    /// `σ^(n)`: the B factors traced out.
    pub fn sigma(&self) -> Result<DensityOperator> {
        self.psi.reduce(&self.with_ends(self.e_labels()))
    }
}

/// `φ^(0) = ω_D` on `A1 C`, then `φ^(k) = V_{C,X -> B_k E_k}(φ^(k-1) ⊗ ω_D on X C)`.
pub fn build_open_chain(model: &ChainModel, n: usize) -> Result<ChainState> {
    let d = model.d;
    let site = (model.b_dim() * model.e_dim()) as u128;
    model
        .caps
        .check("open chain state", (d * d) as u128 * site.pow(n as u32))?;
    let mut psi = max_entangled_on(d, "A1", "C")?;
    for k in 1..=n {
        let pair = max_entangled_on(d, "X", "C+")?;
        psi = psi.tensor(&pair)?;
        let v = model.v.clone().with_layouts(
            model.v.in_layout().clone(),
            SubsystemLayout::new([(format!("B{k}"), model.b_dim()), (format!("E{k}"), model.e_dim())])?,
        )?;
        psi = v
            .apply_on(&psi, &["C", "X"], &model.caps)?
            .relabel("C+", "C")?;
    }
    Ok(ChainState { psi, n })
}

/// Which factors of the closed ring to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RingKeep {
    B,
    BAndE,
}

/// `V^{⊗l} |ω_D>^{⊗l}` with periodic pairing of `R_k` and `L_{k+1}`, reduced to
/// `B1 … Bl` or kept whole as `B1 E1 … Bl El`.
pub fn build_closed_chain(model: &ChainModel, l: usize, keep: RingKeep) -> Result<DensityOperator> {
    if l < 2 {
        return Err(LabError::InvalidArgument(format!("ring length {l} is below 2")));
    }
    let d = model.d;
    let legs = (d as u128).pow(2 * l as u32);
    match keep {
        RingKeep::B => {
            let db = model.b_dim() as u128;
            let d2 = (d * d) as u128;
            let peak = (0..=l as u32)
                .map(|k| (db.pow(k) * d2.pow(l as u32 - k)).pow(2))
                .max()
                .unwrap_or(0);
            model.caps.check("ring density matrix", peak)?;
            let e = model.site_channels()?.0;
            let mut rho = ring_pairs(d, l)?.to_density();
            for k in 1..=l {
                let ek = e
                    .clone()
                    .with_out_layout(SubsystemLayout::single(&format!("B{k}"), model.b_dim())?)?;
                rho = ek.apply_on(&rho, &[format!("L{k}"), format!("R{k}")], &model.caps)?;
            }
            Ok(rho)
        }
        RingKeep::BAndE => {
            let site = (model.b_dim() * model.e_dim()) as u128;
            model.caps.check("ring state", legs.max(site.pow(l as u32)))?;
            model.caps.check("ring density matrix", site.pow(2 * l as u32))?;
            let mut psi = ring_pairs(d, l)?;
            for k in 1..=l {
                let v = model.v.clone().with_layouts(
                    model.v.in_layout().clone(),
                    SubsystemLayout::new([
                        (format!("B{k}"), model.b_dim()),
                        (format!("E{k}"), model.e_dim()),
                    ])?,
                )?;
                psi = v.apply_on(&psi, &[format!("L{k}"), format!("R{k}")], &model.caps)?;
            }
            Ok(psi.to_density())
        }
    }
}

/// Bond pairs `(R_k, L_{k+1 mod l})` laid out as `L1 R1 L2 R2 …`.
fn ring_pairs(d: usize, l: usize) -> Result<StateVector> {
    let layout = SubsystemLayout::new(
        (1..=l).flat_map(|k| [(format!("L{k}"), d), (format!("R{k}"), d)]),
    )?;
    let mut amps = vec![ZERO; layout.total_dim()];
    let a = C64::new((d as f64).powf(-(l as f64) / 2.0), 0.0);
    // amplitude is nonzero iff r_k = l_{k+1}; enumerate the free indices r_1..r_l
    let total = d.pow(l as u32);
    for code in 0..total {
        let mut r = vec![0usize; l];
        let mut c = code;
        for slot in r.iter_mut().rev() {
            *slot = c % d;
            c /= d;
        }
        let mut flat = 0;
        for k in 0..l {
            let left = r[(k + l - 1) % l];
            flat = (flat * d + left) * d + r[k];
        }
        amps[flat] = a;
    }
    StateVector::new(amps, layout)
}

/// Entropy in bits of the B part of the closed ring.
pub fn ring_entropy(model: &ChainModel, l: usize) -> Result<f64> {
    build_closed_chain(model, l, RingKeep::B)?.entropy()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CmiMethod {
    BruteForce,
    Formula,
    CoherentInformation,
}

/// The four entropies behind a brute-force CMI, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CmiComponents {
    pub s_ab: f64,
    pub s_bc: f64,
    pub s_b: f64,
    pub s_abc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmiReport {
    pub value: f64,
    pub method: CmiMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<CmiComponents>,
}

/// `I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC)` in bits.
pub fn cmi<T: RegionEntropy, S: AsRef<str>>(state: &T, a: &[S], b: &[S], c: &[S]) -> Result<CmiReport> {
    let names = |x: &[S]| x.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>();
    let (a, b, c) = (names(a), names(b), names(c));
    for (x, y) in [(&a, &b), (&a, &c), (&b, &c)] {
        if let Some(shared) = x.iter().find(|l| y.contains(l)) {
            return Err(LabError::InvalidArgument(format!(
                "regions overlap on `{shared}`"
            )));
        }
    }
    let join = |parts: &[&Vec<String>]| parts.iter().flat_map(|p| p.iter().cloned()).collect::<Vec<_>>();
    let s = |region: Vec<String>| -> Result<f64> {
        if region.is_empty() {
            Ok(0.0)
        } else {
            state.region_entropy(&region)
        }
    };
    let comp = CmiComponents {
        s_ab: s(join(&[&a, &b]))?,
        s_bc: s(join(&[&b, &c]))?,
        s_b: s(b.clone())?,
        s_abc: s(join(&[&a, &b, &c]))?,
    };
    Ok(CmiReport {
        value: comp.s_ab + comp.s_bc - comp.s_b - comp.s_abc,
        method: CmiMethod::BruteForce,
        components: Some(comp),
    })
}

/// Mutual information `I(X:Y) = S(X) + S(Y) - S(XY)`.
pub fn mutual_information<T: RegionEntropy, S: AsRef<str>>(state: &T, x: &[S], y: &[S]) -> Result<f64> {
    let xy: Vec<&str> = x.iter().chain(y).map(|s| s.as_ref()).collect();
    Ok(state.region_entropy(x)? + state.region_entropy(y)? - state.region_entropy(&xy)?)
}

/// `I(A1 : C_n | B1 … Bn)` of `ρ^(n)`.
pub fn chain_cmi(state: &ChainState) -> Result<CmiReport> {
    let b = state.b_labels();
    cmi(state.psi(), &["A1".to_string()], &b, &["C".to_string()])
}

/// CMI saturation between n = 1 and n = 2 and its two equivalent halves.
///
/// Residuals are signed so that each is non-negative up to rounding; the
/// first equals the sum of the mutual-information residuals.
#[derive(Clone, Debug, Serialize)]
pub struct SaturationReport {
    pub cmi_n1: f64,
    pub cmi_n2: f64,
    /// `I(A1:C1|B1)_(1) - I(A1:C2|B1B2)_(2)`
    pub cmi_residual: f64,
    /// `I(A1:B1C1)_(1) - I(A1:B1B2C2)_(2)`
    pub mi_bc_residual: f64,
    /// `I(A1:B1B2)_(2) - I(A1:B1)_(1)`
    pub mi_b_residual: f64,
    /// `I(A1:E1C1)_(1) - I(A1:E1E2C2)_(2)`
    pub mi_ec_residual: f64,
    pub cmi_saturated: bool,
    pub mi_bc_saturated: bool,
    pub mi_b_saturated: bool,
    pub mi_ec_saturated: bool,
    /// Saturation holds iff both halves hold, and the B half iff the E half.
    pub equivalences_hold: bool,
}

pub fn saturation_check(model: &ChainModel, tol: &Tolerances) -> Result<SaturationReport> {
    let one = build_open_chain(model, 1)?;
    let two = build_open_chain(model, 2)?;
    let (p1, p2) = (one.psi(), two.psi());
    let cmi_n1 = chain_cmi(&one)?.value;
    let cmi_n2 = chain_cmi(&two)?.value;
    let mi_bc_residual = mutual_information(p1, &["A1"], &["B1", "C"])?
        - mutual_information(p2, &["A1"], &["B1", "B2", "C"])?;
    let mi_b_residual = mutual_information(p2, &["A1"], &["B1", "B2"])?
        - mutual_information(p1, &["A1"], &["B1"])?;
    let mi_ec_residual = mutual_information(p1, &["A1"], &["E1", "C"])?
        - mutual_information(p2, &["A1"], &["E1", "E2", "C"])?;
    let cmi_residual = cmi_n1 - cmi_n2;
    let ok = |r: f64| r.abs() <= tol.saturation;
    let (s5, s6, s7, s8) = (
        ok(cmi_residual),
        ok(mi_bc_residual),
        ok(mi_b_residual),
        ok(mi_ec_residual),
    );
    Ok(SaturationReport {
        cmi_n1,
        cmi_n2,
        cmi_residual,
        mi_bc_residual,
        mi_b_residual,
        mi_ec_residual,
        cmi_saturated: s5,
        mi_bc_saturated: s6,
        mi_b_saturated: s7,
        mi_ec_saturated: s8,
        equivalences_hold: s5 == (s6 && s7) && s7 == s8,
    })
}

/// `sum_k p_k log2(n_k/n_k') + sum_l q_l log2(m_l/m_l')` with `p_k = n_k n_k'/D`.
pub fn cmi_formula(a: &BlockDecomposition, b: &BlockDecomposition, d: usize) -> Result<f64> {
    let term = |bd: &BlockDecomposition, which: &str| -> Result<f64> {
        if bd.ambient_dim() != d {
            return Err(LabError::DimensionMismatch(format!(
                "blocks of {which} sum to {} but D = {d}",
                bd.ambient_dim()
            )));
        }
        Ok(bd
            .blocks()
            .iter()
            .map(|&(n, m)| (n * m) as f64 / d as f64 * (n as f64 / m as f64).log2())
            .sum())
    };
    Ok(term(a, "the first algebra")? + term(b, "the second algebra")?)
}

/// `(id ⊗ P_A)(|ω_D><ω_D|)` on `A1 A2`.
pub fn omega_a_state(alg: &OperatorAlgebra, d: usize) -> Result<DensityOperator> {
    if alg.ambient_dim() != d {
        return Err(LabError::DimensionMismatch(format!(
            "algebra on dimension {} for D = {d}",
            alg.ambient_dim()
        )));
    }
    let mut rho = ComplexMatrix::zeros(d * d, d * d);
    let w = 1.0 / d as f64;
    for i in 0..d {
        for j in 0..d {
            let pij = alg.conditional_expectation(&ComplexMatrix::unit(d, d, i, j))?;
            for r in 0..d {
                for c in 0..d {
                    rho.set(i * d + r, j * d + c, pij.get(r, c) * w);
                }
            }
        }
    }
    DensityOperator::from_parts(rho, SubsystemLayout::new([("A1", d), ("A2", d)])?)
}

/// `I_c(A1 > A2) = S(A2) - S(A1 A2)` of `(id ⊗ P_A)(ω_D)`.
pub fn coherent_information(alg: &OperatorAlgebra, d: usize) -> Result<f64> {
    let w = omega_a_state(alg, d)?;
    Ok(w.region_entropy(&["A2"])? - entropy_of(w.matrix())?)
}

/// The CMI as a sum of two coherent informations, one per correctable algebra.
pub fn coherent_information_route(model: &ChainModel, tol: &Tolerances) -> Result<CmiReport> {
    let dual = dual_complementarity_check(model, tol)?;
    if !dual.pass {
        return Err(LabError::InvalidArgument(
            "the coherent-information route needs dual complementarity, which fails".into(),
        ));
    }
    let d = model.bond_dim();
    Ok(CmiReport {
        value: coherent_information(&dual.a, d)? + coherent_information(&dual.b, d)?,
        method: CmiMethod::CoherentInformation,
        components: None,
    })
}

/// Least-squares `c0` in `S(l) = 2 l - c0` and the largest residual.
pub fn fit_c0(points: &[(usize, f64)]) -> (f64, f64) {
    if points.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let c0 = points
        .iter()
        .map(|&(l, s)| 2.0 * l as f64 - s)
        .sum::<f64>()
        / points.len() as f64;
    let residual = points
        .iter()
        .map(|&(l, s)| (s - (2.0 * l as f64 - c0)).abs())
        .fold(0.0, f64::max);
    (c0, residual)
}

#[cfg(test)]
mod tests;
