//! Completely positive trace-preserving maps as Kraus families.

mod spec;

pub use spec::{ChannelKind, ChannelSpec, PartitionedIsometry};

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::tensor::{
    axis_offsets, ComplexMatrix, DensityOperator, StateVector, SubsystemLayout, C64, ZERO,
};
use crate::tol::{self, Caps};

/// Kraus family with labeled input and output spaces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KrausChannel {
    kraus: Vec<ComplexMatrix>,
    in_layout: SubsystemLayout,
    out_layout: SubsystemLayout,
}

/// Isometry `V: in -> out` with `V^dagger V = I`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Isometry {
    matrix: ComplexMatrix,
    in_layout: SubsystemLayout,
    out_layout: SubsystemLayout,
}

impl KrausChannel {
    /// Validates shapes and trace preservation, dropping negligible operators.
    pub fn new(
        kraus: Vec<ComplexMatrix>,
        in_layout: SubsystemLayout,
        out_layout: SubsystemLayout,
    ) -> Result<Self> {
        let ch = Self::from_parts(kraus, in_layout, out_layout)?;
        let dev = ch.trace_preservation_deviation();
        if dev > tol::TRACE_PRESERVING {
            return Err(LabError::InvalidChannel(format!(
                "sum of K^dagger K deviates from the identity by {dev:e}"
            )));
        }
        Ok(ch)
    }

    /// Shape checks and trimming only.
    pub(crate) fn from_parts(
        kraus: Vec<ComplexMatrix>,
        in_layout: SubsystemLayout,
        out_layout: SubsystemLayout,
    ) -> Result<Self> {
        let shape = (out_layout.total_dim(), in_layout.total_dim());
        if let Some(k) = kraus.iter().find(|k| k.shape() != shape) {
            return Err(LabError::DimensionMismatch(format!(
                "Kraus operator of shape {:?}, expected {shape:?}",
                k.shape()
            )));
        }
        let kraus: Vec<_> = kraus
            .into_iter()
            .filter(|k| k.frobenius_norm() >= tol::KRAUS_TRIM)
            .collect();
        if kraus.is_empty() {
            return Err(LabError::InvalidChannel("no nonzero Kraus operators".into()));
        }
        Ok(KrausChannel {
            kraus,
            in_layout,
            out_layout,
        })
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        KrausChannel {
            kraus: vec![ComplexMatrix::identity(d)],
            in_layout: layout.clone(),
            out_layout: layout,
        }
    }

    pub fn unitary(u: ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        Self::new(vec![u], layout.clone(), layout)
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn in_layout(&self) -> &SubsystemLayout {
        &self.in_layout
    }

    pub fn out_layout(&self) -> &SubsystemLayout {
        &self.out_layout
    }

    pub fn in_dim(&self) -> usize {
        self.in_layout.total_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.out_layout.total_dim()
    }

    /// Number of Kraus operators after trimming.
    pub fn env_dim(&self) -> usize {
        self.kraus.len()
    }

    pub fn trace_preservation_deviation(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.in_dim(), self.in_dim());
        for k in &self.kraus {
            sum += &k.adjoint().matmul(k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.in_dim()))
    }

    pub fn with_out_layout(mut self, layout: SubsystemLayout) -> Result<Self> {
        if layout.total_dim() != self.out_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "output layout of dimension {} for a channel with output dimension {}",
                layout.total_dim(),
                self.out_dim()
            )));
        }
        self.out_layout = layout;
        Ok(self)
    }

    pub fn with_in_layout(mut self, layout: SubsystemLayout) -> Result<Self> {
        if layout.total_dim() != self.in_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "input layout of dimension {} for a channel with input dimension {}",
                layout.total_dim(),
                self.in_dim()
            )));
        }
        self.in_layout = layout;
        Ok(self)
    }

    /// `sum_a K_a X K_a^dagger` on a bare matrix.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.in_dim(), self.in_dim()) {
            return Err(LabError::DimensionMismatch(format!(
                "{:?} input for a channel on dimension {}",
                x.shape(),
                self.in_dim()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.out_dim(), self.out_dim());
        for k in &self.kraus {
            out += &k.matmul(x).matmul(&k.adjoint());
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.layout().dims() != self.in_layout.dims() {
            return Err(LabError::DimensionMismatch(format!(
                "state dims {:?} do not match channel input dims {:?}",
                rho.layout().dims(),
                self.in_layout.dims()
            )));
        }
        DensityOperator::from_parts(self.apply_matrix(rho.matrix())?, self.out_layout.clone())
    }

    /// Heisenberg-picture map `sum_a K_a^dagger O K_a`.
    pub fn adjoint_apply(&self, o: &ComplexMatrix) -> Result<ComplexMatrix> {
        if o.shape() != (self.out_dim(), self.out_dim()) {
            return Err(LabError::DimensionMismatch(format!(
                "{:?} observable for a channel with output dimension {}",
                o.shape(),
                self.out_dim()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.in_dim(), self.in_dim());
        for k in &self.kraus {
            out += &k.adjoint().matmul(o).matmul(k);
        }
        Ok(out)
    }

    /// Applies the channel to the factors `labels` of `rho`. The output factors take
    /// the place of the inputs; other factors keep their order.
    pub fn apply_on<S: AsRef<str>>(
        &self,
        rho: &DensityOperator,
        labels: &[S],
        caps: &Caps,
    ) -> Result<DensityOperator> {
        let (rho, pos) = bring_together_density(rho, labels)?;
        let (pre, din, post) = split_dims(rho.layout(), pos, labels.len());
        if din != self.in_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "factors {:?} have dimension {din}, channel input is {}",
                labels.iter().map(|l| l.as_ref()).collect::<Vec<_>>(),
                self.in_dim()
            )));
        }
        let dout = self.out_dim();
        let m_in = pre * din * post;
        let m_out = pre * dout * post;
        caps.check("channel output state", (m_out as u128).pow(2))?;
        let data = rho.matrix().as_slice();
        let mut out = vec![ZERO; m_out * m_out];
        for k in &self.kraus {
            let kc = k.conj();
            let t = left_apply(k, data, pre, post * m_in);
            for (r, row) in t.chunks_exact(m_in).enumerate() {
                let o = left_apply(&kc, row, pre, post);
                for (d, s) in out[r * m_out..(r + 1) * m_out].iter_mut().zip(&o) {
                    *d += s;
                }
            }
        }
        let layout = splice(rho.layout(), pos, labels.len(), &self.out_layout)?;
        DensityOperator::from_parts(ComplexMatrix::from_vec(m_out, m_out, out)?, layout)
    }

    /// Composition `self ∘ first`.
    pub fn compose(&self, first: &KrausChannel, caps: &Caps) -> Result<KrausChannel> {
        if first.out_dim() != self.in_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "cannot feed output dimension {} into input dimension {}",
                first.out_dim(),
                self.in_dim()
            )));
        }
        let count = (self.env_dim() * first.env_dim()) as u128;
        caps.check(
            "composed Kraus family",
            count * (self.out_dim() * first.in_dim()) as u128,
        )?;
        let mut kraus = Vec::with_capacity(count as usize);
        for k1 in &first.kraus {
            for k2 in &self.kraus {
                kraus.push(k2.matmul(k1));
            }
        }
        Self::from_parts(kraus, first.in_layout.clone(), self.out_layout.clone())
    }

    /// `id ⊗ self` with the identity acting on `layout` in front.
    pub fn extend_left(&self, layout: &SubsystemLayout) -> Result<KrausChannel> {
        let id = ComplexMatrix::identity(layout.total_dim());
        Self::from_parts(
            self.kraus.iter().map(|k| id.kron(k)).collect(),
            layout.concat(&self.in_layout)?,
            layout.concat(&self.out_layout)?,
        )
    }

    /// Traces out the output factors `labels`.
    pub fn trace_output<S: AsRef<str>>(&self, labels: &[S]) -> Result<KrausChannel> {
        let traced = self.out_layout.indices(labels)?;
        let kept = self.out_layout.complement(&traced);
        let dims = self.out_layout.dims();
        let ko = axis_offsets(&dims, &kept);
        let to = axis_offsets(&dims, &traced);
        let din = self.in_dim();
        let mut kraus = Vec::with_capacity(self.kraus.len() * to.len());
        for k in &self.kraus {
            for &t in &to {
                kraus.push(ComplexMatrix::from_fn(ko.len(), din, |r, c| k.get(ko[r] + t, c)));
            }
        }
        Self::from_parts(kraus, self.in_layout.clone(), self.out_layout.select(&kept))
    }
}

/// `V = sum_a K_a ⊗ |a>` with the environment as a trailing factor `Env`.
pub fn stinespring(ch: &KrausChannel) -> Result<Isometry> {
    let k = ch.env_dim();
    let dout = ch.out_dim();
    let m = ComplexMatrix::from_fn(dout * k, ch.in_dim(), |r, c| ch.kraus[r % k].get(r / k, c));
    let env = SubsystemLayout::single(&fresh_label(ch.out_layout(), "Env"), k)?;
    Ok(Isometry {
        matrix: m,
        in_layout: ch.in_layout.clone(),
        out_layout: ch.out_layout.concat(&env)?,
    })
}

/// The environment-output channel of the canonical dilation: `F_a[b, i] = K_b[a, i]`.
pub fn complementary(ch: &KrausChannel) -> Result<KrausChannel> {
    let k = ch.env_dim();
    let kraus = (0..ch.out_dim())
        .map(|a| ComplexMatrix::from_fn(k, ch.in_dim(), |b, i| ch.kraus[b].get(a, i)))
        .collect();
    KrausChannel::from_parts(
        kraus,
        ch.in_layout.clone(),
        SubsystemLayout::single("Env", k)?,
    )
}

/// `E = Tr_E ∘ V` and `F = Tr_B ∘ V` for a partition of V's output.
pub fn boundary_channels<S: AsRef<str>>(
    v: &Isometry,
    b_labels: &[S],
    e_labels: &[S],
) -> Result<(KrausChannel, KrausChannel)> {
    let out = v.out_layout();
    let b = out.indices(b_labels)?;
    let e = out.indices(e_labels)?;
    if b.iter().any(|i| e.contains(i)) || b.len() + e.len() != out.len() {
        return Err(LabError::InvalidArgument(format!(
            "{:?} and {:?} do not partition the output factors {:?}",
            b_labels.iter().map(|l| l.as_ref()).collect::<Vec<_>>(),
            e_labels.iter().map(|l| l.as_ref()).collect::<Vec<_>>(),
            out.labels()
        )));
    }
    let ch = v.as_channel();
    Ok((ch.trace_output(e_labels)?, ch.trace_output(b_labels)?))
}

/// `ρ ↦ E(ρ ⊗ ω_D)`: the first input leg is fed, the second is one half of a
/// maximally entangled pair whose other half becomes a new output factor `C`.
pub fn tilde(ch: &KrausChannel, d: usize) -> Result<KrausChannel> {
    if d == 0 || ch.in_dim() != d * d {
        return Err(LabError::DimensionMismatch(format!(
            "channel input dimension {} is not D^2 for D = {d}",
            ch.in_dim()
        )));
    }
    let dout = ch.out_dim();
    let s = 1.0 / (d as f64).sqrt();
    let kraus = ch
        .kraus
        .iter()
        .map(|k| {
            ComplexMatrix::from_fn(dout * d, d, |row, i| {
                let (o, c) = (row / d, row % d);
                k.get(o, i * d + c) * s
            })
        })
        .collect();
    let c = SubsystemLayout::single(&fresh_label(ch.out_layout(), "C"), d)?;
    KrausChannel::from_parts(kraus, c.clone(), ch.out_layout.concat(&c)?)
}

/// `Ẽ^(n)`: n applications of the tilde map, each adding one output block.
/// Output factors are the per-step outputs suffixed `1..n`, then `C`.
pub fn iterate_tilde(ch: &KrausChannel, n: usize, caps: &Caps) -> Result<KrausChannel> {
    if n == 0 {
        return Err(LabError::InvalidArgument("iteration count must be at least 1".into()));
    }
    let c_label = ch
        .out_layout
        .labels()
        .last()
        .map(|l| l.to_string())
        .unwrap_or_default();
    let step_out = ch.out_layout.select(&(0..ch.out_layout.len() - 1).collect::<Vec<_>>());
    let suffixed = |k: usize| -> Result<SubsystemLayout> {
        let labels: Vec<String> = step_out.labels().iter().map(|l| format!("{l}{k}")).collect();
        step_out.with_labels(&labels)
    };
    let c = SubsystemLayout::single(&c_label, ch.in_dim())?;
    let step = |k: usize| -> Result<KrausChannel> {
        ch.clone().with_out_layout(suffixed(k)?.concat(&c)?)
    };
    let mut acc = step(1)?;
    let mut blocks = SubsystemLayout::empty();
    for k in 2..=n {
        blocks = blocks.concat(&suffixed(k - 1)?)?;
        let wide = step(k)?.extend_left(&blocks)?;
        let count = (acc.env_dim() * ch.env_dim()) as u128;
        caps.check(
            "iterated channel",
            count * (wide.out_dim() * acc.in_dim()) as u128,
        )?;
        acc = wide.compose(&acc, caps)?;
    }
    Ok(acc)
}

impl Isometry {
    pub fn new(
        matrix: ComplexMatrix,
        in_layout: SubsystemLayout,
        out_layout: SubsystemLayout,
    ) -> Result<Self> {
        if matrix.shape() != (out_layout.total_dim(), in_layout.total_dim()) {
            return Err(LabError::DimensionMismatch(format!(
                "{:?} matrix for an isometry {} -> {}",
                matrix.shape(),
                in_layout.total_dim(),
                out_layout.total_dim()
            )));
        }
        let dev = matrix.isometry_deviation();
        if dev > tol::TRACE_PRESERVING {
            return Err(LabError::InvalidChannel(format!(
                "V^dagger V deviates from the identity by {dev:e}"
            )));
        }
        Ok(Isometry {
            matrix,
            in_layout,
            out_layout,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn in_layout(&self) -> &SubsystemLayout {
        &self.in_layout
    }

    pub fn out_layout(&self) -> &SubsystemLayout {
        &self.out_layout
    }

    pub fn as_channel(&self) -> KrausChannel {
        KrausChannel {
            kraus: vec![self.matrix.clone()],
            in_layout: self.in_layout.clone(),
            out_layout: self.out_layout.clone(),
        }
    }

    /// Reorders output factors to the given label order.
    pub fn permute_output<S: AsRef<str>>(&self, order: &[S]) -> Result<Isometry> {
        let out = &self.out_layout;
        if order.len() != out.len() {
            return Err(LabError::InvalidArgument(format!(
                "output order lists {} of {} factors",
                order.len(),
                out.len()
            )));
        }
        out.indices(order)?;
        let axes: Vec<usize> = order
            .iter()
            .map(|l| out.index_of(l.as_ref()))
            .collect::<Result<_>>()?;
        let map = axis_offsets(&out.dims(), &axes);
        Ok(Isometry {
            matrix: ComplexMatrix::from_fn(map.len(), self.matrix.cols(), |r, c| {
                self.matrix.get(map[r], c)
            }),
            in_layout: self.in_layout.clone(),
            out_layout: out.select(&axes),
        })
    }

    pub fn with_layouts(
        mut self,
        in_layout: SubsystemLayout,
        out_layout: SubsystemLayout,
    ) -> Result<Isometry> {
        if in_layout.total_dim() != self.in_layout.total_dim()
            || out_layout.total_dim() != self.out_layout.total_dim()
        {
            return Err(LabError::DimensionMismatch("relabeling changes dimensions".into()));
        }
        self.in_layout = in_layout;
        self.out_layout = out_layout;
        Ok(self)
    }

    /// Applies V to the factors `labels` of a pure state, in place.
    pub fn apply_on<S: AsRef<str>>(
        &self,
        psi: &StateVector,
        labels: &[S],
        caps: &Caps,
    ) -> Result<StateVector> {
        let (psi, pos) = bring_together_state(psi, labels)?;
        let (pre, din, post) = split_dims(psi.layout(), pos, labels.len());
        if din != self.in_layout.total_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "factors have dimension {din}, isometry input is {}",
                self.in_layout.total_dim()
            )));
        }
        caps.check(
            "state after isometry",
            (pre * self.out_layout.total_dim() * post) as u128,
        )?;
        let amps = left_apply(&self.matrix, psi.amplitudes(), pre, post);
        let layout = splice(psi.layout(), pos, labels.len(), &self.out_layout)?;
        StateVector::from_parts(amps, layout)
    }
}

/// Treats `data` as `pre` blocks of `k.cols()` rows of `width` entries and maps
/// every block through `k`.
fn left_apply(k: &ComplexMatrix, data: &[C64], pre: usize, width: usize) -> Vec<C64> {
    let (dout, din) = k.shape();
    debug_assert_eq!(data.len(), pre * din * width);
    let mut out = vec![ZERO; pre * dout * width];
    for p in 0..pre {
        let src = &data[p * din * width..(p + 1) * din * width];
        let dst = &mut out[p * dout * width..(p + 1) * dout * width];
        for o in 0..dout {
            let drow = &mut dst[o * width..(o + 1) * width];
            for i in 0..din {
                let c = k.get(o, i);
                if c == ZERO {
                    continue;
                }
                for (d, s) in drow.iter_mut().zip(&src[i * width..(i + 1) * width]) {
                    *d += c * s;
                }
            }
        }
    }
    out
}

fn split_dims(layout: &SubsystemLayout, pos: usize, count: usize) -> (usize, usize, usize) {
    let dims = layout.dims();
    (
        dims[..pos].iter().product(),
        dims[pos..pos + count].iter().product(),
        dims[pos + count..].iter().product(),
    )
}

/// Replaces `count` factors at `pos` by `replacement`.
fn splice(
    layout: &SubsystemLayout,
    pos: usize,
    count: usize,
    replacement: &SubsystemLayout,
) -> Result<SubsystemLayout> {
    let before = layout.select(&(0..pos).collect::<Vec<_>>());
    let after = layout.select(&(pos + count..layout.len()).collect::<Vec<_>>());
    before.concat(replacement)?.concat(&after)
}

/// Target factors in the requested order as one contiguous run; returns its start.
fn target_order<S: AsRef<str>>(
    layout: &SubsystemLayout,
    labels: &[S],
) -> Result<(Option<Vec<String>>, usize)> {
    layout.indices(labels)?;
    let idx: Vec<usize> = labels
        .iter()
        .map(|l| layout.index_of(l.as_ref()))
        .collect::<Result<_>>()?;
    if idx.is_empty() {
        return Err(LabError::InvalidArgument("no target factors".into()));
    }
    if idx.windows(2).all(|w| w[1] == w[0] + 1) {
        return Ok((None, idx[0]));
    }
    let mut order: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
    order.extend(
        layout
            .complement(&idx)
            .into_iter()
            .map(|i| layout.factors()[i].label.clone()),
    );
    Ok((Some(order), 0))
}

fn bring_together_density<'a, S: AsRef<str>>(
    rho: &'a DensityOperator,
    labels: &[S],
) -> Result<(std::borrow::Cow<'a, DensityOperator>, usize)> {
    match target_order(rho.layout(), labels)? {
        (None, pos) => Ok((std::borrow::Cow::Borrowed(rho), pos)),
        (Some(order), pos) => Ok((std::borrow::Cow::Owned(rho.permute(&order)?), pos)),
    }
}

fn bring_together_state<'a, S: AsRef<str>>(
    psi: &'a StateVector,
    labels: &[S],
) -> Result<(std::borrow::Cow<'a, StateVector>, usize)> {
    match target_order(psi.layout(), labels)? {
        (None, pos) => Ok((std::borrow::Cow::Borrowed(psi), pos)),
        (Some(order), pos) => Ok((std::borrow::Cow::Owned(psi.permute(&order)?), pos)),
    }
}

fn fresh_label(layout: &SubsystemLayout, base: &str) -> String {
    if !layout.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|l| !layout.contains(l))
        .unwrap()
}

#[cfg(test)]
pub(crate) mod tests;
