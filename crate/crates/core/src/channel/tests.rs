use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::{commutant, correctable_algebra};
use crate::models::paulitwirl;
use crate::tensor::{haar_unitary, haar_unitary_with, max_entangled, paulis, ONE};

fn qubit() -> SubsystemLayout {
    SubsystemLayout::single("Q", 2).unwrap()
}

fn density(m: ComplexMatrix, layout: SubsystemLayout) -> DensityOperator {
    DensityOperator::new(m, layout).unwrap()
}

fn ket0() -> DensityOperator {
    density(ComplexMatrix::unit(2, 2, 0, 0), qubit())
}

fn plus() -> DensityOperator {
    density(ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]), qubit())
}

fn dephasing() -> KrausChannel {
    KrausChannel::new(
        vec![ComplexMatrix::unit(2, 2, 0, 0), ComplexMatrix::unit(2, 2, 1, 1)],
        qubit(),
        qubit(),
    )
    .unwrap()
}

fn depolarizing() -> KrausChannel {
    KrausChannel::new(
        paulis().iter().map(|p| p.scale_real(0.5)).collect(),
        qubit(),
        qubit(),
    )
    .unwrap()
}

/// Kraus family cut from the first `din` columns of a Haar unitary on `dout * k`.
/// `k` is raised to the smallest value that admits an isometry.
pub(crate) fn random_channel(din: usize, dout: usize, k: usize, seed: u64) -> KrausChannel {
    let k = k.max(din.div_ceil(dout));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_unitary_with(dout * k, &mut rng).unwrap();
    let kraus = (0..k)
        .map(|a| ComplexMatrix::from_fn(dout, din, |o, i| u.get(o * k + a, i)))
        .collect();
    KrausChannel::new(
        kraus,
        SubsystemLayout::single("I", din).unwrap(),
        SubsystemLayout::single("O", dout).unwrap(),
    )
    .unwrap()
}

fn random_state(d: usize, seed: u64) -> ComplexMatrix {
    let u = haar_unitary(d, seed).unwrap();
    let w: Vec<f64> = (0..d).map(|i| (i + 1) as f64).collect();
    let total: f64 = w.iter().sum();
    let diag: Vec<C64> = w.iter().map(|x| C64::new(x / total, 0.0)).collect();
    u.matmul(&ComplexMatrix::from_diagonal(&diag)).matmul(&u.adjoint())
}

fn random_hermitian(d: usize, seed: u64) -> ComplexMatrix {
    let u = haar_unitary(d, seed).unwrap();
    let diag: Vec<C64> = (0..d).map(|i| C64::new(i as f64 - 1.3, 0.0)).collect();
    u.matmul(&ComplexMatrix::from_diagonal(&diag)).matmul(&u.adjoint())
}

#[test]
fn identity_channel_fixes_states() {
    let rho = plus();
    let out = KrausChannel::identity(qubit()).apply(&rho).unwrap();
    assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
}

#[test]
fn depolarizing_maps_to_maximally_mixed() {
    let out = depolarizing().apply(&ket0()).unwrap();
    assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-12);
}

#[test]
fn dephasing_pinches_plus() {
    let out = dephasing().apply(&plus()).unwrap();
    assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-12);
}

#[test]
fn apply_rejects_layout_mismatch() {
    let rho = density(
        ComplexMatrix::identity(4).scale_real(0.25),
        SubsystemLayout::new([("a", 2), ("b", 2)]).unwrap(),
    );
    assert!(matches!(
        dephasing().apply(&rho),
        Err(LabError::DimensionMismatch(_))
    ));
}

#[test]
fn adjoint_is_unital() {
    let ch = random_channel(3, 4, 2, 1);
    let back = ch.adjoint_apply(&ComplexMatrix::identity(4)).unwrap();
    assert!(back.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);
}

#[test]
fn adjoint_of_dephasing_kills_x() {
    let [_, x, _, _] = paulis();
    let out = dephasing().adjoint_apply(&x).unwrap();
    assert!(out.max_abs() < 1e-15);
}

#[test]
fn adjoint_rejects_wrong_shape() {
    assert!(dephasing().adjoint_apply(&ComplexMatrix::identity(3)).is_err());
}

#[test]
fn non_trace_preserving_family_is_rejected() {
    let err = KrausChannel::new(vec![ComplexMatrix::unit(2, 2, 0, 0)], qubit(), qubit());
    assert!(matches!(err, Err(LabError::InvalidChannel(_))));
}

#[test]
fn trimming_drops_zero_operators_without_changing_output() {
    let mut kraus = dephasing().kraus().to_vec();
    kraus.push(ComplexMatrix::zeros(2, 2).scale_real(0.0));
    kraus.insert(1, ComplexMatrix::unit(2, 2, 0, 1).scale_real(1e-14));
    let trimmed = KrausChannel::new(kraus.clone(), qubit(), qubit()).unwrap();
    assert_eq!(trimmed.env_dim(), 2);
    let rho = random_state(2, 8);
    let mut direct = ComplexMatrix::zeros(2, 2);
    for k in &kraus {
        direct += &k.matmul(&rho).matmul(&k.adjoint());
    }
    assert!(trimmed.apply_matrix(&rho).unwrap().max_abs_diff(&direct) < 1e-12);
}

#[test]
fn stinespring_of_unitary_has_trivial_environment() {
    let u = haar_unitary(2, 3).unwrap();
    let v = stinespring(&KrausChannel::unitary(u.clone(), qubit()).unwrap()).unwrap();
    assert_eq!(v.out_layout().dims(), vec![2, 1]);
    assert!(v.matrix().max_abs_diff(&u) < 1e-15);
}

#[test]
fn stinespring_of_dephasing() {
    let v = stinespring(&dephasing()).unwrap();
    assert_eq!(v.matrix().shape(), (4, 2));
    assert!(v.matrix().isometry_deviation() < 1e-12);
}

#[test]
fn stinespring_reproduces_channel() {
    let ch = random_channel(2, 3, 3, 5);
    let v = stinespring(&ch).unwrap();
    let rho = DensityOperator::new(random_state(2, 6), ch.in_layout().clone()).unwrap();
    let big = v.as_channel().apply(&rho).unwrap();
    let reduced = big.partial_trace(&["O"]).unwrap();
    let direct = ch.apply(&rho).unwrap();
    assert!(reduced.matrix().max_abs_diff(direct.matrix()) < 1e-10);
}

#[test]
fn twirl_dilation_dimensions() {
    let m = paulitwirl(&ComplexMatrix::identity(2)).unwrap();
    let v = m.original_isometry();
    assert_eq!(v.in_layout().total_dim(), 4);
    assert_eq!(v.out_layout().total_dim(), 16);
    assert_eq!(m.b_dim(), 4);
    assert_eq!(m.e_dim(), 4);
}

#[test]
fn complement_of_identity_is_trace() {
    let c = complementary(&KrausChannel::identity(qubit())).unwrap();
    assert_eq!(c.out_dim(), 1);
    let out = c.apply_matrix(&random_state(2, 2)).unwrap();
    assert!((out.get(0, 0) - ONE).norm() < 1e-12);
}

#[test]
fn complement_of_dephasing_is_pinching() {
    // F_a = sum_b |b><a| K_b with K_b = |b><b| gives F_a = |a><a|
    let c = complementary(&dephasing()).unwrap();
    assert_eq!(c.env_dim(), 2);
    for (a, f) in c.kraus().iter().enumerate() {
        assert!(f.max_abs_diff(&ComplexMatrix::unit(2, 2, a, a)) < 1e-15);
    }
    assert!(c.trace_preservation_deviation() < 1e-12);
}

#[test]
fn complement_algebra_lies_in_commutant() {
    for seed in 0..6 {
        let ch = random_channel(3, 2, 2, 40 + seed);
        let a = correctable_algebra(&ch).unwrap();
        let ac = correctable_algebra(&complementary(&ch).unwrap()).unwrap();
        assert!(commutant(&a).unwrap().containment_residual(&ac) < 1e-8);
    }
}

#[test]
fn double_complement_keeps_correctable_algebra() {
    let ch = random_channel(2, 3, 2, 17);
    let cc = complementary(&complementary(&ch).unwrap()).unwrap();
    let a = correctable_algebra(&ch).unwrap();
    let b = correctable_algebra(&cc).unwrap();
    assert!(a.span_equals(&b, 1e-8));
}

#[test]
fn boundary_channels_of_embedding() {
    // |i> -> |i>_B |0>_E
    let v = ComplexMatrix::from_fn(8, 4, |r, c| if r == 2 * c { ONE } else { ZERO });
    let v = Isometry::new(
        v,
        SubsystemLayout::new([("L", 2), ("R", 2)]).unwrap(),
        SubsystemLayout::new([("B", 4), ("E", 2)]).unwrap(),
    )
    .unwrap();
    let (e, f) = boundary_channels(&v, &["B"], &["E"]).unwrap();
    let rho = random_state(4, 9);
    assert!(e.apply_matrix(&rho).unwrap().max_abs_diff(&rho) < 1e-12);
    assert!(f
        .apply_matrix(&rho)
        .unwrap()
        .max_abs_diff(&ComplexMatrix::unit(2, 2, 0, 0))
        < 1e-12);
    assert!(boundary_channels(&v, &["B"], &["B"]).is_err());
}

#[test]
fn twirl_kraus_operators() {
    let m = paulitwirl(&ComplexMatrix::identity(2)).unwrap();
    let (e, _) = m.site_channels().unwrap();
    assert_eq!(e.env_dim(), 4);
    // oracle: E(σ) = (1/4) sum_i (P_i ⊗ P_i) σ (P_i ⊗ P_i)
    let sigma = random_state(4, 21);
    let mut expected = ComplexMatrix::zeros(4, 4);
    for p in paulis() {
        let pp = p.kron(&p);
        expected += &pp.matmul(&sigma).matmul(&pp).scale_real(0.25);
    }
    assert!(e.apply_matrix(&sigma).unwrap().max_abs_diff(&expected) < 1e-12);
    for k in e.kraus() {
        let hit = paulis()
            .iter()
            .any(|p| k.max_abs_diff(&p.kron(p).scale_real(0.5)) < 1e-12
                || k.max_abs_diff(&p.kron(p).scale_real(-0.5)) < 1e-12);
        assert!(hit);
    }
}

#[test]
fn boundary_channel_matches_partial_trace() {
    let m = paulitwirl(&haar_unitary(2, 7).unwrap()).unwrap();
    let (e, f) = m.site_channels().unwrap();
    let rho = DensityOperator::new(random_state(4, 13), m.isometry().in_layout().clone()).unwrap();
    let full = m.isometry().as_channel().apply(&rho).unwrap();
    let b = full.partial_trace(&["B"]).unwrap();
    let env = full.partial_trace(&["E"]).unwrap();
    assert!(e.apply(&rho).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-10);
    assert!(f.apply(&rho).unwrap().matrix().max_abs_diff(env.matrix()) < 1e-10);
}

#[test]
fn tilde_of_identity_leaves_half_pair() {
    let id = KrausChannel::identity(SubsystemLayout::new([("L", 2), ("R", 2)]).unwrap());
    let t = tilde(&id, 2).unwrap();
    assert_eq!((t.in_dim(), t.out_dim()), (2, 8));
    let out = t.apply(&ket0().relabel("Q", "C").unwrap().with_dims_of(&t)).unwrap();
    let c = out.partial_trace(&["C"]).unwrap();
    assert!(c.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-12);
    let l = out.partial_trace(&["L"]).unwrap();
    assert!(l.matrix().max_abs_diff(&ComplexMatrix::unit(2, 2, 0, 0)) < 1e-12);
}

trait WithDims {
    fn with_dims_of(self, ch: &KrausChannel) -> DensityOperator;
}

impl WithDims for DensityOperator {
    fn with_dims_of(self, ch: &KrausChannel) -> DensityOperator {
        DensityOperator::new(self.into_matrix(), ch.in_layout().clone()).unwrap()
    }
}

#[test]
fn tilde_matches_explicit_pair() {
    // oracle: E(ρ ⊗ |ω><ω|) with the pair's second half kept aside as C
    let ch = random_channel(4, 3, 2, 31);
    let t = tilde(&ch, 2).unwrap();
    assert!(t.trace_preservation_deviation() < 1e-10);
    let rho = random_state(2, 32);
    let omega = max_entangled(2).unwrap().to_density();
    let input = rho.kron(omega.matrix());
    // input order: L, R, C'; E acts on (L, R)
    let wide = ch.kraus().iter().map(|k| k.kron(&ComplexMatrix::identity(2)));
    let mut expected = ComplexMatrix::zeros(6, 6);
    for k in wide {
        expected += &k.matmul(&input).matmul(&k.adjoint());
    }
    assert!(t.apply_matrix(&rho).unwrap().max_abs_diff(&expected) < 1e-12);
    assert!(tilde(&ch, 3).is_err());
}

#[test]
fn twirl_tilde_dimensions() {
    let m = paulitwirl(&ComplexMatrix::identity(2)).unwrap();
    let t = m.tilde_e().unwrap();
    assert_eq!((t.in_dim(), t.out_dim()), (2, 8));
    let t2 = iterate_tilde(&t, 2, &Caps::default()).unwrap();
    assert_eq!(t2.out_dim(), 32);
    assert_eq!(t2.out_layout().labels(), vec!["B1", "B2", "C"]);
}

#[test]
fn iterate_once_is_tilde() {
    let m = paulitwirl(&haar_unitary(2, 3).unwrap()).unwrap();
    let t = m.tilde_e().unwrap();
    let t1 = iterate_tilde(&t, 1, &Caps::default()).unwrap();
    let rho = random_state(2, 4);
    assert!(t1
        .apply_matrix(&rho)
        .unwrap()
        .max_abs_diff(&t.apply_matrix(&rho).unwrap())
        < 1e-14);
    assert!(iterate_tilde(&t, 0, &Caps::default()).is_err());
}

#[test]
fn iterate_matches_repeated_application() {
    let m = paulitwirl(&haar_unitary(2, 5).unwrap()).unwrap();
    let t = m.tilde_e().unwrap();
    let t3 = iterate_tilde(&t, 3, &Caps::default()).unwrap();
    let rho = random_state(2, 6);
    // oracle: apply Ẽ to C, then to the new C, keeping earlier B blocks in front
    let mut acc = rho.clone();
    let mut front = 1;
    for _ in 0..3 {
        let mut next = ComplexMatrix::zeros(front * 8, front * 8);
        for k in t.kraus() {
            let wide = ComplexMatrix::identity(front).kron(k);
            next += &wide.matmul(&acc).matmul(&wide.adjoint());
        }
        acc = next;
        front *= 4;
    }
    assert!(t3.apply_matrix(&rho).unwrap().max_abs_diff(&acc) < 1e-10);
}

#[test]
fn iterate_respects_cap() {
    let m = paulitwirl(&ComplexMatrix::identity(2)).unwrap();
    let t = m.tilde_e().unwrap();
    let caps = Caps { max_amplitudes: 1000 };
    assert!(matches!(
        iterate_tilde(&t, 3, &caps),
        Err(LabError::ResourceCap { .. })
    ));
}

#[test]
fn isometry_rejects_non_isometry() {
    let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.5]]);
    assert!(Isometry::new(m, qubit(), qubit()).is_err());
}

#[test]
fn apply_on_middle_factor() {
    let [_, x, _, _] = paulis();
    let layout = SubsystemLayout::new([("a", 2), ("b", 2), ("c", 2)]).unwrap();
    let rho = DensityOperator::new(random_state(8, 44), layout).unwrap();
    let ch = KrausChannel::unitary(x.clone(), SubsystemLayout::single("b", 2).unwrap()).unwrap();
    let out = ch.apply_on(&rho, &["b"], &Caps::default()).unwrap();
    let full = ComplexMatrix::identity(2).kron(&x).kron(&ComplexMatrix::identity(2));
    let expected = full.matmul(rho.matrix()).matmul(&full);
    assert!(out.matrix().max_abs_diff(&expected) < 1e-12);
    assert_eq!(out.layout().labels(), vec!["a", "b", "c"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adjoint_duality(seed in 0u64..10_000, din in 1usize..4, dout in 1usize..4, k in 1usize..4) {
        let ch = random_channel(din, dout, k, seed);
        let rho = random_state(din, seed + 1);
        let o = random_hermitian(dout, seed + 2);
        let lhs = o.hs_inner(&ch.apply_matrix(&rho).unwrap());
        let rhs = ch.adjoint_apply(&o).unwrap().hs_inner(&rho);
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn channel_outputs_are_states(seed in 0u64..10_000, k in 1usize..5) {
        let ch = random_channel(3, 2, k, seed);
        let rho = DensityOperator::new(random_state(3, seed), ch.in_layout().clone()).unwrap();
        prop_assert!(ch.apply(&rho).is_ok());
    }

    #[test]
    fn tilde_is_trace_preserving(seed in 0u64..10_000, k in 1usize..4) {
        let ch = random_channel(4, 2, k, seed);
        prop_assert!(tilde(&ch, 2).unwrap().trace_preservation_deviation() < 1e-10);
    }

    #[test]
    fn dilation_round_trip(seed in 0u64..10_000, k in 1usize..4) {
        // boundary channels of the dilation reproduce the channel and its complement
        let ch = random_channel(2, 3, k, seed);
        let v = stinespring(&ch).unwrap();
        let (e, f) = boundary_channels(&v, &["O"], &["Env"]).unwrap();
        let comp = complementary(&ch).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let x = ComplexMatrix::unit(2, 2, r, c);
                prop_assert!(e.apply_matrix(&x).unwrap().max_abs_diff(&ch.apply_matrix(&x).unwrap()) < 1e-10);
                prop_assert!(f.apply_matrix(&x).unwrap().max_abs_diff(&comp.apply_matrix(&x).unwrap()) < 1e-10);
            }
        }
    }
}
