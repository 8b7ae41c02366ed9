use proptest::prelude::*;

use super::*;
use crate::algebra::{block_decomposition, commutant, OperatorAlgebra};
use crate::channel::iterate_tilde;
use crate::models::{identity_to_b, paulitwirl, product_trivial, random_isometry};
use crate::tensor::{haar_unitary, max_entangled, ComplexMatrix};

fn twirl(seed: Option<u64>) -> ChainModel {
    let u = match seed {
        Some(s) => haar_unitary(2, s).unwrap(),
        None => ComplexMatrix::identity(2),
    };
    paulitwirl(&u).unwrap()
}

fn diag_state(p: &[f64], layout: SubsystemLayout) -> DensityOperator {
    let diag: Vec<C64> = p.iter().map(|&x| C64::new(x, 0.0)).collect();
    DensityOperator::new(ComplexMatrix::from_diagonal(&diag), layout).unwrap()
}

fn three_qubits() -> SubsystemLayout {
    SubsystemLayout::new([("a", 2), ("b", 2), ("c", 2)]).unwrap()
}

#[test]
fn zero_sites_is_the_pair() {
    let s = build_open_chain(&twirl(None), 0).unwrap();
    let omega = max_entangled(2).unwrap();
    assert_eq!(s.psi().layout().labels(), vec!["A1", "C"]);
    assert_eq!(s.psi().amplitudes(), omega.amplitudes());
}

#[test]
fn one_site_twirl_chain() {
    let s = build_open_chain(&twirl(None), 1).unwrap();
    assert_eq!(s.psi().layout().dims(), vec![2, 4, 4, 2]);
    assert_eq!(s.psi().layout().total_dim(), 64);
    assert!((s.psi().region_entropy(&["A1"]).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn rho_two_matches_iterated_tilde() {
    let m = twirl(Some(5));
    let s = build_open_chain(&m, 2).unwrap();
    let t2 = iterate_tilde(&m.tilde_e().unwrap(), 2, m.caps()).unwrap();
    // oracle: (id_A1 ⊗ Ẽ^(2))(ω_D)
    let omega = max_entangled(2).unwrap().to_density();
    let mut expected = ComplexMatrix::zeros(2 * t2.out_dim(), 2 * t2.out_dim());
    for k in t2.kraus() {
        let wide = ComplexMatrix::identity(2).kron(k);
        expected += &wide.matmul(omega.matrix()).matmul(&wide.adjoint());
    }
    assert!(s.rho().unwrap().matrix().max_abs_diff(&expected) < 1e-10);
}

#[test]
fn sigma_matches_iterated_complement() {
    let m = twirl(Some(6));
    let s = build_open_chain(&m, 2).unwrap();
    let t2 = iterate_tilde(&m.tilde_f().unwrap(), 2, m.caps()).unwrap();
    let omega = max_entangled(2).unwrap().to_density();
    let mut expected = ComplexMatrix::zeros(2 * t2.out_dim(), 2 * t2.out_dim());
    for k in t2.kraus() {
        let wide = ComplexMatrix::identity(2).kron(k);
        expected += &wide.matmul(omega.matrix()).matmul(&wide.adjoint());
    }
    assert!(s.sigma().unwrap().matrix().max_abs_diff(&expected) < 1e-10);
}

#[test]
fn open_chain_cap() {
    let m = twirl(None).with_caps(Caps { max_amplitudes: 100 });
    assert!(matches!(build_open_chain(&m, 2), Err(LabError::ResourceCap { .. })));
}

#[test]
fn identity_ring_entropy() {
    // the stabilizer count gives 2l - 2 = 4 bits at l = 3
    let s = ring_entropy(&twirl(None), 3).unwrap();
    assert!((s - 4.0).abs() < 1e-9, "{s}");
}

#[test]
fn ring_sites_are_maximally_mixed() {
    let rho = build_closed_chain(&twirl(Some(2)), 3, RingKeep::B).unwrap();
    for k in 1..=3 {
        let site = rho.partial_trace(&[format!("B{k}")]).unwrap();
        assert!(site.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-9);
    }
}

#[test]
fn ring_routes_agree() {
    let m = twirl(Some(3));
    let b = build_closed_chain(&m, 2, RingKeep::B).unwrap();
    let be = build_closed_chain(&m, 2, RingKeep::BAndE).unwrap();
    assert!((be.entropy().unwrap()).abs() < 1e-9);
    let reduced = be.partial_trace(&["B1", "B2"]).unwrap();
    assert!(reduced.matrix().max_abs_diff(b.matrix()) < 1e-10);
}

#[test]
fn ring_rejects_short_and_large() {
    assert!(build_closed_chain(&twirl(None), 1, RingKeep::B).is_err());
    let m = twirl(None).with_caps(Caps { max_amplitudes: 1 << 10 });
    assert!(matches!(
        build_closed_chain(&m, 4, RingKeep::B),
        Err(LabError::ResourceCap { .. })
    ));
}

#[test]
fn ring_extensivity_for_identity() {
    let s3 = ring_entropy(&twirl(None), 3).unwrap();
    let s4 = ring_entropy(&twirl(None), 4).unwrap();
    assert!((s4 - s3 - 2.0).abs() < 1e-6);
}

#[test]
fn product_state_has_no_cmi() {
    let a = diag_state(&[0.3, 0.7], SubsystemLayout::single("a", 2).unwrap());
    let b = diag_state(&[0.6, 0.4], SubsystemLayout::single("b", 2).unwrap());
    let c = diag_state(&[0.1, 0.9], SubsystemLayout::single("c", 2).unwrap());
    let rho = a.tensor(&b).unwrap().tensor(&c).unwrap();
    assert!(cmi(&rho, &["a"], &["b"], &["c"]).unwrap().value.abs() < 1e-9);
}

#[test]
fn classical_copy_has_no_cmi() {
    let mut p = vec![0.0; 8];
    p[0] = 0.5;
    p[7] = 0.5;
    let rho = diag_state(&p, three_qubits());
    let r = cmi(&rho, &["a"], &["b"], &["c"]).unwrap();
    assert!(r.value.abs() < 1e-9);
    let c = r.components.unwrap();
    assert!((c.s_ab - 1.0).abs() < 1e-12 && (c.s_abc - 1.0).abs() < 1e-12);
}

#[test]
fn cmi_rejects_overlap() {
    let rho = DensityOperator::maximally_mixed(three_qubits());
    assert!(cmi(&rho, &["a"], &["a", "b"], &["c"]).is_err());
}

#[test]
fn twirl_cmi_is_two() {
    for seed in [None, Some(7)] {
        let s = build_open_chain(&twirl(seed), 1).unwrap();
        let r = chain_cmi(&s).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        assert_eq!(r.method, CmiMethod::BruteForce);
    }
}

#[test]
fn twirl_saturates() {
    let r = saturation_check(&twirl(Some(1)), &Tolerances::default()).unwrap();
    assert!((r.cmi_n1 - 2.0).abs() < 1e-9 && (r.cmi_n2 - 2.0).abs() < 1e-9);
    assert!(r.cmi_saturated && r.mi_bc_saturated && r.mi_b_saturated && r.mi_ec_saturated);
    assert!(r.equivalences_hold);
}

#[test]
fn embedding_saturates_at_zero() {
    let r = saturation_check(&identity_to_b(2).unwrap(), &Tolerances::default()).unwrap();
    assert!(r.cmi_n1.abs() < 1e-9);
    for x in [r.cmi_residual, r.mi_bc_residual, r.mi_b_residual, r.mi_ec_residual] {
        assert!(x.abs() < 1e-9);
    }
}

#[test]
fn random_isometry_breaks_saturation_consistently() {
    let r = saturation_check(&random_isometry(2, 4, 2, 3).unwrap(), &Tolerances::default()).unwrap();
    assert!(!r.cmi_saturated);
    assert!(!r.mi_bc_saturated || !r.mi_b_saturated);
    assert!(r.equivalences_hold);
}

#[test]
fn formula_examples() {
    let bd = |b: Vec<(usize, usize)>| BlockDecomposition::from_blocks(b).unwrap();
    assert!((cmi_formula(&bd(vec![(2, 1)]), &bd(vec![(2, 1)]), 2).unwrap() - 2.0).abs() < 1e-12);
    assert!(cmi_formula(&bd(vec![(4, 1)]), &bd(vec![(1, 4)]), 4).unwrap().abs() < 1e-12);
    assert!((cmi_formula(&bd(vec![(4, 1)]), &bd(vec![(4, 1)]), 4).unwrap() - 4.0).abs() < 1e-12);
    assert!(cmi_formula(&bd(vec![(2, 1)]), &bd(vec![(2, 1)]), 4).is_err());
}

#[test]
fn formula_matches_two_copies_by_brute_force() {
    // two independent twirl copies: D = 4 and A = B = M_4
    let m = twirl(None);
    let v = m.isometry().matrix();
    // (L1 R1)(L2 R2) -> (B1 E1)(B2 E2), regrouped to (L1 L2)(R1 R2) -> (B1 B2)(E1 E2)
    let big = v.kron(v);
    let w = ComplexMatrix::from_fn(256, 16, |row, col| {
        let (b1, b2, e1, e2) = (row / 64, (row / 16) % 4, (row / 4) % 4, row % 4);
        let (l1, l2, r1, r2) = (col / 8, (col / 4) % 2, (col / 2) % 2, col % 2);
        big.get((b1 * 4 + e1) * 16 + b2 * 4 + e2, (l1 * 2 + r1) * 4 + l2 * 2 + r2)
    });
    let v2 = crate::channel::Isometry::new(
        w,
        SubsystemLayout::new([("L", 4), ("R", 4)]).unwrap(),
        SubsystemLayout::new([("B", 16), ("E", 16)]).unwrap(),
    )
    .unwrap();
    let doubled = ChainModel::new(v2, &["B"], &["E"], Caps::default()).unwrap();
    let s = build_open_chain(&doubled, 1).unwrap();
    assert!((chain_cmi(&s).unwrap().value - 4.0).abs() < 1e-9);
}

#[test]
fn coherent_information_extremes() {
    let d = 3;
    let full = coherent_information(&OperatorAlgebra::full(d), d).unwrap();
    let scalars = coherent_information(&OperatorAlgebra::scalars(d), d).unwrap();
    assert!((full - (d as f64).log2()).abs() < 1e-10);
    assert!((scalars + (d as f64).log2()).abs() < 1e-10);
}

#[test]
fn omega_states() {
    let omega = max_entangled(3).unwrap().to_density();
    let full = omega_a_state(&OperatorAlgebra::full(3), 3).unwrap();
    assert!(full.matrix().max_abs_diff(omega.matrix()) < 1e-12);
    let sc = omega_a_state(&OperatorAlgebra::scalars(3), 3).unwrap();
    assert!(sc.matrix().max_abs_diff(&ComplexMatrix::identity(9).scale_real(1.0 / 9.0)) < 1e-12);
    // M_2 ⊗ I_2 in D = 4 gives ω_2 ⊗ I/2 ⊗ I/2 up to ordering: four eigenvalues 1/4
    let alg = OperatorAlgebra::full(2).tensor(&OperatorAlgebra::scalars(2));
    let w = omega_a_state(&alg, 4).unwrap();
    let mut ev = w.matrix().hermitian_eigenvalues().unwrap();
    ev.reverse();
    for (i, x) in ev.iter().enumerate() {
        let want = if i < 4 { 0.25 } else { 0.0 };
        assert!((x - want).abs() < 1e-10, "{ev:?}");
    }
    // and its coherent information is log2(n/n') = 0
    assert!(coherent_information(&alg, 4).unwrap().abs() < 1e-10);
}

#[test]
fn coherent_route_for_twirl() {
    let r = coherent_information_route(&twirl(Some(9)), &Tolerances::default()).unwrap();
    assert!((r.value - 2.0).abs() < 1e-9);
    assert!(coherent_information_route(&product_trivial().unwrap(), &Tolerances::default()).is_err());
}

#[test]
fn fit_is_exact_on_a_line() {
    let (c0, res) = fit_c0(&[(3, 4.5), (4, 6.5), (5, 8.5)]);
    assert!((c0 - 1.5).abs() < 1e-12 && res < 1e-12);
    let (_, res) = fit_c0(&[(3, 4.0), (4, 6.5)]);
    assert!((res - 0.25).abs() < 1e-12);
}

#[test]
fn chain_model_validates() {
    let v = twirl(None).original_isometry().clone();
    assert!(ChainModel::new(v.clone(), &["Bl"], &["E"], Caps::default()).is_err());
    assert!(ChainModel::new(v, &["Bl", "Br"], &["Br", "E"], Caps::default()).is_err());
}

fn purity_and_positivity(m: &ChainModel) {
    let s1 = build_open_chain(m, 1).unwrap();
    let s2 = build_open_chain(m, 2).unwrap();
    let p = s1.psi();
    assert!(p.region_entropy(&["A1", "B1", "E1", "C"]).unwrap().abs() < 1e-9);
    let left = p.region_entropy(&["B1"]).unwrap();
    let right = p.region_entropy(&["A1", "E1", "C"]).unwrap();
    assert!((left - right).abs() < 1e-9);
    let c1 = chain_cmi(&s1).unwrap().value;
    let c2 = chain_cmi(&s2).unwrap().value;
    assert!(c1 >= -1e-8 && c2 >= -1e-8);
    assert!(c2 <= c1 + 1e-8, "cmi grew from {c1} to {c2}");
}

#[test]
fn formula_agrees_with_brute_force() {
    for m in [twirl(None), twirl(Some(4)), identity_to_b(2).unwrap()] {
        let tol = Tolerances::default();
        let dual = crate::algebra::dual_complementarity_check(&m, &tol).unwrap();
        assert!(dual.pass);
        let a = block_decomposition(&dual.a).unwrap();
        let b = block_decomposition(&dual.b).unwrap();
        let f = cmi_formula(&a, &b, m.bond_dim()).unwrap();
        let brute = chain_cmi(&build_open_chain(&m, 1).unwrap()).unwrap().value;
        assert!((f - brute).abs() < 1e-9);
        let coh = coherent_information_route(&m, &tol).unwrap().value;
        assert!((coh - f).abs() < 1e-9);
        // positivity iff B' is strictly inside A
        let b_prime = commutant(&dual.b).unwrap();
        let strict = dual.a.containment_residual(&b_prime) < 1e-8 && b_prime.dim() < dual.a.dim();
        assert_eq!(f > 1e-9, strict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_chains_obey_purity_and_monotonicity(seed in 0u64..10_000, e in 1usize..4) {
        purity_and_positivity(&random_isometry(2, 4, e, seed).unwrap());
    }

    #[test]
    fn twirl_chains_obey_purity_and_monotonicity(seed in 0u64..10_000) {
        purity_and_positivity(&twirl(Some(seed)));
    }
}
