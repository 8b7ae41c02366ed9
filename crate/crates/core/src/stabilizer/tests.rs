use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::{
    algebra_saturation_check, correctable_algebra, dual_complementarity_check, logical_operators,
};
use crate::chain::{build_closed_chain, build_open_chain, chain_cmi, RingKeep};
use crate::error::LabError;
use crate::models::paulitwirl;
use crate::tensor::{ComplexMatrix, DensityOperator, SubsystemLayout};
use crate::tol::{Caps, Tolerances};

fn dense_cmi(v: &StabilizerIsometry) -> f64 {
    let model = v.to_chain_model(Caps::default()).unwrap();
    chain_cmi(&build_open_chain(&model, 1).unwrap()).unwrap().value
}

fn random_encoder(rng: &mut ChaCha8Rng, max_k: usize) -> StabilizerIsometry {
    let k = rng.random_range(1..=max_k);
    let n = 2 * k + rng.random_range(0..=2);
    let n_b = rng.random_range(1..n);
    StabilizerIsometry::random(k, n_b, n - n_b, rng).unwrap()
}

#[test]
fn twirl_tableau_matches_the_dense_twirl() {
    let v = builtin("twirl").unwrap();
    let gf = v.to_chain_model(Caps::default()).unwrap();
    let dense = paulitwirl(&ComplexMatrix::identity(2)).unwrap();
    let (e1, _) = gf.site_channels().unwrap();
    let (e2, _) = dense.site_channels().unwrap();
    for seed in 0..4 {
        let x = crate::tensor::haar_unitary(4, seed).unwrap();
        let a = e1.apply_matrix(&x).unwrap();
        let b = e2.apply_matrix(&x).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }
}

#[test]
fn dense_encoder_satisfies_the_logical_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let v = random_encoder(&mut rng, 2);
        let iso = v.to_isometry().unwrap();
        let w = iso.matrix();
        assert!(w.isometry_deviation() < 1e-12);
        let m = 2 * v.k();
        for i in 0..m {
            for (kind, img) in [('X', &v.logical_x()[i]), ('Z', &v.logical_z()[i])] {
                let p = PauliOperator::single(m, i, kind).to_matrix();
                let lhs = w.matmul(&p);
                let rhs = img.to_matrix().matmul(w);
                assert!(lhs.max_abs_diff(&rhs) < 1e-12, "{kind}{i}");
            }
        }
        for s in v.stabilizers() {
            assert!(s.to_matrix().matmul(w).max_abs_diff(w) < 1e-12);
        }
    }
}

#[test]
fn chain_state_matches_dense_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let v = random_encoder(&mut rng, 1);
        let psi = chain_state(&v, 2).unwrap();
        let dense = psi.to_dense();
        for g in psi.generators() {
            let gv = g.apply_to(&dense);
            let diff: f64 = gv.iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12);
        }
        let model = v.to_chain_model(Caps::default()).unwrap();
        let phi = build_open_chain(&model, 2).unwrap();
        for region in [vec!["A1"], vec!["B1"], vec!["B1", "C"], vec!["A1", "B2"], vec!["E1", "E2"]] {
            let s_gf = psi.entropy_of(&region).unwrap() as f64;
            let s_dense = phi.psi().reduce(&region).unwrap().entropy().unwrap();
            assert!((s_gf - s_dense).abs() < 1e-9, "{region:?}: {s_gf} vs {s_dense}");
        }
    }
}

#[test]
fn twirl_logical_x_lives_on_b_and_c() {
    let v = builtin("twirl").unwrap();
    let en = logical_pauli_enumeration(&v, &["B", "C"]).unwrap();
    assert_eq!(en.qubits, ["Bl", "Br", "E0", "E1", "C"]);
    assert_eq!(en.count, 2);
    let x = en
        .logicals
        .iter()
        .find(|l| l.input.to_string() == "+X")
        .expect("X is a logical on B C");
    assert_eq!(x.representative.to_string(), "+XXIIX");

    // the dense solver finds the same operator
    let model = paulitwirl(&ComplexMatrix::identity(2)).unwrap();
    let [_, px, _, _] = crate::tensor::paulis();
    let sol = logical_operators(&model, &px, 1, &["B1", "C"], &Tolerances::default()).unwrap();
    let rep = x.representative.select(&[0, 1, 4]).to_matrix();
    assert!(sol.particular.max_abs_diff(&rep) < 1e-9);
}

#[test]
fn full_support_gives_all_logicals() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let v = random_encoder(&mut rng, 2);
        let en = logical_pauli_enumeration(&v, &["B", "E", "C"]).unwrap();
        assert_eq!(en.count, 2 * v.k());
    }
    let v = builtin("identity").unwrap();
    assert_eq!(logical_pauli_enumeration(&v, &["C"]).unwrap().count, 0);
    assert!(matches!(
        logical_pauli_enumeration(&v, &["Q"]),
        Err(LabError::UnknownLabel(_))
    ));
}

#[test]
fn algebra_table_examples() {
    use TableColumn::*;
    let t = algebra_table(&builtin("twirl").unwrap()).unwrap();
    assert_eq!((t.l, t.m), (0, 1));
    assert_eq!(t.columns, [ZAndX]);
    assert_eq!(t.blocks(), [(2, 1)]);

    let t = algebra_table(&builtin("identity").unwrap()).unwrap();
    assert_eq!(t.columns, [ZAndX]);
    assert_eq!(t.commutant().columns, [Neither]);
    assert_eq!(t.commutant_columns(), [Neither]);

    let t = algebra_table(&builtin("discard").unwrap()).unwrap();
    assert_eq!(t.columns, [Neither]);
    assert_eq!(t.algebra_dim(), 1);

    // B of the cluster encoder is generated by X alone
    let t = algebra_table_on(&builtin("cluster").unwrap(), &["E", "C"]).unwrap();
    assert_eq!(t.columns, [ZOnly]);
    assert_eq!(t.commutant_columns(), [ZOnly]);
    assert_eq!(t.blocks(), [(1, 1), (1, 1)]);
}

#[test]
fn spt_verdicts_of_builtins() {
    let twirl = spt_detect(&builtin("twirl").unwrap()).unwrap();
    assert!(twirl.nontrivial);
    assert_eq!(twirl.witness_paulis.len(), 2);
    assert!(!twirl.witness_paulis[0].commutes(&twirl.witness_paulis[1]));
    assert_eq!((twirl.g_bc, twirl.g_e, twirl.k), (2, 0, 1));
    let json = serde_json::to_value(&twirl).unwrap();
    for key in ["nontrivial", "witness_paulis", "g_BC", "g_E", "K"] {
        assert!(json.get(key).is_some(), "{key}");
    }

    let id = spt_detect(&builtin("identity").unwrap()).unwrap();
    assert!(!id.nontrivial);
    assert!(id.witness_paulis.is_empty());
    assert!(dense_cmi(&builtin("identity").unwrap()).abs() < 1e-9);

    let cluster = builtin("cluster").unwrap();
    assert!(spt_detect(&cluster).unwrap().nontrivial);
    assert!((dense_cmi(&cluster) - 1.0).abs() < 1e-9);
    assert_eq!(stabilizer_cmi(&cluster, 1).unwrap(), 1);

    assert!(!spt_detect(&builtin("discard").unwrap()).unwrap().nontrivial);
    assert!((dense_cmi(&builtin("twirl").unwrap()) - 2.0).abs() < 1e-9);
}

#[test]
fn ring_entropy_of_the_twirl() {
    let v = builtin("twirl").unwrap();
    assert_eq!(stabilizer_entropy(&v, 3, &["B"]).unwrap(), 4);
    assert_eq!(stabilizer_entropy(&v, 3, &["B2"]).unwrap(), 2);
    assert_eq!(stabilizer_entropy::<&str>(&v, 3, &[]).unwrap(), 0);
    for l in 3..=6 {
        assert_eq!(stabilizer_entropy(&v, l, &["B"]).unwrap(), 2 * l - 2);
    }
    let model = paulitwirl(&ComplexMatrix::identity(2)).unwrap();
    let dense = build_closed_chain(&model, 3, RingKeep::B).unwrap();
    assert!((dense.entropy().unwrap() - 4.0).abs() < 1e-9);
    let one = dense.partial_trace(&["B1", "B3"]).unwrap().entropy().unwrap();
    assert!((stabilizer_entropy(&v, 3, &["B1", "B3"]).unwrap() as f64 - one).abs() < 1e-9);
}

#[test]
fn ring_entropies_match_dense_rings() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..6 {
        let v = random_encoder(&mut rng, 1);
        let model = v.to_chain_model(Caps::default()).unwrap();
        let l = 3;
        if v.num_outputs() * l > 12 {
            continue;
        }
        let rho = build_closed_chain(&model, l, RingKeep::BAndE).unwrap();
        for region in [vec!["B1"], vec!["B1", "B2", "B3"], vec!["B1", "E2"], vec!["E1", "E3", "B2"]] {
            let s = rho.partial_trace(&region).unwrap().entropy().unwrap();
            let g = stabilizer_entropy(&v, l, &region).unwrap() as f64;
            assert!((s - g).abs() < 1e-9, "{region:?}: {s} vs {g}");
        }
    }
}

#[test]
fn tableau_text_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut encoders: Vec<StabilizerIsometry> = BUILTIN_NAMES.iter().map(|n| builtin(n).unwrap()).collect();
    encoders.extend((0..5).map(|_| random_encoder(&mut rng, 2)));
    for v in encoders {
        let text = v.to_tableau_text();
        let back = StabilizerIsometry::parse_tableau(&text).unwrap();
        assert_eq!(back.b_labels(), v.b_labels());
        assert_eq!(back.e_labels(), v.e_labels());
        // same isometry up to a global phase
        let (a, b) = (v.to_isometry().unwrap(), back.to_isometry().unwrap());
        let overlap = a.matrix().hs_inner(b.matrix()).norm();
        assert!((overlap - (a.matrix().cols() as f64)).abs() < 1e-9, "{text}");
        assert_eq!(back.to_tableau_text(), StabilizerIsometry::parse_tableau(&back.to_tableau_text()).unwrap().to_tableau_text());
    }
}

#[test]
fn tableau_parse_errors_point_at_the_problem() {
    let good = builtin("identity").unwrap().to_tableau_text();
    let at = |text: &str| match StabilizerIsometry::parse_tableau(text) {
        Err(LabError::Parse { line, column, .. }) => (line, column),
        other => panic!("{other:?}"),
    };
    // bad letter on the fourth line, third character
    let mut lines: Vec<String> = good.lines().map(str::to_string).collect();
    lines[3] = lines[3].replacen('I', "Q", 1);
    let col = lines[3].find('Q').unwrap() + 1;
    assert_eq!(at(&lines.join("\n")), (4, col));

    let mut short: Vec<String> = good.lines().map(str::to_string).collect();
    short[4] = "+XX".into();
    assert_eq!(at(&short.join("\n")).0, 5);

    let mut anti: Vec<String> = good.lines().map(str::to_string).collect();
    anti[4] = "+ZIIII".into();
    anti[3] = "+XIIII".into();
    assert_eq!(at(&anti.join("\n")).0, 5);

    assert_eq!(at("+XX\n").0, 1);
    let missing: Vec<&str> = good.lines().take(6).collect();
    assert!(matches!(
        StabilizerIsometry::parse_tableau(&missing.join("\n")),
        Err(LabError::Parse { .. })
    ));
}

#[test]
fn invalid_encoders_are_rejected() {
    let x = |s: &str| s.parse::<PauliOperator>().unwrap();
    let labels = vec!["B".to_string(), "E".to_string()];
    // images that do not anticommute
    let bad = StabilizerIsometry::new(1, labels.clone(), vec![0], vec![x("XI"), x("IX")], vec![x("XI"), x("IZ")], vec![]);
    assert!(bad.is_err());
    let ok = StabilizerIsometry::new(1, labels, vec![0], vec![x("XI"), x("IX")], vec![x("ZI"), x("IZ")], vec![]);
    assert!(ok.is_ok());
}

/// The exact engine against the dense one on random Clifford encoders.
#[test]
fn random_cliffords_agree_with_the_dense_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let tol = Tolerances::default();
    let mut nontrivial = 0;
    for _ in 0..24 {
        let v = random_encoder(&mut rng, 2);
        let k = v.k();
        let verdict = spt_detect(&v).unwrap();
        let g_e = logical_pauli_enumeration(&v, &["E"]).unwrap().count;
        assert_eq!(verdict.g_bc + g_e, 2 * k);
        assert_eq!(verdict.g_e, g_e);

        let model = v.to_chain_model(Caps::default()).unwrap();
        let dual = dual_complementarity_check(&model, &tol).unwrap();
        assert!(dual.pass);
        let ta = algebra_table(&v).unwrap();
        let tb = algebra_table_on(&v, &["E", "C"]).unwrap();
        assert!(ta.to_algebra().unwrap().span_distance(&dual.a) < 1e-9);
        assert!(tb.to_algebra().unwrap().span_distance(&dual.b) < 1e-9);
        assert_eq!(ta.algebra_dim() as usize, dual.a.dim());
        let numeric_a = correctable_algebra(&model.tilde_e().unwrap()).unwrap();
        assert!(numeric_a.span_distance(&ta.to_algebra().unwrap()) < 1e-9);

        let c = ta.commutant();
        assert_eq!(c.l, ta.l);
        assert_eq!(c.m - c.l, k - ta.m);

        let cmi = dense_cmi(&v);
        let exact = stabilizer_cmi(&v, 1).unwrap();
        assert!((cmi - exact as f64).abs() < 1e-9);
        assert_eq!(stabilizer_cmi_formula(&v).unwrap(), exact);
        assert_eq!(verdict.nontrivial, cmi > tol.cmi_positive);

        let sat = algebra_saturation_check(&model, 2, &tol).unwrap();
        assert_eq!(sat.pass, stabilizer_saturation(&v).unwrap().pass);
        nontrivial += verdict.nontrivial as usize;
    }
    assert!(nontrivial > 0);
}

#[test]
fn bell_pairs_are_maximally_entangled() {
    let psi = StabilizerState::bell_pairs(2, "A", "C");
    assert_eq!(psi.entropy_of(&["A"]).unwrap(), 2);
    assert_eq!(psi.entropy_of(&["A", "C"]).unwrap(), 0);
    assert_eq!(psi.entropy_of(&["A0", "C0"]).unwrap(), 0);
    let dense = psi.to_dense();
    let layout = SubsystemLayout::new([("A0", 2), ("A1", 2), ("C0", 2), ("C1", 2)]).unwrap();
    let sv = crate::tensor::StateVector::new(dense, layout).unwrap();
    let rho: DensityOperator = sv.reduce(&["A0", "C0"]).unwrap();
    assert!(rho.entropy().unwrap().abs() < 1e-9);
}


mod props {
    use proptest::prelude::*;

    use super::*;

    fn pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(letters, phase)| {
            let x = letters.iter().map(|&l| l == 1 || l == 2).collect();
            let z = letters.iter().map(|&l| l == 2 || l == 3).collect();
            PauliOperator::from_parts(x, z, phase)
        })
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in pauli(4), b in pauli(4), c in pauli(4)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn commutation_sign_is_symplectic(a in pauli(3), b in pauli(3)) {
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            let sign = if a.commutes(&b) { 0 } else { 2 };
            prop_assert_eq!(ab, ba.times_i(sign));
        }

        #[test]
        fn counting_identity_holds(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_encoder(&mut rng, 3);
            let bc = logical_pauli_enumeration(&v, &["B", "C"]).unwrap().count;
            let e = logical_pauli_enumeration(&v, &["E"]).unwrap().count;
            prop_assert_eq!(bc + e, 2 * v.k());
            let t = algebra_table(&v).unwrap();
            prop_assert_eq!(t.l + 2 * (t.m - t.l), bc);
        }

        #[test]
        fn conjugation_is_a_homomorphism(seed in 0u64..1000, a in pauli(3), b in pauli(3)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = Clifford::random(3, &mut rng);
            prop_assert_eq!(u.conjugate(&a.mul(&b)), u.conjugate(&a).mul(&u.conjugate(&b)));
        }
    }
}
