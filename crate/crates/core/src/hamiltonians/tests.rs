use super::*;
use crate::device::{apply_breakage, derive_params, reference_params};
use crate::layout::excitation_number;
use crate::units::{ghz, mhz, us};
use proptest::prelude::*;

fn sector(n: usize) -> Arc<CompositeBasis> {
    Layout::standard(n).unwrap().basis(Some(1)).unwrap()
}

fn full(n: usize) -> Arc<CompositeBasis> {
    Layout::standard(n).unwrap().basis(None).unwrap()
}

fn small_params(n: usize, b: f64) -> DeviceParams {
    let deltas: Vec<f64> = (1..=n).map(|j| ghz(-0.5 * j as f64)).collect();
    derive_params(&deltas, deltas[0].abs() / b, n, ghz(6.5), mhz(-400.0)).unwrap()
}

#[test]
fn wanted_term_count() {
    let p = reference_params(9.0).unwrap();
    let h = interaction_hamiltonian(&p, &sector(3)).unwrap();
    assert_eq!(h.len(), 24);
    assert!(h.pairing_complete());
    for side in [Side::Unprimed, Side::Primed] {
        assert_eq!(h.count(Family::Qubit(side)), 6);
        assert_eq!(h.count(Family::Coupler(side)), 6);
    }
}

#[test]
fn wanted_hamiltonian_hermitian_on_full_basis() {
    let p = small_params(2, 9.0);
    let h = interaction_hamiltonian(&p, &full(2)).unwrap();
    assert_eq!(h.len(), 16);
    assert!(h.evaluate(0.0).is_hermitian(1e-12));
}

#[test]
fn jaynes_cummings_matrix_element() {
    let p = reference_params(9.0).unwrap();
    for basis in [sector(3), full(1)] {
        let p = if basis.dim() == 14 { p.clone() } else { small_params(1, 9.0) };
        let h = interaction_hamiltonian(&p, &basis).unwrap().evaluate(0.0);
        let excited = basis.index_with(&[("q1", 1)]).unwrap().unwrap();
        let photon = basis.index_with(&[("c1", 1)]).unwrap().unwrap();
        // two-mode block: <1,0| g(a σ⁺ + a⁺ σ⁻) |0,1> = g
        assert!((h.get(excited, photon) - C64::new(p.g[0], 0.0)).norm() < 1e-6);
        assert_eq!(h.get(excited, photon), C64::new(p.g[0], 0.0));
        assert_eq!(h.get(photon, excited), C64::new(p.g[0], 0.0));
    }
}

#[test]
fn phases_follow_detunings() {
    let p = reference_params(9.0).unwrap();
    let basis = sector(3);
    let h = interaction_hamiltonian(&p, &basis).unwrap();
    let t = 1.234e-9;
    let excited = basis.index_with(&[("q2'", 1)]).unwrap().unwrap();
    let photon = basis.index_with(&[("c2'", 1)]).unwrap().unwrap();
    let expect = C64::from_polar(p.g[4], p.delta(4) * t);
    assert!((h.evaluate(t).get(excited, photon) - expect).norm() < 1e-6 * p.g[4]);
    let coupler = basis.index_with(&[("qA", 1)]).unwrap().unwrap();
    let expect = C64::from_polar(p.g_coupler[4], p.delta_coupler(4) * t);
    assert!((h.evaluate(t).get(coupler, photon) - expect).norm() < 1e-6 * p.g[4]);
}

#[test]
fn crosstalk_family_counts() {
    let mut p = reference_params(9.0).unwrap();
    let basis = sector(3);
    assert_eq!(unwanted_hamiltonian(&p, &basis).unwrap().count(Family::Crosstalk), 0);
    p.set_uniform_crosstalk(0.01 * p.g_max());
    let theta = unwanted_hamiltonian(&p, &basis).unwrap();
    assert_eq!(theta.count(Family::Crosstalk), 30);
    assert!(theta.pairing_complete());
    // Δ_kl = ω_k − ω_l enters as e^{−iΔt} on a_k a_l⁺
    let t = 0.7e-9;
    let (k, l) = (0, 2);
    let from = basis.index_with(&[("c1", 1)]).unwrap().unwrap();
    let to = basis.index_with(&[("c3", 1)]).unwrap().unwrap();
    let expect = C64::from_polar(0.01 * p.g_max(), -p.cavity_difference(k, l) * t);
    assert!((theta.evaluate(t).get(to, from) - expect).norm() < 1e-9 * p.g_max());
}

#[test]
fn two_photon_terms_vanish_in_single_excitation_sector() {
    let p = reference_params(9.0).unwrap();
    let theta = unwanted_hamiltonian(&p, &sector(3)).unwrap();
    let mut seen = 0;
    for t in theta.terms() {
        if matches!(t.family, Family::QubitTwoPhoton(_) | Family::CouplerTwoPhoton(_)) {
            assert!(t.op.is_zero());
            seen += 1;
        }
    }
    assert_eq!(seen, 24);
    let theta_full = unwanted_hamiltonian(&small_params(1, 9.0), &full(1)).unwrap();
    assert!(theta_full.terms().iter().all(|t| !t.op.is_zero()));
}

#[test]
fn two_level_qutrits_skip_two_photon_families() {
    let basis = Layout::new(1, 2, 2).unwrap().basis(None).unwrap();
    let mut p = small_params(1, 9.0);
    p.set_uniform_crosstalk(mhz(1.0));
    let theta = unwanted_hamiltonian(&p, &basis).unwrap();
    assert_eq!(theta.len(), 2);
    assert_eq!(theta.count(Family::Crosstalk), 2);
}

#[test]
fn full_minus_unwanted_is_wanted() {
    let mut p = reference_params(9.0).unwrap();
    p.set_uniform_crosstalk(0.1 * p.g_max());
    let basis = sector(3);
    let h = full_interaction_hamiltonian(&p, &basis).unwrap();
    let wanted = interaction_hamiltonian(&p, &basis).unwrap();
    assert_eq!(h.len(), wanted.len() + unwanted_hamiltonian(&p, &basis).unwrap().len());
    let stripped = h.filter_families(|f| !f.is_unwanted());
    assert!(stripped.pairing_complete());
    assert_eq!(stripped.len(), wanted.len());
    for (a, b) in stripped.terms().iter().zip(wanted.terms()) {
        assert_eq!(a.family, b.family);
        assert_eq!(a.coeff, b.coeff);
        assert_eq!(a.nu, b.nu);
        assert_eq!(a.op, b.op);
        assert_eq!(a.partner, b.partner);
    }
}

#[test]
fn full_hamiltonian_hermitian_at_sample_times() {
    let mut p = reference_params(9.0).unwrap();
    p.set_uniform_crosstalk(0.01 * p.g_max());
    let h = full_interaction_hamiltonian(&p, &sector(3)).unwrap();
    for t in [0.0, us(0.01), us(0.081)] {
        let ht = h.evaluate(t);
        assert!(ht.hermiticity_error() <= 1e-12 * ht.max_abs(), "t = {t}");
    }
}

#[test]
fn excitation_number_is_conserved_termwise() {
    for n in [1, 2] {
        let basis = full(n);
        let mut p = small_params(n, 7.0);
        p.set_uniform_crosstalk(0.1 * p.g_max());
        let number = excitation_number(&basis).unwrap();
        let h = full_interaction_hamiltonian(&p, &basis).unwrap();
        for term in h.terms() {
            assert!(number.commutator(&term.op).unwrap().is_zero(), "{:?}", term.family);
        }
        for t in [0.0, 3.3e-9, 41.7e-9] {
            let c = number.commutator(&h.evaluate(t)).unwrap();
            assert!(c.max_abs() == 0.0);
        }
        let heff = effective_hamiltonian(&p, &basis).unwrap();
        assert!(number.commutator(&heff).unwrap().max_abs() < 1e-6);
    }
}

#[test]
fn hamiltonian_terms_close_on_single_excitation_sector() {
    let basis = full(1);
    let mut p = small_params(1, 9.0);
    p.set_uniform_crosstalk(mhz(2.0));
    for term in full_interaction_hamiltonian(&p, &basis).unwrap().terms() {
        assert_eq!(term.op.leaks_above(1), 0.0);
    }
}

#[test]
fn compiled_matches_direct_evaluation() {
    let mut p = reference_params(9.0).unwrap();
    p.set_uniform_crosstalk(0.1 * p.g_max());
    let h = full_interaction_hamiltonian(&p, &sector(3)).unwrap();
    let compiled = h.compile();
    let mut vals = Vec::new();
    for t in [0.0, 1.7e-9, 80e-9] {
        compiled.values_at(t, &mut vals);
        let diff = (compiled.to_dense(&vals) - h.evaluate(t).to_dense()).map(|z| z.norm()).max();
        assert!(diff < 1e-6, "{diff}");
    }
}

#[test]
fn effective_exchange_element() {
    let p = reference_params(9.0).unwrap();
    let basis = sector(3);
    let h = effective_hamiltonian(&p, &basis).unwrap();
    let q1 = basis.index_with(&[("q1", 1)]).unwrap().unwrap();
    let qa = basis.index_with(&[("qA", 1)]).unwrap().unwrap();
    let lambda = p.g[0] * p.g_coupler[0] / p.delta(0);
    assert!((h.get(q1, qa).re - lambda).abs() <= 1e-12 * lambda.abs());
    assert!(h.is_hermitian(1e-9));
}

#[test]
fn effective_reduces_to_split_on_vacuum() {
    let p = reference_params(9.0).unwrap();
    let basis = sector(3);
    let heff = effective_hamiltonian(&p, &basis).unwrap();
    let (h0, hint) = vacuum_split(&p, &basis).unwrap();
    let split = h0.add(&hint).unwrap();
    let vacuum: Vec<usize> = (0..basis.dim())
        .filter(|&i| basis.occupation(i)[7..].iter().all(|&x| x == 0))
        .collect();
    assert_eq!(vacuum.len(), 8);
    for &r in &vacuum {
        for &c in &vacuum {
            assert!((heff.get(r, c) - split.get(r, c)).norm() <= 1e-9 * p.chi(0).abs(), "({r},{c})");
        }
    }
}

#[test]
fn effective_zero_couplings_is_zero() {
    let mut p = reference_params(9.0).unwrap();
    for v in [&mut p.g, &mut p.g_coupler] {
        v.iter_mut().for_each(|g| *g = 0.0);
    }
    assert!(effective_hamiltonian(&p, &sector(3)).unwrap().is_zero());
}

#[test]
fn effective_requires_matching() {
    let p = apply_breakage(&reference_params(9.0).unwrap(), 1.1).unwrap();
    match effective_hamiltonian(&p, &sector(3)) {
        Err(Error::ConditionViolation { condition, .. }) => assert_eq!(condition, "detuning_match"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn collective_form_equals_sum_form() {
    for basis in [sector(3), full(1)] {
        let p = if basis.dim() == 14 { reference_params(9.0).unwrap() } else { small_params(1, 9.0) };
        let (_, hint) = vacuum_split(&p, &basis).unwrap();
        let collective = collective_exchange(&p, &basis).unwrap();
        assert!(hint.sub(&collective).unwrap().max_abs() <= 1e-12 * hint.max_abs());
    }
}

#[test]
fn shift_on_single_excited_qubit() {
    let p = reference_params(9.0).unwrap();
    let basis = sector(3);
    let (h0, _) = vacuum_split(&p, &basis).unwrap();
    assert!(h0.is_diagonal());
    let q1 = basis.index_with(&[("q1", 1)]).unwrap().unwrap();
    assert!((h0.get(q1, q1).re - p.chi(0)).abs() <= 1e-15 * p.chi(0).abs());
    let qa = basis.index_with(&[("qA", 1)]).unwrap().unwrap();
    assert!((h0.get(qa, qa).re - p.chi(0)).abs() <= 1e-12 * p.chi(0).abs());
}

#[test]
fn interaction_frame_invariance() {
    let p = reference_params(9.0).unwrap();
    let basis = sector(3);
    let (h0, hint) = vacuum_split(&p, &basis).unwrap();
    let t = us(0.05);
    assert!(interaction_frame_residual(&h0, &hint, t).unwrap() < 1e-9);

    // dense conjugation through the matrix exponential
    let u = propagator(&h0, -t);
    let rotated = &u * hint.to_dense() * u.adjoint();
    let resid = (rotated - hint.to_dense()).map(|z| z.norm()).max() / hint.max_abs();
    assert!(resid < 1e-9, "{resid}");

    let broken = apply_breakage(&p, 1.1).unwrap();
    let (h0b, hintb) = vacuum_split(&broken, &basis).unwrap();
    assert!(interaction_frame_residual(&h0b, &hintb, t).unwrap() > 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_devices_give_hermitian_operators(
        d in proptest::collection::vec(0.3f64..2.0, 1..4),
        b in 4.0f64..30.0,
        cross in 0.0f64..0.2,
        t in 0.0f64..1e-7,
    ) {
        let deltas: Vec<f64> = d.iter().map(|x| ghz(-x)).collect();
        let n = deltas.len();
        let mut p = derive_params(&deltas, deltas[0].abs() / b, n, ghz(6.5), mhz(-400.0)).unwrap();
        p.set_uniform_crosstalk(cross * p.g_max());
        let basis = sector(n);
        let h = full_interaction_hamiltonian(&p, &basis).unwrap();
        prop_assert!(h.pairing_complete());
        let ht = h.evaluate(t);
        prop_assert!(ht.hermiticity_error() <= 1e-12 * ht.max_abs().max(1.0));
        let heff = effective_hamiltonian(&p, &basis).unwrap();
        prop_assert!(heff.hermiticity_error() <= 1e-12 * heff.max_abs());
        let (h0, hint) = vacuum_split(&p, &basis).unwrap();
        prop_assert!(h0.is_hermitian(0.0));
        prop_assert!(hint.is_hermitian(0.0));
        prop_assert!(interaction_frame_residual(&h0, &hint, t).unwrap() < 1e-9);
    }
}
