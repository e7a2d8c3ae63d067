use std::sync::Arc;

use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::eigen::EigenOptions;
use crate::fock::{build_basis, build_hamiltonian, expectation, momentum_ground_state, Sector};
use crate::scalar::{cplx, inner};

fn hp(n: usize, domega: f64, t0: f64, g: f64) -> HolsteinParams<f64> {
    HolsteinParams::new(n, domega, t0, g).unwrap()
}

fn random_ts(n: usize, k: usize, reach: f64, seed: u64) -> ToyozawaState<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |s: f64| cplx(s * (rng.gen::<f64>() - 0.5), s * (rng.gen::<f64>() - 0.5));
    let phi = (0..n).map(|_| draw(2.0)).collect();
    let v = (0..n).map(|_| draw(reach)).collect();
    ToyozawaState::new(k, phi, v).unwrap()
}

fn serial() -> OptimizeOptions {
    OptimizeOptions {
        parallel: false,
        ..OptimizeOptions::default()
    }
}

#[test]
fn coherent_overlap_examples() {
    let a = cplx(0.3f64, -1.1);
    assert!((coherent_overlap(a, a) - cplx(1.0, 0.0)).norm() < 1e-15);
    let b = cplx(-0.7, 0.4);
    let vac = coherent_overlap(cplx(0.0f64, 0.0), b);
    assert!((vac - cplx((-b.norm_sqr() / 2.0).exp(), 0.0)).norm() < 1e-15);
    assert!((coherent_lowering(a, b) - b * coherent_overlap(a, b)).norm() < 1e-15);
    assert!((coherent_number(a, a).re - a.norm_sqr()).abs() < 1e-14);
}

proptest! {
    #[test]
    fn coherent_overlap_modulus(ar in -2.0..2.0f64, ai in -2.0..2.0f64, br in -2.0..2.0f64, bi in -2.0..2.0f64) {
        let (a, b) = (cplx(ar, ai), cplx(br, bi));
        let lhs = coherent_overlap(a, b).norm_sqr();
        let rhs = (-(a - b).norm_sqr()).exp();
        prop_assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn energy_is_gauge_invariant(seed in 0u64..500, theta in 0.0..std::f64::consts::TAU, c in 0.2..3.0f64, shift in 0usize..4) {
        let p = hp(4, 80.0, 65.0, 1.1);
        let ts = random_ts(4, 1, 1.5, seed);
        let (n0, e0) = norm_and_energy(&ts, &p).unwrap();
        let u = Complex::from_polar(c, theta);
        let mut phi: Vec<_> = ts.phi().iter().map(|z| z * u).collect();
        let mut v = ts.v().to_vec();
        phi.rotate_left(shift);
        v.rotate_left(shift);
        let moved = ToyozawaState::new(1, phi, v).unwrap();
        let (n1, e1) = norm_and_energy(&moved, &p).unwrap();
        prop_assert!((e1 - e0).abs() < 1e-12 * e0.abs().max(80.0));
        prop_assert!((n1 - c * c * n0).abs() < 1e-12 * n1);
    }
}

#[test]
fn free_dispersion() {
    let p = hp(6, 80.0, 70.0, 0.0);
    for j in 0..6 {
        let (norm, e) = norm_and_energy(&ToyozawaState::free(6, j), &p).unwrap();
        assert!((norm - 1.0).abs() < 1e-15);
        let k: f64 = crate::fock::kappa(j, 6);
        assert!((e + 140.0 * k.cos()).abs() < 1e-12, "j = {j}");
    }
}

#[test]
fn lang_firsov_energy_and_stationarity() {
    for g in [0.5, 1.25, 2.0] {
        let p = hp(4, 80.0, 0.0, g);
        let ts = ToyozawaState::lang_firsov(4, 0, g);
        let (_, e) = norm_and_energy(&ts, &p).unwrap();
        assert!((e + g * g * 80.0).abs() < 1e-12);
        let grad = gradient(&ts, &p).unwrap();
        let gn = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(gn < 1e-6, "g = {g}: {gn}");
    }
}

#[test]
fn gauge_direction_has_zero_slope() {
    let p = hp(4, 80.0, 80.0, 1.25);
    let ts = random_ts(4, 0, 1.0, 9);
    let grad = gradient(&ts, &p).unwrap();
    let n = 4;
    let mut dir = vec![0.0; 4 * n];
    for (i, z) in ts.phi().iter().enumerate() {
        dir[i] = -z.im;
        dir[n + i] = z.re;
    }
    let slope: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
    assert!(slope.abs() < 1e-8, "{slope}");
}

#[test]
fn degenerate_norm_is_reported() {
    let ts = ToyozawaState::new(0, vec![cplx(0.0, 0.0); 4], vec![cplx(0.0, 0.0); 4]).unwrap();
    assert!(matches!(norm_and_energy(&ts, &hp(4, 80.0, 80.0, 1.0)), Err(Error::DegenerateNorm(_))));
}

#[test]
fn closed_form_matches_materialized_state() {
    let n = 4;
    let basis = Arc::new(build_basis(n, 22, Sector::OneExcitation).unwrap());
    for (k, seed) in [(0usize, 1u64), (1, 2), (2, 3)] {
        let p = hp(n, 80.0, 55.0, 0.9);
        let ts = random_ts(n, k, 1.0, seed);
        let (_, e) = norm_and_energy(&ts, &p).unwrap();
        let mat = to_state_vector(&ts, &basis).unwrap();
        assert!(mat.truncation_weight < 1e-10, "{:e}", mat.truncation_weight);
        assert!((mat.state.norm() - 1.0).abs() < 1e-12);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let e_ed = expectation(&h, &mat.state).unwrap().re;
        assert!((e - e_ed).abs() < 1e-8 * 80.0, "k = {k}: {e} vs {e_ed}");
    }
}

#[test]
fn free_state_materializes_to_bloch_state() {
    let n = 4;
    let basis = Arc::new(build_basis(n, 3, Sector::OneExcitation).unwrap());
    let mat = to_state_vector(&ToyozawaState::<f64>::free(n, 1), &basis).unwrap();
    assert_eq!(mat.truncation_weight, 0.0);
    assert!(!mat.truncation_warning());
    let mut bloch = vec![cplx(0.0, 0.0); basis.dimension()];
    for s in 0..n {
        let k: f64 = crate::fock::kappa(1, n);
        bloch[basis.index_of(Some(s), &[0; 4]).unwrap()] = Complex::from_polar(0.5, -k * s as f64);
    }
    assert!((inner(&bloch, mat.state.amplitudes()).norm() - 1.0).abs() < 1e-14);
}

#[test]
fn truncation_is_flagged() {
    let basis = Arc::new(build_basis(4, 2, Sector::OneExcitation).unwrap());
    let mat = to_state_vector(&ToyozawaState::lang_firsov(4, 0, 2.0), &basis).unwrap();
    assert!(mat.truncation_warning());
    let zero = Arc::new(build_basis(4, 2, Sector::ZeroExcitation).unwrap());
    assert!(to_state_vector(&ToyozawaState::<f64>::free(4, 0), &zero).is_err());
}

#[test]
fn optimizer_free_limit() {
    let p = hp(4, 80.0, 80.0, 0.0);
    let r = optimize_ground(&p, 0, &serial()).unwrap();
    assert!((r.energy + 160.0).abs() < 1e-8);
    assert!(moments(&r.state).unwrap().residue > 1.0 - 1e-8);
}

#[test]
fn optimizer_lang_firsov_limit() {
    let p = hp(4, 80.0, 0.0, 1.25);
    let r = optimize_ground(&p, 0, &serial()).unwrap();
    assert!((r.energy + 1.5625 * 80.0).abs() < 1e-8 * 80.0, "{}", r.energy);
}

#[test]
fn optimizer_is_bounded_by_exact_diagonalization() {
    let p = hp(4, 80.0, 80.0, 1.25);
    let r = optimize_ground(&p, 0, &OptimizeOptions::default()).unwrap();
    let basis = Arc::new(build_basis(4, 18, Sector::OneExcitation).unwrap());
    let (e_ed, _) = momentum_ground_state(&p, &basis, 0, &EigenOptions::default()).unwrap();
    assert!(r.energy >= e_ed - 1e-9 * 80.0, "{} < {e_ed}", r.energy);
    assert!((r.energy - e_ed) / e_ed.abs() < 0.05);
    // accepted steps never raise the energy
    for w in r.history.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn zero_momentum_cloud_is_real_and_symmetric() {
    let p = hp(4, 80.0, 80.0, 1.0);
    let r = optimize_ground(&p, 0, &serial()).unwrap();
    let ts = &r.state;
    let lead = ts.v_at(0);
    let u = lead.conj() / lead.norm();
    for l in 1..=2isize {
        let a = ts.v_at(l) * u;
        let b = ts.v_at(-l) * u;
        assert!((a - b).norm() < 1e-6, "l = {l}");
        assert!(a.im.abs() < 1e-6);
    }
    assert!(ts.phi_at(0).im == 0.0 && ts.phi_at(0).re >= 0.0);
}

#[test]
fn canonicalization_preserves_the_state() {
    let p = hp(5, 80.0, 60.0, 1.2);
    let mut ts = random_ts(5, 2, 1.3, 21);
    let before = norm_and_energy(&ts, &p).unwrap().1;
    let m_before = moments(&ts).unwrap();
    ts.canonicalize().unwrap();
    let (norm, after) = norm_and_energy(&ts, &p).unwrap();
    assert!((norm - 1.0).abs() < 1e-12);
    assert!((before - after).abs() < 1e-10);
    assert!((m_before.residue - moments(&ts).unwrap().residue).abs() < 1e-12);
    let lead = ts.v()[0].norm();
    assert!(ts.v().iter().all(|z| z.norm() <= lead));
}

#[test]
fn json_round_trip_uses_centred_offsets() {
    let ts = random_ts(4, 3, 1.0, 4);
    let text = serde_json::to_string(&ts).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["N"], 4);
    assert_eq!(value["kappa_index"], 3);
    // first listed entry is offset -2
    assert_eq!(value["v"][0][0].as_f64().unwrap(), ts.v_at(-2).re);
    let back: ToyozawaState<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, ts);
    assert!(serde_json::from_str::<ToyozawaState<f64>>(r#"{"N":4,"kappa_index":0,"phi":[],"v":[]}"#).is_err());
}

#[test]
fn single_precision_energy() {
    let p = HolsteinParams::<f32>::new(4, 80.0, 0.0, 1.25).unwrap();
    let (_, e) = norm_and_energy(&ToyozawaState::lang_firsov(4, 0, 1.25f32), &p).unwrap();
    assert!((e + 125.0).abs() < 1e-3);
}
