use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::circuit::HolsteinParams;
use crate::eigen::{dense_eigenvalues, dense_lowest, EigenOptions};
use crate::scalar::{cplx, czero, norm};

fn hp(n: usize, domega: f64, t0: f64, g: f64) -> HolsteinParams<f64> {
    HolsteinParams::new(n, domega, t0, g).unwrap()
}

fn random_state(basis: &Arc<FockBasis>, seed: u64) -> StateVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..basis.dimension())
        .map(|_| cplx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    StateVector::new(basis.clone(), amps).unwrap()
}

#[test]
fn two_site_hamiltonian_matches_hand_enumeration() {
    let (dw, t0, g) = (80.0, 30.0, 0.7);
    let basis = build_basis(2, 1, Sector::OneExcitation).unwrap();
    let h = build_hamiltonian(&hp(2, dw, t0, g), &basis).unwrap();
    // order: site 0 {00, 01, 10}, site 1 {00, 01, 10}
    let c = g * dw;
    let hop = -2.0 * t0;
    #[rustfmt::skip]
    let expected = [
        [0.0, 0.0, c,   hop, 0.0, 0.0],
        [0.0, dw,  0.0, 0.0, hop, 0.0],
        [c,   0.0, dw,  0.0, 0.0, hop],
        [hop, 0.0, 0.0, 0.0, c,   0.0],
        [0.0, hop, 0.0, c,   dw,  0.0],
        [0.0, 0.0, hop, 0.0, 0.0, dw ],
    ];
    for (r, row) in expected.iter().enumerate() {
        for (col, v) in row.iter().enumerate() {
            assert_eq!(h.get(r, col), cplx(*v, 0.0), "entry ({r}, {col})");
        }
    }
    assert_eq!(h.hermiticity_defect(), 0.0);
}

#[test]
fn zero_sector_is_phonon_diagonal() {
    let basis = build_basis(3, 2, Sector::ZeroExcitation).unwrap();
    let h = build_hamiltonian(&hp(3, 50.0, 20.0, 1.0), &basis).unwrap();
    assert_eq!(h.nnz(), basis.dimension() - 1);
    for i in 0..basis.dimension() {
        let total: u16 = basis.phonons(i).iter().sum();
        assert_eq!(h.get(i, i).re, 50.0 * total as f64);
    }
}

#[test]
fn hermitian_by_construction() {
    let basis = build_basis(4, 6, Sector::Both).unwrap();
    let h = build_hamiltonian(&hp(4, 80.0, 80.0, 1.25), &basis).unwrap();
    assert_eq!(h.hermiticity_defect(), 0.0);
}

#[test]
fn free_band_bottom() {
    let basis = build_basis(4, 4, Sector::OneExcitation).unwrap();
    let h = build_hamiltonian(&hp(4, 80.0, 80.0, 0.0), &basis).unwrap();
    let pair = ground_state(&h, &EigenOptions::default()).unwrap();
    assert!((pair.value + 160.0).abs() < 1e-8);
}

#[test]
fn lang_firsov_energy_converges_with_cutoff() {
    let (dw, g) = (80.0, 1.25);
    let exact = -g * g * dw;
    let mut last_err = f64::INFINITY;
    for m in [4usize, 8, 14, 20] {
        let basis = build_basis(4, m, Sector::OneExcitation).unwrap();
        let h = build_hamiltonian(&hp(4, dw, 0.0, g), &basis).unwrap();
        let e = ground_state(&h, &EigenOptions::default()).unwrap().value;
        // single displaced oscillator truncated at m quanta
        let mut osc = vec![czero::<f64>(); (m + 1) * (m + 1)];
        for k in 0..=m {
            osc[k * (m + 1) + k] = cplx(dw * k as f64, 0.0);
            if k < m {
                let a = g * dw * ((k + 1) as f64).sqrt();
                osc[k * (m + 1) + k + 1] = cplx(a, 0.0);
                osc[(k + 1) * (m + 1) + k] = cplx(a, 0.0);
            }
        }
        let (e_osc, _) = dense_lowest(&mut osc, m + 1);
        assert!((e - e_osc).abs() < 1e-8, "m = {m}: {e} vs {e_osc}");
        let err = e - exact;
        assert!(err >= -1e-9 && err <= last_err + 1e-12);
        last_err = err;
    }
    assert!(last_err < 1e-8 * dw);
}

#[test]
fn translation_properties() {
    let basis = Arc::new(build_basis(4, 3, Sector::Both).unwrap());
    let psi = random_state(&basis, 11);
    let back = translate(&translate(&psi, 1), 3);
    for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
        assert_eq!(a, b);
    }
    assert!((translate(&psi, 2).norm() - psi.norm()).abs() < 1e-12);
}

#[test]
fn hamiltonian_commutes_with_translation() {
    let basis = Arc::new(build_basis(4, 4, Sector::Both).unwrap());
    let h = build_hamiltonian(&hp(4, 80.0, 55.0, 1.1), &basis).unwrap();
    let psi = random_state(&basis, 3);
    let ht = h.apply_checked(translate(&psi, 1).amplitudes()).unwrap();
    let hpsi = StateVector::new(basis.clone(), h.apply_checked(psi.amplitudes()).unwrap()).unwrap();
    let th = translate(&hpsi, 1);
    let diff: Vec<Complex<f64>> = ht.iter().zip(th.amplitudes()).map(|(a, b)| a - b).collect();
    assert!(norm(&diff) <= 1e-10);
}

#[test]
fn free_dispersion_per_block() {
    let n = 4;
    let p = hp(n, 80.0, 60.0, 0.0);
    // with phonons present a block's lowest state can carry a phonon
    let basis = Arc::new(build_basis(n, 0, Sector::OneExcitation).unwrap());
    for j in 0..n {
        let (e, psi) = momentum_ground_state(&p, &basis, j, &EigenOptions::default()).unwrap();
        let k: f64 = kappa(j, n);
        assert!((e + 2.0 * 60.0 * k.cos()).abs() < 1e-10, "j = {j}");
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn momentum_blocks_partition_the_space() {
    let n = 4;
    let p = hp(n, 80.0, 80.0, 1.0);
    let total: usize = (0..n)
        .map(|j| momentum_block(&p, 5, j).unwrap().dimension())
        .sum();
    assert_eq!(total, build_basis(n, 5, Sector::OneExcitation).unwrap().dimension());
}

#[test]
fn two_site_spectrum_is_union_of_blocks() {
    let p = hp(2, 70.0, 45.0, 0.9);
    let basis = build_basis(2, 2, Sector::OneExcitation).unwrap();
    let h = build_hamiltonian(&p, &basis).unwrap();
    let full = dense_eigenvalues(&mut h.to_dense(), h.dimension());
    let mut union = Vec::new();
    for j in 0..2 {
        let b = momentum_block(&p, 2, j).unwrap();
        union.extend(dense_eigenvalues(&mut b.hamiltonian.to_dense(), b.dimension()));
    }
    union.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(full.len(), union.len());
    for (a, b) in full.iter().zip(&union) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn zero_momentum_block_holds_the_ground_state() {
    let p = hp(4, 80.0, 80.0, 1.25);
    let basis = Arc::new(build_basis(4, 6, Sector::OneExcitation).unwrap());
    let h = build_hamiltonian(&p, &basis).unwrap();
    let global = ground_state(&h, &EigenOptions::default()).unwrap();
    let (e0, psi) = momentum_ground_state(&p, &basis, 0, &EigenOptions::default()).unwrap();
    assert!((global.value - e0).abs() < 1e-8);
    // embedded vector is an eigenvector of the full Hamiltonian
    let r = h.apply_checked(psi.amplitudes()).unwrap();
    let res: Vec<Complex<f64>> = r.iter().zip(psi.amplitudes()).map(|(a, b)| a - b * e0).collect();
    assert!(norm(&res) < 1e-8 * h.gershgorin_bound());
    // and a momentum eigenvector: T psi = psi at k = 0
    let t = translate(&psi, 1);
    let diff: Vec<Complex<f64>> = t.amplitudes().iter().zip(psi.amplitudes()).map(|(a, b)| a - b).collect();
    assert!(norm(&diff) < 1e-12);
}

#[test]
fn lanczos_path_matches_dense_path() {
    let p = hp(4, 80.0, 80.0, 1.25);
    let basis = build_basis(4, 5, Sector::OneExcitation).unwrap();
    let h = build_hamiltonian(&p, &basis).unwrap();
    let dense = ground_state(&h, &EigenOptions::default()).unwrap();
    let lanczos = ground_state(
        &h,
        &EigenOptions {
            dense_below: 0,
            ..EigenOptions::default()
        },
    )
    .unwrap();
    assert!((dense.value - lanczos.value).abs() < 1e-9);
    assert!(lanczos.residual <= 1e-8 * h.gershgorin_bound());
}

#[test]
fn projected_lanczos_agrees_with_block() {
    // Lanczos on the full space with every iterate projected onto k = pi/2.
    let p = hp(4, 80.0, 80.0, 1.0);
    let basis = Arc::new(build_basis(4, 5, Sector::OneExcitation).unwrap());
    let h = build_hamiltonian(&p, &basis).unwrap();
    let (e_block, _) = momentum_ground_state(&p, &basis, 1, &EigenOptions::default()).unwrap();
    let b2 = basis.clone();
    let opts = EigenOptions {
        dense_below: 0,
        ..EigenOptions::default()
    };
    let pair = crate::eigen::lanczos_lowest_with(&h, None, &opts, move |v| {
        let s = StateVector::new(b2.clone(), v.to_vec()).unwrap();
        v.copy_from_slice(project_momentum(&s, 1).amplitudes());
    })
    .unwrap();
    assert!((pair.value - e_block).abs() < 1e-8);
}

#[test]
fn ground_energy_nonincreasing_in_cutoff() {
    let p = hp(4, 80.0, 80.0, 1.25);
    let mut last = f64::INFINITY;
    for m in 0..=10 {
        let b = momentum_block(&p, m, 0).unwrap();
        let e = b.lowest(&EigenOptions::default()).unwrap().value;
        assert!(e <= last + 1e-10, "cutoff {m}");
        last = e;
    }
}

#[test]
fn expectation_examples() {
    let basis = Arc::new(build_basis(3, 2, Sector::OneExcitation).unwrap());
    let psi = random_state(&basis, 5);
    let id = SparseOperator::identity(basis.dimension());
    assert!((expectation(&id, &psi).unwrap() - cplx(1.0, 0.0)).norm() < 1e-14);
    let h = build_hamiltonian(&hp(3, 80.0, 40.0, 0.8), &basis).unwrap();
    assert!(expectation(&h, &psi).unwrap().im.abs() < 1e-12);
    let mut vac = StateVector::zeros(basis.clone());
    vac.amplitudes_mut()[basis.index_of(Some(1), &[0, 0, 0]).unwrap()] = cplx(1.0, 0.0);
    let nop = phonon_number_operator::<f64>(&basis);
    assert_eq!(expectation(&nop, &vac).unwrap(), cplx(0.0, 0.0));
    let other = Arc::new(build_basis(3, 1, Sector::OneExcitation).unwrap());
    assert!(expectation(&nop, &StateVector::zeros(other)).is_err());
}

#[test]
fn single_precision_free_band() {
    let basis = build_basis(4, 2, Sector::OneExcitation).unwrap();
    let h = build_hamiltonian(&HolsteinParams::<f32>::new(4, 80.0, 80.0, 0.0).unwrap(), &basis).unwrap();
    let pair = ground_state(&h, &EigenOptions::default()).unwrap();
    assert!((pair.value + 160.0).abs() < 1e-3);
}
