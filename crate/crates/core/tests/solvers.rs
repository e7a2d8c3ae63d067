use std::sync::Arc;

use holstein_core::eigen::EigenOptions;
use holstein_core::fock::{build_basis, momentum_ground_state, Sector};
use holstein_core::observables::moments_of_state;
use holstein_core::toyozawa::{self, optimize_ground, to_state_vector, OptimizeOptions};
use holstein_core::HolsteinParams64;
use proptest::prelude::*;

fn ed(hp: &HolsteinParams64, m: usize, k: usize) -> f64 {
    let basis = Arc::new(build_basis(hp.n_sites(), m, Sector::OneExcitation).unwrap());
    momentum_ground_state(hp, &basis, k, &EigenOptions::default()).unwrap().0
}

#[test]
fn variational_energy_bounds_converged_ed_at_every_momentum() {
    let hp = HolsteinParams64::new(4, 80.0, 80.0, 1.25).unwrap();
    for k in 0..4 {
        let e_ed = ed(&hp, 20, k);
        let tz = optimize_ground(&hp, k, &OptimizeOptions::default()).unwrap();
        assert!(tz.energy >= e_ed - 1e-9 * 80.0, "k {k}: {} < {e_ed}", tz.energy);
        // a single cloud misses the polaron-plus-phonon continuum near the zone edge
        if k == 0 {
            assert!((tz.energy - e_ed) / e_ed.abs() < 0.05);
        }
    }
}

#[test]
fn weak_coupling_observables_agree() {
    let hp = HolsteinParams64::new(4, 80.0, 80.0, 0.4).unwrap();
    let basis = Arc::new(build_basis(4, 12, Sector::OneExcitation).unwrap());
    let (_, psi) = momentum_ground_state(&hp, &basis, 0, &EigenOptions::default()).unwrap();
    let exact = moments_of_state(&psi, 0).unwrap();
    let r = optimize_ground(&hp, 0, &OptimizeOptions::default()).unwrap();
    let var = toyozawa::moments(&r.state).unwrap();
    assert!((exact.residue - var.residue).abs() < 0.02);
    assert!((exact.phonon_number - var.phonon_number).abs() < 0.02);
    assert!((exact.spm - var.spm).abs() < 0.01);
    let mat = to_state_vector(&r.state, &basis).unwrap();
    assert!(!mat.truncation_warning());
    assert!((moments_of_state(&mat.state, 0).unwrap().residue - var.residue).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ed_energy_decreases_with_cutoff(g in 0.0..2.0f64, ratio in 0.5..1.5f64) {
        let hp = HolsteinParams64::new(4, 80.0 * ratio, 80.0, g).unwrap();
        let (e4, e8) = (ed(&hp, 4, 0), ed(&hp, 8, 0));
        prop_assert!(e8 <= e4 + 1e-9 * 80.0);
    }

    #[test]
    fn variances_respect_uncertainty(g in 0.0..2.5f64) {
        let hp = HolsteinParams64::new(4, 80.0, 80.0, g).unwrap();
        let r = optimize_ground(&hp, 0, &OptimizeOptions { parallel: false, ..OptimizeOptions::default() }).unwrap();
        let m = toyozawa::moments(&r.state).unwrap();
        prop_assert!(m.sx * m.sp >= 0.25 - 1e-9);
        prop_assert!(m.sxm * m.spm >= 0.25 - 1e-9);
        prop_assert!(m.residue <= 1.0 + 1e-12 && m.residue >= 0.0);
    }
}
