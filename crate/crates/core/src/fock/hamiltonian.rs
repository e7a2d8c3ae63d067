use num_complex::Complex;

use super::basis::FockBasis;
use super::operator::SparseOperator;
use crate::circuit::HolsteinParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Holstein Hamiltonian on a periodic ring:
/// `sum_n domega [a_n^+ a_n + g_H c_n^+ c_n (a_n + a_n^+)] - t0 sum_n (c_n^+ c_{n+1} + h.c.)`.
///
/// Coupling terms that would leave the phonon cutoff are dropped. The zero
/// sector only carries the free phonon energy.
pub fn build_hamiltonian<T: Real>(hp: &HolsteinParams<T>, basis: &FockBasis) -> Result<SparseOperator<T>> {
    check_sites(hp, basis)?;
    let n = basis.n_sites();
    let dw = hp.domega();
    let coupling = hp.g_h() * dw;
    let hop = Complex::new(-hp.t0(), T::zero());
    let mut triplets = Vec::with_capacity(basis.dimension() * 6);
    let mut scratch: Vec<u16> = Vec::with_capacity(n);
    for i in 0..basis.dimension() {
        let (exc, p) = basis.split(i);
        let m = basis.phonons(p);
        let total: usize = m.iter().map(|&x| x as usize).sum();
        triplets.push((i, i, Complex::new(dw * T::from_usize_lossy(total), T::zero())));
        let Some(site) = exc else { continue };
        // a_site^+ raises; its adjoint is emitted from the partner row
        if total < basis.cutoff() && coupling != T::zero() {
            scratch.clear();
            scratch.extend_from_slice(m);
            scratch[site] += 1;
            let j = basis
                .index_of(Some(site), &scratch)
                .expect("raised configuration within cutoff");
            let amp = coupling * T::from_usize_lossy(scratch[site] as usize).sqrt();
            triplets.push((j, i, Complex::new(amp, T::zero())));
            triplets.push((i, j, Complex::new(amp, T::zero())));
        }
        if hop.re != T::zero() {
            for target in [(site + 1) % n, (site + n - 1) % n] {
                let j = basis.join(Some(target), p).expect("same phonon configuration");
                triplets.push((j, i, hop));
            }
        }
    }
    Ok(SparseOperator::from_triplets(basis.dimension(), triplets, true))
}

/// Total phonon number `sum_i a_i^+ a_i`.
pub fn phonon_number_operator<T: Real>(basis: &FockBasis) -> SparseOperator<T> {
    let triplets = (0..basis.dimension())
        .map(|i| {
            let (_, p) = basis.split(i);
            let total: usize = basis.phonons(p).iter().map(|&x| x as usize).sum();
            (i, i, Complex::new(T::from_usize_lossy(total), T::zero()))
        })
        .collect();
    SparseOperator::from_triplets(basis.dimension(), triplets, true)
}

pub(crate) fn check_sites<T: Real>(hp: &HolsteinParams<T>, basis: &FockBasis) -> Result<()> {
    if hp.n_sites() != basis.n_sites() {
        return Err(Error::InvalidParams(format!(
            "parameters are for {} sites but the basis has {}",
            hp.n_sites(),
            basis.n_sites()
        )));
    }
    Ok(())
}
