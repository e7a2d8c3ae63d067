//! Lattice translations and quasimomentum-resolved solves.
//!
//! Conventions: `T` shifts the excitation and every phonon by one site,
//! `T |n; m> = |n+1; m'>` with `m'[s+1] = m[s]`. The bare Bloch state
//! `(1/sqrt N) sum_n exp(-i k n) |n; 0>` then satisfies `T psi = exp(i k) psi`,
//! and the quasimomentum block at `k` is spanned by
//! `|k; m> = (1/sqrt N) sum_d exp(-i k d) T^d |0; m>`.

use std::sync::Arc;

use num_complex::Complex;

use super::basis::{FockBasis, Sector};
use super::hamiltonian::check_sites;
use super::operator::SparseOperator;
use super::state::StateVector;
use crate::circuit::HolsteinParams;
use crate::eigen::{lowest_eigenpair, EigenOptions, EigenPair};
use crate::error::{Error, Result};
use crate::scalar::{czero, phase, Real};

/// Quasimomentum `2 pi j / N`.
pub fn kappa<T: Real>(index: usize, n_sites: usize) -> T {
    T::lit(2.0) * T::PI() * T::from_usize_lossy(index % n_sites) / T::from_usize_lossy(n_sites)
}

/// `T^d psi`.
pub fn translate<T: Real>(psi: &StateVector<T>, d: usize) -> StateVector<T> {
    let basis = psi.basis().clone();
    let n = basis.n_sites();
    let d = d % n;
    let mut out = StateVector::zeros(basis.clone());
    let mut scratch = Vec::with_capacity(n);
    let amps = psi.amplitudes();
    let dst = out.amplitudes_mut();
    for (i, a) in amps.iter().enumerate() {
        let (exc, p) = basis.split(i);
        let q = basis.shifted_rank(basis.phonons(p), d, &mut scratch);
        let j = basis
            .join(exc.map(|s| (s + d) % n), q)
            .expect("translation stays in sector");
        dst[j] = *a;
    }
    out
}

/// Projection `(1/N) sum_d exp(-i k d) T^d` onto the quasimomentum `k` sector.
pub fn project_momentum<T: Real>(psi: &StateVector<T>, kappa_index: usize) -> StateVector<T> {
    let n = psi.basis().n_sites();
    let k = kappa::<T>(kappa_index, n);
    let mut acc = StateVector::zeros(psi.basis().clone());
    let mut shifted = psi.clone();
    let inv_n = T::one() / T::from_usize_lossy(n);
    for d in 0..n {
        let w = phase(-k * T::from_usize_lossy(d)) * inv_n;
        for (a, s) in acc.amplitudes_mut().iter_mut().zip(shifted.amplitudes()) {
            *a += w * s;
        }
        shifted = translate(&shifted, 1);
    }
    acc
}

/// Holstein Hamiltonian restricted to one quasimomentum block of the
/// one-excitation sector.
#[derive(Debug, Clone)]
pub struct MomentumBlock<T> {
    pub kappa_index: usize,
    /// Relative phonon configurations (excitation pinned at site 0).
    pub configs: Arc<FockBasis>,
    pub hamiltonian: SparseOperator<T>,
}

pub fn momentum_block<T: Real>(
    hp: &HolsteinParams<T>,
    cutoff: usize,
    kappa_index: usize,
) -> Result<MomentumBlock<T>> {
    let n = hp.n_sites();
    let configs = Arc::new(FockBasis::with_cap(
        n,
        cutoff,
        Sector::ZeroExcitation,
        super::basis::DEFAULT_DIMENSION_CAP,
    )?);
    let k = kappa::<T>(kappa_index, n);
    let dw = hp.domega();
    let coupling = hp.g_h() * dw;
    let dim = configs.dimension();
    let mut triplets = Vec::with_capacity(dim * 5);
    let mut scratch = Vec::with_capacity(n);
    for i in 0..dim {
        let m = configs.phonons(i);
        let total: usize = m.iter().map(|&x| x as usize).sum();
        triplets.push((i, i, Complex::new(dw * T::from_usize_lossy(total), T::zero())));
        if total < cutoff && coupling != T::zero() {
            scratch.clear();
            scratch.extend_from_slice(m);
            scratch[0] += 1;
            let j = configs.phonon_rank(&scratch).expect("within cutoff");
            let amp = Complex::new(coupling * T::from_usize_lossy(scratch[0] as usize).sqrt(), T::zero());
            triplets.push((j, i, amp));
            triplets.push((i, j, amp));
        }
        if hp.t0() != T::zero() {
            // hopping by d = +1 and d = -1 relative to the excitation
            for d in [1usize, n - 1] {
                let j = configs.shifted_rank(m, d, &mut scratch);
                let w = phase(-k * T::from_usize_lossy(d)) * (-hp.t0());
                triplets.push((j, i, w));
            }
        }
    }
    Ok(MomentumBlock {
        kappa_index,
        configs,
        hamiltonian: SparseOperator::from_triplets(dim, triplets, true),
    })
}

impl<T: Real> MomentumBlock<T> {
    pub fn dimension(&self) -> usize {
        self.configs.dimension()
    }

    /// Expands block amplitudes into a one-excitation basis with the same
    /// site count and cutoff.
    pub fn embed(&self, coeffs: &[Complex<T>], basis: &Arc<FockBasis>) -> Result<StateVector<T>> {
        let n = self.configs.n_sites();
        if basis.n_sites() != n || basis.cutoff() != self.configs.cutoff() || !basis.sector().has_one() {
            return Err(Error::SectorMismatch(
                "target basis must be a one-excitation basis with matching size and cutoff".into(),
            ));
        }
        if coeffs.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: coeffs.len(),
            });
        }
        let k = kappa::<T>(self.kappa_index, n);
        let inv_sqrt_n = T::one() / T::from_usize_lossy(n).sqrt();
        let mut out = StateVector::zeros(basis.clone());
        let dst = out.amplitudes_mut();
        let mut scratch = Vec::with_capacity(n);
        for (p, c) in coeffs.iter().enumerate() {
            if *c == czero() {
                continue;
            }
            let m = self.configs.phonons(p);
            for d in 0..n {
                let q = basis.shifted_rank(m, d, &mut scratch);
                let j = basis.join(Some(d), q).expect("one-excitation sector");
                dst[j] += c * phase(-k * T::from_usize_lossy(d)) * inv_sqrt_n;
            }
        }
        Ok(out)
    }

    pub fn lowest(&self, opts: &EigenOptions) -> Result<EigenPair<T>> {
        lowest_eigenpair(&self.hamiltonian, || self.hamiltonian.to_dense(), opts)
    }
}

/// Global ground state of a sparse Hamiltonian.
pub fn ground_state<T: Real>(h: &SparseOperator<T>, opts: &EigenOptions) -> Result<EigenPair<T>> {
    if !h.is_flagged_hermitian() {
        return Err(Error::InvalidParams("ground_state needs a Hermitian operator".into()));
    }
    lowest_eigenpair(h, || h.to_dense(), opts)
}

/// Lowest eigenpair inside the quasimomentum block `2 pi j / N`, expanded
/// into `basis`.
pub fn momentum_ground_state<T: Real>(
    hp: &HolsteinParams<T>,
    basis: &Arc<FockBasis>,
    kappa_index: usize,
    opts: &EigenOptions,
) -> Result<(T, StateVector<T>)> {
    check_sites(hp, basis)?;
    let block = momentum_block(hp, basis.cutoff(), kappa_index)?;
    let pair = block.lowest(opts)?;
    let psi = block.embed(&pair.vector, basis)?;
    Ok((pair.value, psi))
}
