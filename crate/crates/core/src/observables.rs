//! Polaron diagnostics on truncated state vectors: quasiparticle residue,
//! phonon number, site quadrature variances and the variances of the
//! quadratures measured at the excitation's site.
//!
//! Quadratures are `x = (a + a+)/sqrt 2` and `p = -i(a - a+)/sqrt 2`, so the
//! vacuum has both variances equal to 1/2.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{kappa, FockBasis, StateVector};
use crate::scalar::{czero, phase, Real};

/// Residue, phonon number and quadrature variances of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments<T> {
    pub residue: T,
    pub phonon_number: T,
    pub sx: T,
    pub sp: T,
    pub sxm: T,
    pub spm: T,
}

fn require_one_sector(basis: &FockBasis) -> Result<usize> {
    basis
        .one_offset()
        .ok_or_else(|| Error::SectorMismatch("observable needs the one-excitation sector".into()))
}

fn norm_sqr<T: Real>(psi: &StateVector<T>) -> Result<T> {
    let n2 = psi.norm().powi(2);
    if !(n2 > T::zero()) {
        return Err(Error::InvalidParams("observable of a zero state".into()));
    }
    Ok(n2)
}

/// `|<Psi_k|psi>|^2` against the bare Bloch state
/// `(1/sqrt N) sum_n e^{-ikn} |n; 0>`.
pub fn quasiparticle_residue<T: Real>(psi: &StateVector<T>, kappa_index: usize) -> Result<T> {
    let basis = psi.basis();
    require_one_sector(basis)?;
    let n = basis.n_sites();
    let k = kappa::<T>(kappa_index, n);
    let vacuum = vec![0u16; n];
    let amps = psi.amplitudes();
    let mut acc = czero::<T>();
    for s in 0..n {
        let i = basis.index_of(Some(s), &vacuum).expect("phonon vacuum is always in the basis");
        acc += phase(k * T::from_usize_lossy(s)) * amps[i];
    }
    Ok(acc.norm_sqr() / T::from_usize_lossy(n) / norm_sqr(psi)?)
}

/// `<sum_i a+_i a_i>`.
pub fn mean_phonon_number<T: Real>(psi: &StateVector<T>) -> Result<T> {
    let basis = psi.basis();
    let total: T = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let (_, p) = basis.split(i);
            let q: usize = basis.phonons(p).iter().map(|&x| x as usize).sum();
            a.norm_sqr() * T::from_usize_lossy(q)
        })
        .sum();
    Ok(total / norm_sqr(psi)?)
}

/// Unnormalized `<a>`, `<a a>` and `<a+ a>` at `site`, restricted to basis
/// states accepted by `keep`.
fn ladder_moments<T: Real>(
    psi: &StateVector<T>,
    site: usize,
    keep: impl Fn(Option<usize>) -> bool,
) -> (Complex<T>, Complex<T>, T) {
    let basis = psi.basis();
    let amps = psi.amplitudes();
    let mut a1 = czero::<T>();
    let mut a2 = czero::<T>();
    let mut num = T::zero();
    let mut scratch: Vec<u16> = Vec::with_capacity(basis.n_sites());
    for (i, amp) in amps.iter().enumerate() {
        let (exc, p) = basis.split(i);
        if !keep(exc) {
            continue;
        }
        let m = basis.phonons(p);
        let q = m[site];
        if q == 0 {
            continue;
        }
        num += amp.norm_sqr() * T::from_usize_lossy(q as usize);
        scratch.clear();
        scratch.extend_from_slice(m);
        // <psi| a |psi> picks up conj(psi[lowered]) * sqrt(q) * psi[i]
        scratch[site] -= 1;
        let j = basis.index_of(exc, &scratch).expect("lowering stays in the basis");
        a1 += amps[j].conj() * *amp * T::from_usize_lossy(q as usize).sqrt();
        if q >= 2 {
            scratch[site] -= 1;
            let j2 = basis.index_of(exc, &scratch).expect("lowering stays in the basis");
            a2 += amps[j2].conj() * *amp * T::from_usize_lossy((q as usize) * (q as usize - 1)).sqrt();
        }
    }
    (a1, a2, num)
}

/// Position and momentum variances from the moments of `a`.
fn variances<T: Real>(a1: Complex<T>, a2: Complex<T>, num: T) -> (T, T) {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let x1 = two.sqrt() * a1.re;
    let p1 = two.sqrt() * a1.im;
    let x2 = a2.re + num + half;
    let p2 = -a2.re + num + half;
    ((x2 - x1 * x1).max(T::zero()), (p2 - p1 * p1).max(T::zero()))
}

/// `(S_x, S_p)` of the quadratures of the resonator at `site`.
pub fn quadrature_variances<T: Real>(psi: &StateVector<T>, site: usize) -> Result<(T, T)> {
    let n = psi.basis().n_sites();
    if site >= n {
        return Err(Error::InvalidParams(format!("site {site} outside a {n}-site ring")));
    }
    let n2 = norm_sqr(psi)?;
    let (a1, a2, num) = ladder_moments(psi, site, |_| true);
    Ok(variances(a1 / n2, a2 / n2, num / n2))
}

/// `(S_x^(m), S_p^(m))`: variances of `x^(m) = sum_n c+_n c_n x_n` and its
/// momentum counterpart. With at most one excitation the squares reduce to
/// `sum_n c+_n c_n x_n^2`.
pub fn conditional_variances<T: Real>(psi: &StateVector<T>) -> Result<(T, T)> {
    let basis = psi.basis();
    require_one_sector(basis)?;
    let n2 = norm_sqr(psi)?;
    let mut a1 = czero::<T>();
    let mut a2 = czero::<T>();
    let mut num = T::zero();
    for site in 0..basis.n_sites() {
        let (b1, b2, bn) = ladder_moments(psi, site, |exc| exc == Some(site));
        a1 += b1;
        a2 += b2;
        num += bn;
    }
    // the identity term of x^2 only counts the one-excitation weight
    let offset = basis.one_offset().unwrap_or(0);
    let weight: T = psi.amplitudes()[offset..offset + basis.n_sites() * basis.phonon_dim()]
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<T>()
        / n2;
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let (a1, a2, num) = (a1 / n2, a2 / n2, num / n2);
    let x1 = two.sqrt() * a1.re;
    let p1 = two.sqrt() * a1.im;
    let x2 = a2.re + num + half * weight;
    let p2 = -a2.re + num + half * weight;
    Ok(((x2 - x1 * x1).max(T::zero()), (p2 - p1 * p1).max(T::zero())))
}

/// The state projected on "excitation at `site`", renormalized. Used to
/// check the post-selection reading of the conditional variances.
pub fn condition_on_site<T: Real>(psi: &StateVector<T>, site: usize) -> Result<StateVector<T>> {
    let basis = psi.basis().clone();
    require_one_sector(&basis)?;
    let mut out = StateVector::zeros(basis.clone());
    for (i, a) in psi.amplitudes().iter().enumerate() {
        if basis.split(i).0 == Some(site) {
            out.amplitudes_mut()[i] = *a;
        }
    }
    out.normalized()
}

/// Squeezing relative to the vacuum variance: `10 log10(0.5 / S)` dB.
pub fn squeezing_db<T: Real>(variance: T) -> Result<T> {
    if !(variance > T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "variance",
            value: variance.as_f64(),
        });
    }
    Ok(T::lit(10.0) * (T::lit(0.5) / variance).log10())
}

/// All diagnostics of a one-excitation state at quasimomentum index `k`.
pub fn moments_of_state<T: Real>(psi: &StateVector<T>, kappa_index: usize) -> Result<Moments<T>> {
    let (sx, sp) = quadrature_variances(psi, 0)?;
    let (sxm, spm) = conditional_variances(psi)?;
    Ok(Moments {
        residue: quasiparticle_residue(psi, kappa_index)?,
        phonon_number: mean_phonon_number(psi)?,
        sx,
        sp,
        sxm,
        spm,
    })
}

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub eps0: f64,
    pub ratio: f64,
    pub g_h: f64,
    pub lambda: f64,
    pub z0: f64,
    pub nph: f64,
    pub sx: f64,
    pub sp: f64,
    pub sxm: f64,
    pub spm: f64,
    /// Squeezing of `S_p^(m)` in dB.
    pub squeeze_db: f64,
}

impl ObservableReport {
    pub const COLUMNS: [&'static str; 11] = [
        "eps0_MHz", "ratio", "gH", "lambda", "Z0", "Nph", "Sx", "Sp", "Sxm", "Spm", "squeeze_db",
    ];

    pub fn new<T: Real>(eps0: T, ratio: T, g_h: T, lambda: T, m: &Moments<T>) -> Self {
        let db = squeezing_db(m.spm).map(|x| x.as_f64()).unwrap_or(f64::NAN);
        ObservableReport {
            eps0: eps0.as_f64(),
            ratio: ratio.as_f64(),
            g_h: g_h.as_f64(),
            lambda: lambda.as_f64(),
            z0: m.residue.as_f64(),
            nph: m.phonon_number.as_f64(),
            sx: m.sx.as_f64(),
            sp: m.sp.as_f64(),
            sxm: m.sxm.as_f64(),
            spm: m.spm.as_f64(),
            squeeze_db: db,
        }
    }

    pub fn values(&self) -> [f64; 11] {
        [
            self.eps0,
            self.ratio,
            self.g_h,
            self.lambda,
            self.z0,
            self.nph,
            self.sx,
            self.sp,
            self.sxm,
            self.spm,
            self.squeeze_db,
        ]
    }

    /// CSV fields in [`Self::COLUMNS`] order, 12 significant digits.
    pub fn csv_fields(&self) -> Vec<String> {
        self.values().iter().map(|&x| format_sig(x)).collect()
    }
}

/// Formats with 12 significant digits in scientific notation.
pub fn format_sig(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}
