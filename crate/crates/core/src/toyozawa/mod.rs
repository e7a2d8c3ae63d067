//! Toyozawa variational ansatz.
//!
//! The trial state at quasimomentum `k` is
//!
//! ```text
//! |psi_k> = N^{-1/2} sum_n e^{-ikn} sum_m Phi(m) e^{-ikm} c+_{n+m} |0> (x)_l |v_l>_{n+l}
//! ```
//!
//! with a bare-excitation profile `Phi` and a coherent phonon cloud `v`, both
//! indexed by lattice offsets. Every expectation value reduces to sums over
//! the relative displacement `d` between the two clouds in a matrix element:
//!
//! ```text
//! S(d) = prod_l <v_l | v_{l-d}>        A(d) = sum_m Phi*(m) Phi(m-d)
//! ```
//!
//! so the norm, energy and moments all cost `O(N^2)` after `O(N^2)` overlap
//! products. Offsets are stored by residue mod `N`; offset `m` lives at
//! index `m.rem_euclid(N)`.

mod optimize;

#[cfg(test)]
mod tests;

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circuit::HolsteinParams;
use crate::error::{Error, Result};
use crate::fock::{kappa, FockBasis, StateVector};
use crate::observables::Moments;
use crate::scalar::{cplx, czero, phase, Real};

pub use optimize::{optimize_ground, OptimizeOptions, OptimizeReport, Start};

/// Norms below this are treated as a collapsed trial state.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// Probability outside the cutoff above which a materialized state is
/// flagged as truncated.
pub const TRUNCATION_WARNING: f64 = 1e-8;

/// `<alpha|beta>` for normalized coherent states.
pub fn coherent_overlap<T: Real>(alpha: Complex<T>, beta: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    (alpha.conj() * beta - (alpha.norm_sqr() + beta.norm_sqr()) * half).exp()
}

/// `<alpha|a|beta>`.
pub fn coherent_lowering<T: Real>(alpha: Complex<T>, beta: Complex<T>) -> Complex<T> {
    beta * coherent_overlap(alpha, beta)
}

/// `<alpha|a+ a|beta>`.
pub fn coherent_number<T: Real>(alpha: Complex<T>, beta: Complex<T>) -> Complex<T> {
    alpha.conj() * beta * coherent_overlap(alpha, beta)
}

/// Variational parameters `{Phi(m), v_l}` at quasimomentum `2 pi j / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyozawaState<T> {
    kappa_index: usize,
    phi: Vec<Complex<T>>,
    v: Vec<Complex<T>>,
}

impl<T: Real> ToyozawaState<T> {
    /// Builds a state from residue-ordered `phi` and `v`.
    pub fn new(kappa_index: usize, phi: Vec<Complex<T>>, v: Vec<Complex<T>>) -> Result<Self> {
        let n = phi.len();
        if n < 2 {
            return Err(Error::InvalidParams(format!("ansatz needs at least 2 sites, got {n}")));
        }
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        let finite = |z: &Complex<T>| z.re.is_finite() && z.im.is_finite();
        if !phi.iter().all(finite) || !v.iter().all(finite) {
            return Err(Error::InvalidParams("non-finite variational parameter".into()));
        }
        Ok(ToyozawaState {
            kappa_index: kappa_index % n,
            phi,
            v,
        })
    }

    /// Bare excitation: `Phi = delta_{m0}`, no phonon cloud.
    pub fn free(n_sites: usize, kappa_index: usize) -> Self {
        let mut phi = vec![czero(); n_sites];
        phi[0] = cplx(T::one(), T::zero());
        ToyozawaState {
            kappa_index: kappa_index % n_sites,
            phi,
            v: vec![czero(); n_sites],
        }
    }

    /// Exact `t0 = 0` solution: single-site cloud displaced by `-g_H`.
    pub fn lang_firsov(n_sites: usize, kappa_index: usize, g_h: T) -> Self {
        let mut s = Self::free(n_sites, kappa_index);
        s.v[0] = cplx(-g_h, T::zero());
        s
    }

    pub fn n_sites(&self) -> usize {
        self.phi.len()
    }

    pub fn kappa_index(&self) -> usize {
        self.kappa_index
    }

    pub fn kappa(&self) -> T {
        kappa(self.kappa_index, self.n_sites())
    }

    /// `Phi` by residue of the offset.
    pub fn phi(&self) -> &[Complex<T>] {
        &self.phi
    }

    /// `v` by residue of the offset.
    pub fn v(&self) -> &[Complex<T>] {
        &self.v
    }

    pub fn phi_at(&self, m: isize) -> Complex<T> {
        self.phi[wrap(m, self.n_sites())]
    }

    pub fn v_at(&self, l: isize) -> Complex<T> {
        self.v[wrap(l, self.n_sites())]
    }

    /// Packs `(Re Phi, Im Phi, Re v, Im v)`.
    pub fn to_params(&self) -> Vec<T> {
        let mut x = Vec::with_capacity(4 * self.n_sites());
        x.extend(self.phi.iter().map(|z| z.re));
        x.extend(self.phi.iter().map(|z| z.im));
        x.extend(self.v.iter().map(|z| z.re));
        x.extend(self.v.iter().map(|z| z.im));
        x
    }

    pub fn from_params(n_sites: usize, kappa_index: usize, x: &[T]) -> Result<Self> {
        if x.len() != 4 * n_sites {
            return Err(Error::DimensionMismatch {
                expected: 4 * n_sites,
                got: x.len(),
            });
        }
        let n = n_sites;
        let phi = (0..n).map(|i| cplx(x[i], x[n + i])).collect();
        let v = (0..n).map(|i| cplx(x[2 * n + i], x[3 * n + i])).collect();
        Self::new(kappa_index, phi, v)
    }

    /// Fixes the redundancies of the ansatz without changing the state: the
    /// joint offset shift `(Phi(m+s), v_{l+s})` puts the largest cloud
    /// displacement at `l = 0`, a global phase makes `Phi(0)` real and
    /// non-negative, and `Phi` is rescaled to unit norm.
    pub fn canonicalize(&mut self) -> Result<()> {
        let n = self.n_sites();
        let mut best = 0;
        for l in 1..n {
            if self.v[l].norm_sqr() > self.v[best].norm_sqr() {
                best = l;
            }
        }
        self.phi.rotate_left(best);
        self.v.rotate_left(best);
        let p0 = self.phi[0];
        if p0.norm() > T::zero() {
            let u = p0.conj() / p0.norm();
            self.phi.iter_mut().for_each(|z| *z *= u);
            self.phi[0] = cplx(p0.norm(), T::zero());
        }
        let k = Kernel::new(self);
        let norm = k.norm(self);
        if !(norm > T::lit(DEGENERATE_NORM)) {
            return Err(Error::DegenerateNorm(norm.as_f64()));
        }
        let s = T::one() / norm.sqrt();
        self.phi.iter_mut().for_each(|z| *z *= s);
        Ok(())
    }
}

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Cloud overlaps `S(d)` and their profile weights `A(d)` for all `d`.
struct Kernel<T> {
    s: Vec<Complex<T>>,
}

impl<T: Real> Kernel<T> {
    fn new(ts: &ToyozawaState<T>) -> Self {
        let n = ts.n_sites();
        let s = (0..n)
            .map(|d| {
                (0..n).fold(cplx(T::one(), T::zero()), |acc, l| {
                    acc * coherent_overlap(ts.v[l], ts.v[(l + n - d) % n])
                })
            })
            .collect();
        Kernel { s }
    }

    /// `Phi*(m) Phi(m-d) S(d)` summed over `m` and `d`, weighted by `f(m, d)`.
    fn weighted<F>(&self, ts: &ToyozawaState<T>, mut f: F) -> Complex<T>
    where
        F: FnMut(usize, usize) -> Complex<T>,
    {
        let n = ts.n_sites();
        let mut acc = czero::<T>();
        for d in 0..n {
            let mut inner = czero::<T>();
            for m in 0..n {
                let w = ts.phi[m].conj() * ts.phi[(m + n - d) % n];
                if w != czero() {
                    inner += w * f(m, d);
                }
            }
            acc += inner * self.s[d];
        }
        acc
    }

    fn norm(&self, ts: &ToyozawaState<T>) -> T {
        self.weighted(ts, |_, _| cplx(T::one(), T::zero())).re
    }
}

/// Returns `<psi|psi>` and the Rayleigh quotient `<psi|H|psi>/<psi|psi>`.
pub fn norm_and_energy<T: Real>(ts: &ToyozawaState<T>, hp: &HolsteinParams<T>) -> Result<(T, T)> {
    check_sites(ts, hp)?;
    let n = ts.n_sites();
    let k = Kernel::new(ts);
    let norm = k.norm(ts);
    if !(norm > T::lit(DEGENERATE_NORM)) {
        return Err(Error::DegenerateNorm(norm.as_f64()));
    }
    let dw = hp.domega();
    let g = hp.g_h();
    let t0 = hp.t0();
    let v = &ts.v;
    // P(d) = sum_l v_l* v_{l-d}
    let p: Vec<Complex<T>> = (0..n)
        .map(|d| (0..n).map(|l| v[l].conj() * v[(l + n - d) % n]).fold(czero(), |a, b| a + b))
        .collect();
    let mut energy = k.weighted(ts, |m, d| {
        let shifted = v[(m + n - d) % n] + v[m].conj();
        (p[d] + shifted * g) * dw
    });
    if t0 != T::zero() {
        let kap = ts.kappa();
        let (fwd, bwd) = (phase(kap), phase(-kap));
        let phi = &ts.phi;
        for d in 0..n {
            let mut h = czero::<T>();
            for m in 0..n {
                let src = phi[(m + n - d) % n];
                h += fwd * phi[(m + 1) % n].conj() * src;
                h += bwd * phi[m].conj() * phi[(m + 1 + n - d) % n];
            }
            energy -= h * k.s[d] * t0;
        }
    }
    Ok((norm, energy.re / norm))
}

/// Gradient of the energy with respect to `(Re Phi, Im Phi, Re v, Im v)` by
/// central differences with relative step `1e-6`.
pub fn gradient<T: Real>(ts: &ToyozawaState<T>, hp: &HolsteinParams<T>) -> Result<Vec<T>> {
    check_sites(ts, hp)?;
    let n = ts.n_sites();
    let x = ts.to_params();
    let f = |x: &[T]| -> Result<T> {
        let s = ToyozawaState::from_params(n, ts.kappa_index, x)?;
        Ok(norm_and_energy(&s, hp)?.1)
    };
    fd_gradient(&x, f)
}

pub(crate) fn fd_gradient<T: Real, F>(x: &[T], f: F) -> Result<Vec<T>>
where
    F: Fn(&[T]) -> Result<T>,
{
    let rel = T::lit(1e-6);
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = rel * x[i].abs().max(T::one());
        let xi = x[i];
        probe[i] = xi + h;
        let up = f(&probe)?;
        probe[i] = xi - h;
        let down = f(&probe)?;
        probe[i] = xi;
        g.push((up - down) / (h + h));
    }
    Ok(g)
}

fn check_sites<T: Real>(ts: &ToyozawaState<T>, hp: &HolsteinParams<T>) -> Result<()> {
    if ts.n_sites() != hp.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: hp.n_sites(),
            got: ts.n_sites(),
        });
    }
    Ok(())
}

/// Closed-form observables of the normalized trial state.
///
/// Site variances average over the ring (the state is translation
/// invariant); the measurement-based ones evaluate the quadrature at the
/// excitation's site.
pub fn moments<T: Real>(ts: &ToyozawaState<T>) -> Result<Moments<T>> {
    let n = ts.n_sites();
    let k = Kernel::new(ts);
    let norm = k.norm(ts);
    if !(norm > T::lit(DEGENERATE_NORM)) {
        return Err(Error::DegenerateNorm(norm.as_f64()));
    }
    let v = &ts.v;
    let cloud: T = v.iter().map(|z| z.norm_sqr()).sum();
    let total_phi = ts.phi.iter().fold(czero::<T>(), |a, b| a + b);
    let residue = total_phi.norm_sqr() * (-cloud).exp() / norm;

    let inv_n = T::one() / T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let rt = half.sqrt();
    let i = cplx(T::zero(), T::one());
    let one = cplx(T::one(), T::zero());
    // alpha = v*_r (bra cloud), beta = v_{r-d} (ket cloud) at the same site
    let site = |f: &dyn Fn(Complex<T>, Complex<T>) -> Complex<T>| {
        k.weighted(ts, |_, d| {
            (0..n)
                .map(|r| f(v[r].conj(), v[(r + n - d) % n]))
                .fold(czero(), |a, b| a + b)
                * inv_n
        })
        .re
            / norm
    };
    let at_excitation = |f: &dyn Fn(Complex<T>, Complex<T>) -> Complex<T>| {
        k.weighted(ts, |m, d| f(v[m].conj(), v[(m + n - d) % n])).re / norm
    };
    let x1 = |a: Complex<T>, b: Complex<T>| (a + b) * rt;
    let x2 = |a: Complex<T>, b: Complex<T>| ((a + b) * (a + b) + one) * half;
    let p1 = |a: Complex<T>, b: Complex<T>| -i * (b - a) * rt;
    let p2 = |a: Complex<T>, b: Complex<T>| (one - (b - a) * (b - a)) * half;
    let num = |a: Complex<T>, b: Complex<T>| a * b;

    let var = |m1: T, m2: T| (m2 - m1 * m1).max(T::zero());
    let phonon_number = site(&num) * T::from_usize_lossy(n);
    Ok(Moments {
        residue,
        phonon_number,
        sx: var(site(&x1), site(&x2)),
        sp: var(site(&p1), site(&p2)),
        sxm: var(at_excitation(&x1), at_excitation(&x2)),
        spm: var(at_excitation(&p1), at_excitation(&p2)),
    })
}

/// A trial state expanded in a truncated Fock basis.
#[derive(Debug, Clone)]
pub struct Materialized<T> {
    pub state: StateVector<T>,
    /// Probability weight of the exact trial state outside the cutoff.
    pub truncation_weight: T,
}

impl<T: Real> Materialized<T> {
    pub fn truncation_warning(&self) -> bool {
        self.truncation_weight > T::lit(TRUNCATION_WARNING)
    }
}

/// Expands the ansatz in `basis` (one-excitation sector) and normalizes it.
pub fn to_state_vector<T: Real>(ts: &ToyozawaState<T>, basis: &Arc<FockBasis>) -> Result<Materialized<T>> {
    let n = ts.n_sites();
    if basis.n_sites() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: basis.n_sites(),
        });
    }
    let one_offset = basis.one_offset().ok_or_else(|| {
        Error::SectorMismatch("trial states need a one-excitation basis".into())
    })?;
    let cutoff = basis.cutoff();
    // <k|v_l> for k = 0..=cutoff
    let amp: Vec<Vec<Complex<T>>> = ts
        .v
        .iter()
        .map(|&z| {
            let mut row = Vec::with_capacity(cutoff + 1);
            let mut a = cplx((-z.norm_sqr() * T::lit(0.5)).exp(), T::zero());
            for q in 0..=cutoff {
                row.push(a);
                a = a * z / T::from_usize_lossy(q + 1).sqrt();
            }
            row
        })
        .collect();
    let kap = ts.kappa();
    let inv_sqrt_n = T::one() / T::from_usize_lossy(n).sqrt();
    let bloch: Vec<Complex<T>> = (0..n)
        .map(|j| phase(-kap * T::from_usize_lossy(j)) * inv_sqrt_n)
        .collect();
    let mut psi = StateVector::<T>::zeros(basis.clone());
    let out = psi.amplitudes_mut();
    let pdim = basis.phonon_dim();
    for p in 0..pdim {
        let m = basis.phonons(p);
        for origin in 0..n {
            // cloud centred on `origin`: site t carries v_{t - origin}
            let mut cloud = cplx(T::one(), T::zero());
            for (t, &q) in m.iter().enumerate() {
                cloud *= amp[(t + n - origin) % n][q as usize];
            }
            if cloud == czero() {
                continue;
            }
            for s in 0..n {
                let off = (s + n - origin) % n;
                // e^{-ik n} e^{-ik m} = e^{-ik s}
                let c = ts.phi[off] * bloch[s] * cloud;
                out[one_offset + s * pdim + p] += c;
            }
        }
    }
    let exact = Kernel::new(ts).norm(ts);
    if !(exact > T::lit(DEGENERATE_NORM)) {
        return Err(Error::DegenerateNorm(exact.as_f64()));
    }
    let kept = psi.norm().powi(2);
    let truncation_weight = ((exact - kept) / exact).max(T::zero());
    Ok(Materialized {
        state: psi.normalized()?,
        truncation_weight,
    })
}

#[derive(Serialize, Deserialize)]
struct Repr<T> {
    #[serde(rename = "N")]
    n_sites: usize,
    kappa_index: usize,
    phi: Vec<[T; 2]>,
    v: Vec<[T; 2]>,
}

/// Offset `m` for the `i`-th entry of the serialized lists, which run
/// `m = -floor(N/2) ..= ceil(N/2) - 1`.
fn listed_offset(i: usize, n: usize) -> isize {
    i as isize - (n / 2) as isize
}

impl<T: Real + Serialize> Serialize for ToyozawaState<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n_sites();
        let list = |xs: &[Complex<T>]| {
            (0..n)
                .map(|i| {
                    let z = xs[wrap(listed_offset(i, n), n)];
                    [z.re, z.im]
                })
                .collect()
        };
        Repr {
            n_sites: n,
            kappa_index: self.kappa_index,
            phi: list(&self.phi),
            v: list(&self.v),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for ToyozawaState<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = Repr::<T>::deserialize(d)?;
        let n = r.n_sites;
        if r.phi.len() != n || r.v.len() != n {
            return Err(serde::de::Error::custom(format!(
                "expected {n} entries in phi and v, got {} and {}",
                r.phi.len(),
                r.v.len()
            )));
        }
        let unlist = |xs: &[[T; 2]]| {
            let mut out = vec![czero(); n];
            for (i, [re, im]) in xs.iter().enumerate() {
                out[wrap(listed_offset(i, n), n)] = cplx(*re, *im);
            }
            out
        };
        ToyozawaState::new(r.kappa_index, unlist(&r.phi), unlist(&r.v)).map_err(serde::de::Error::custom)
    }
}
