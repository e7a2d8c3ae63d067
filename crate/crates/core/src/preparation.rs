//! Microwave preparation of polaron states.
//!
//! The pump `2 beta_p cos(2 pi f_p t) (c+_q + c_q)` with
//! `c+_q = N^{-1/2} sum_n e^{-iqn} c+_n` moves the phonon vacuum of the empty
//! lattice into the one-excitation sector. Its matrix element to a dressed
//! state is the overlap with the bare Bloch state, so on resonance the
//! transfer runs at rate `beta_p sqrt(Z)`.
//!
//! Time is in microseconds internally (`d psi/dt = -2 pi i H psi` with `H` in
//! MHz) and reported in nanoseconds.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circuit::HolsteinParams;
use crate::error::{Error, Result};
use crate::fock::{build_basis, build_hamiltonian, expectation, kappa, FockBasis, Sector, SparseOperator, StateVector};
use crate::observables::format_sig;
use crate::scalar::{cplx, czero, phase, Real};

/// Norm drift tolerated over a propagation.
pub const NORM_DRIFT_BOUND: f64 = 1e-6;

/// Residues below this make the preparation time diverge.
pub const MIN_RESIDUE: f64 = 1e-6;

/// Steps per period of the fastest frequency in the problem.
pub const STEPS_PER_PERIOD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpParams<T> {
    /// Pump wave vector index `j` in `q = 2 pi j / N`.
    pub q_index: usize,
    /// Pump amplitude in MHz.
    pub beta_p: T,
    /// Pump frequency in MHz; `None` tunes to the target's energy above the
    /// empty lattice.
    pub omega_p: Option<T>,
    pub duration_ns: T,
    /// Integrator step; `None` picks the largest allowed step.
    pub dt_ns: Option<T>,
    /// Record every `stride`-th step.
    pub stride: usize,
}

impl<T: Real> PumpParams<T> {
    pub fn new(q_index: usize, beta_p: T, duration_ns: T) -> Self {
        PumpParams {
            q_index,
            beta_p,
            omega_p: None,
            duration_ns,
            dt_ns: None,
            stride: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta_p >= T::zero()) {
            return Err(Error::InvalidParams(format!("pump amplitude must be >= 0, got {}", self.beta_p)));
        }
        if !(self.duration_ns > T::zero()) {
            return Err(Error::NonPositiveInput {
                name: "duration_ns",
                value: self.duration_ns.as_f64(),
            });
        }
        if let Some(dt) = self.dt_ns {
            if !(dt > T::zero()) || dt > self.duration_ns {
                return Err(Error::InvalidParams(format!(
                    "time step {dt} ns must lie in (0, duration]"
                )));
            }
        }
        if self.stride == 0 {
            return Err(Error::InvalidParams("output stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// `<psi|c+_q|G0>`, the pump matrix element from the empty lattice.
pub fn transition_element<T: Real>(psi: &StateVector<T>, q_index: usize) -> Result<Complex<T>> {
    let basis = psi.basis();
    if basis.one_offset().is_none() {
        return Err(Error::SectorMismatch("transition target must have an excitation".into()));
    }
    let n = basis.n_sites();
    let q = kappa::<T>(q_index, n);
    let vacuum = vec![0u16; n];
    let norm = psi.norm();
    let amps = psi.amplitudes();
    let mut acc = czero::<T>();
    for s in 0..n {
        let i = basis.index_of(Some(s), &vacuum).expect("phonon vacuum is always in the basis");
        acc += amps[i].conj() * phase(-q * T::from_usize_lossy(s));
    }
    Ok(acc / (T::from_usize_lossy(n).sqrt() * norm))
}

/// Resonant transfer time `1 / (4 beta_p sqrt Z)` in ns for `beta_p` in MHz.
pub fn rabi_time<T: Real>(beta_p: T, residue: T) -> Result<T> {
    if !(beta_p > T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "beta_p",
            value: beta_p.as_f64(),
        });
    }
    if !(residue >= T::lit(MIN_RESIDUE)) {
        return Err(Error::ZeroResidue(residue.as_f64()));
    }
    if residue > T::one() + T::tol(1e-12, 16.0) {
        return Err(Error::InvalidParams(format!("residue {residue} exceeds 1")));
    }
    Ok(T::lit(1000.0) / (T::lit(4.0) * beta_p * residue.sqrt()))
}

/// Qubit-frame pump amplitude `-(g / delta) eps_p` for a resonator drive
/// `eps_p`.
pub fn qubit_frame_amplitude<T: Real>(g: T, delta: T, eps_p: T) -> Result<T> {
    if delta == T::zero() {
        return Err(Error::ZeroDetuning("qubit-resonator detuning is zero".into()));
    }
    Ok(-(g / delta) * eps_p)
}

/// `c+_q + c_q` on a basis holding both sectors.
pub fn pump_operator<T: Real>(basis: &FockBasis, q_index: usize) -> Result<SparseOperator<T>> {
    let (Some(zero), Some(one)) = (basis.zero_offset(), basis.one_offset()) else {
        return Err(Error::SectorMismatch("pump couples the empty and one-excitation sectors".into()));
    };
    let n = basis.n_sites();
    let q = kappa::<T>(q_index, n);
    let inv = T::one() / T::from_usize_lossy(n).sqrt();
    let pdim = basis.phonon_dim();
    let mut triplets = Vec::with_capacity(2 * n * pdim);
    for s in 0..n {
        let w = phase(-q * T::from_usize_lossy(s)) * inv;
        for p in 0..pdim {
            let (r, c) = (one + s * pdim + p, zero + p);
            triplets.push((r, c, w));
            triplets.push((c, r, w.conj()));
        }
    }
    Ok(SparseOperator::from_triplets(basis.dimension(), triplets, true))
}

/// Copies a one-excitation state into a basis holding both sectors.
pub fn lift_to_both<T: Real>(psi: &StateVector<T>, both: &Arc<FockBasis>) -> Result<StateVector<T>> {
    let src = psi.basis();
    let (Some(from), Some(to)) = (src.one_offset(), both.one_offset()) else {
        return Err(Error::SectorMismatch("lift needs one-excitation states".into()));
    };
    if src.n_sites() != both.n_sites() || src.cutoff() != both.cutoff() || both.zero_offset().is_none() {
        return Err(Error::SectorMismatch("target basis must hold both sectors at the same size".into()));
    }
    let len = src.n_sites() * src.phonon_dim();
    let mut out = StateVector::zeros(both.clone());
    out.amplitudes_mut()[to..to + len].copy_from_slice(&psi.amplitudes()[from..from + len]);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub t_ns: T,
    pub fidelity: T,
    pub norm_drift: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpTrace<T> {
    pub samples: Vec<Sample<T>>,
    pub dt_ns: T,
    /// Pump frequency used, MHz.
    pub omega_p: T,
    pub steps: usize,
}

impl<T: Real> PumpTrace<T> {
    /// Sample of highest fidelity.
    pub fn peak(&self) -> Sample<T> {
        *self
            .samples
            .iter()
            .fold(None::<&Sample<T>>, |best, s| match best {
                Some(b) if b.fidelity >= s.fidelity => Some(b),
                _ => Some(s),
            })
            .expect("trace holds the initial sample")
    }

    pub fn max_norm_drift(&self) -> T {
        self.samples.iter().map(|s| s.norm_drift).fold(T::zero(), T::max)
    }

    /// Writes `t_ns,fidelity,norm_drift` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_ns,fidelity,norm_drift")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{}",
                format_sig(s.t_ns.as_f64()),
                format_sig(s.fidelity.as_f64()),
                format_sig(s.norm_drift.as_f64())
            )?;
        }
        Ok(())
    }
}

/// Propagates the empty-lattice vacuum under the Holstein Hamiltonian plus
/// the full cosine pump with classic fixed-step RK4 and records the
/// fidelity with `target` (a one-excitation state).
pub fn simulate_pump<T: Real>(
    hp: &HolsteinParams<T>,
    pp: &PumpParams<T>,
    target: &StateVector<T>,
) -> Result<PumpTrace<T>> {
    pp.validate()?;
    let tb = target.basis();
    if tb.n_sites() != hp.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: hp.n_sites(),
            got: tb.n_sites(),
        });
    }
    let both = Arc::new(build_basis(hp.n_sites(), tb.cutoff(), Sector::Both)?);
    let target = lift_to_both(&target.clone().normalized()?, &both)?;
    let h = build_hamiltonian(hp, &both)?;
    let v = pump_operator::<T>(&both, pp.q_index)?;

    let omega_p = match pp.omega_p {
        Some(w) => w,
        // empty-lattice vacuum sits at zero energy
        None => expectation(&h, &target)?.re.abs(),
    };
    let f_max = h.gershgorin_bound() + omega_p + T::lit(2.0) * pp.beta_p;
    let dt_max_ns = T::lit(1000.0) / (T::lit(STEPS_PER_PERIOD) * f_max);
    let dt_ns = match pp.dt_ns {
        Some(dt) if dt > dt_max_ns * (T::one() + T::lit(1e-12)) => {
            return Err(Error::InvalidParams(format!(
                "time step {dt} ns exceeds the stability limit {dt_max_ns} ns"
            )))
        }
        Some(dt) => dt,
        None => dt_max_ns,
    };
    let steps = (pp.duration_ns / dt_ns).ceil().to_usize().unwrap_or(usize::MAX);
    let dt = pp.duration_ns / T::from_usize_lossy(steps) / T::lit(1000.0);

    let mut psi = vec![czero::<T>(); both.dimension()];
    psi[both.index_of(None, &vec![0u16; hp.n_sites()]).expect("vacuum")] = cplx(T::one(), T::zero());

    let two_pi = T::lit(2.0) * T::PI();
    let drive = |t: T| T::lit(2.0) * pp.beta_p * (two_pi * omega_p * t).cos();
    // k = -2 pi i (H + b(t) V) x
    let deriv = |t: T, x: &[Complex<T>], out: &mut [Complex<T>]| {
        h.matvec(x, out);
        let b = drive(t);
        if b != T::zero() {
            v.matvec_add(cplx(b, T::zero()), x, out);
        }
        let f = cplx(T::zero(), -two_pi);
        out.iter_mut().for_each(|z| *z *= f);
    };

    let fidelity = |x: &[Complex<T>]| {
        target
            .amplitudes()
            .iter()
            .zip(x)
            .fold(czero::<T>(), |a, (t, y)| a + t.conj() * y)
            .norm_sqr()
    };
    let drift = |x: &[Complex<T>]| (x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt() - T::one()).abs();
    let bound = T::lit(NORM_DRIFT_BOUND);

    let dim = psi.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![czero(); dim], vec![czero(); dim], vec![czero(); dim], vec![czero(); dim]);
    let mut tmp = vec![czero::<T>(); dim];
    let mut samples = vec![Sample {
        t_ns: T::zero(),
        fidelity: fidelity(&psi),
        norm_drift: T::zero(),
    }];
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    for step in 0..steps {
        let t = T::from_usize_lossy(step) * dt;
        deriv(t, &psi, &mut k1);
        for i in 0..dim {
            tmp[i] = psi[i] + k1[i] * (dt * half);
        }
        deriv(t + dt * half, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = psi[i] + k2[i] * (dt * half);
        }
        deriv(t + dt * half, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = psi[i] + k3[i] * dt;
        }
        deriv(t + dt, &tmp, &mut k4);
        for i in 0..dim {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * (dt * sixth);
        }
        let d = drift(&psi);
        if !(d <= bound) {
            return Err(Error::StepTooLarge {
                drift: d.as_f64(),
                bound: NORM_DRIFT_BOUND,
            });
        }
        if (step + 1) % pp.stride == 0 || step + 1 == steps {
            samples.push(Sample {
                t_ns: T::from_usize_lossy(step + 1) * dt * T::lit(1000.0),
                fidelity: fidelity(&psi),
                norm_drift: d,
            });
        }
    }
    Ok(PumpTrace {
        samples,
        dt_ns: dt * T::lit(1000.0),
        omega_p,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::EigenOptions;
    use crate::fock::momentum_ground_state;
    use crate::observables::quasiparticle_residue;
    use crate::toyozawa::{to_state_vector, ToyozawaState};

    fn hp(n: usize, domega: f64, t0: f64, g: f64) -> HolsteinParams<f64> {
        HolsteinParams::new(n, domega, t0, g).unwrap()
    }

    fn polaron(p: &HolsteinParams<f64>, m: usize, k: usize) -> StateVector<f64> {
        let basis = Arc::new(build_basis(p.n_sites(), m, Sector::OneExcitation).unwrap());
        momentum_ground_state(p, &basis, k, &EigenOptions::default()).unwrap().1
    }

    #[test]
    fn rabi_time_examples() {
        assert!((rabi_time(20.0f64, 1.0).unwrap() - 12.5).abs() < 1e-12);
        assert!((rabi_time(20.0f64, 0.7).unwrap() - 14.9404).abs() < 1e-4);
        assert!(matches!(rabi_time(20.0f64, 1e-7), Err(Error::ZeroResidue(_))));
        assert!(matches!(rabi_time(0.0f64, 0.5), Err(Error::NonPositiveInput { .. })));
        assert!(rabi_time(20.0f64, 1.5).is_err());
    }

    #[test]
    fn qubit_frame_factor() {
        assert!((qubit_frame_amplitude(200.0f64, 4000.0, 400.0).unwrap() + 20.0).abs() < 1e-12);
        assert!(qubit_frame_amplitude(200.0f64, 0.0, 400.0).is_err());
    }

    #[test]
    fn bloch_state_transition_is_unity() {
        let basis = Arc::new(build_basis(4, 2, Sector::OneExcitation).unwrap());
        for k in 0..4 {
            let psi = to_state_vector(&ToyozawaState::<f64>::free(4, k), &basis).unwrap().state;
            for q in 0..4 {
                let w = transition_element(&psi, q).unwrap().norm();
                let expect = if q == k { 1.0 } else { 0.0 };
                assert!((w - expect).abs() < 1e-12, "k {k} q {q}");
            }
        }
    }

    #[test]
    fn lang_firsov_element_and_selection_rule() {
        let g = 1.25f64;
        let psi = polaron(&hp(4, 80.0, 0.0, g), 24, 0);
        let w = transition_element(&psi, 0).unwrap().norm();
        assert!((w - (-g * g / 2.0).exp()).abs() < 1e-6);
        let p = hp(4, 80.0, 80.0, 1.0);
        for k in 0..4 {
            let psi = polaron(&p, 8, k);
            let z = quasiparticle_residue(&psi, k).unwrap();
            for q in 0..4 {
                let w = transition_element(&psi, q).unwrap();
                if q == k {
                    assert!((w.norm_sqr() - z).abs() < 1e-10);
                } else {
                    assert!(w.norm() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn pump_operator_structure() {
        let basis = build_basis(3, 2, Sector::Both).unwrap();
        let v = pump_operator::<f64>(&basis, 1).unwrap();
        assert_eq!(v.hermiticity_defect(), 0.0);
        assert_eq!(v.nnz(), 2 * 3 * basis.phonon_dim());
        let one = build_basis(3, 2, Sector::OneExcitation).unwrap();
        assert!(pump_operator::<f64>(&one, 0).is_err());
    }

    #[test]
    fn zero_pump_leaves_vacuum() {
        let p = hp(2, 80.0, 40.0, 0.5);
        let target = polaron(&p, 2, 0);
        let mut pp = PumpParams::new(0, 0.0, 5.0);
        pp.stride = 50;
        let trace = simulate_pump(&p, &pp, &target).unwrap();
        assert!(trace.samples.iter().all(|s| s.fidelity == 0.0));
        assert!(trace.max_norm_drift() < 1e-12);
    }

    #[test]
    fn step_limit_is_enforced() {
        let p = hp(2, 80.0, 40.0, 0.5);
        let target = polaron(&p, 2, 0);
        let mut pp = PumpParams::new(0, 10.0, 5.0);
        pp.dt_ns = Some(1.0);
        assert!(matches!(simulate_pump(&p, &pp, &target), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn free_rabi_transfer() {
        let p = hp(4, 80.0, 80.0, 0.0);
        let target = polaron(&p, 2, 0);
        let beta = 10.0;
        let tau = rabi_time(beta, 1.0).unwrap();
        let mut pp = PumpParams::new(0, beta, 2.0 * tau);
        pp.stride = 5;
        let trace = simulate_pump(&p, &pp, &target).unwrap();
        let peak = trace.peak();
        assert!(peak.fidelity > 0.99, "{}", peak.fidelity);
        assert!((peak.t_ns - tau).abs() < 0.1 * tau, "{} vs {tau}", peak.t_ns);
        assert!(trace.max_norm_drift() < 1e-6);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_ns,fidelity,norm_drift\n"));
        assert_eq!(text.lines().count(), trace.samples.len() + 1);
    }
}
