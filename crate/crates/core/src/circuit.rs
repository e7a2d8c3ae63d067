//! Circuit-QED device parameters and their mapping onto the Holstein model.
//!
//! Every frequency is an ordinary frequency in MHz (the `omega / 2pi` value);
//! energies are expressed in the same unit with `hbar = 1`. Because the
//! effective couplings are ratios of frequencies the mapping formulas are
//! unit-agnostic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Planck constant in J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Energy in joules to ordinary frequency in MHz.
pub fn joules_to_mhz(energy: f64) -> f64 {
    energy / PLANCK / 1e6
}

/// Typical transmon phase displacement `dphi0^2`.
pub const DEFAULT_DPHI0_SQ: f64 = 0.15;

/// Relative width of the adiabatic/anti-adiabatic boundary band.
pub const REGIME_TIE_EPS: f64 = 1e-9;

/// How the hopping amplitude is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hopping<T> {
    /// Hopping `t0` in MHz.
    Direct(T),
    /// Josephson energy `E_J` (MHz) of the coupling SQUID and the transmon
    /// phase displacement `dphi0^2`; `t0 = E_J * dphi0^2`.
    Josephson { e_j: T, dphi0_sq: T },
}

/// How the effective phonon frequency is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhononDetuning<T> {
    /// `domega` in MHz.
    Direct(T),
    /// Resonator and drive frequencies; `domega = omega_c + chi - omega_d`.
    Drive { omega_c: T, omega_d: T },
}

/// Raw device and drive parameters of the simulator array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams<T> {
    /// Qubit-resonator coupling `g` (MHz).
    pub g: T,
    /// Resonator-qubit detuning `omega_c - omega_z` (MHz).
    pub delta: T,
    /// Resonator drive amplitude (MHz).
    pub eps0: T,
    pub detuning: PhononDetuning<T>,
    pub hopping: Hopping<T>,
    pub n_sites: usize,
}

impl<T: Real> CircuitParams<T> {
    /// The parameter set used throughout the crossover discussion:
    /// `g = 200`, `delta = 4000`, `t0 = 80` MHz on four sites.
    pub fn reference(eps0: T, domega: T) -> Self {
        CircuitParams {
            g: T::lit(200.0),
            delta: T::lit(4000.0),
            eps0,
            detuning: PhononDetuning::Direct(domega),
            hopping: Hopping::Direct(T::lit(80.0)),
            n_sites: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > T::zero()) {
            return Err(Error::NonPositiveInput {
                name: "g",
                value: self.g.as_f64(),
            });
        }
        if self.n_sites < 2 {
            return Err(Error::InvalidParams(format!(
                "lattice needs at least 2 sites, got {}",
                self.n_sites
            )));
        }
        if !(self.eps0 >= T::zero()) {
            return Err(Error::InvalidParams(format!(
                "drive amplitude must be non-negative, got {}",
                self.eps0
            )));
        }
        if let Hopping::Josephson { e_j, dphi0_sq } = self.hopping {
            if !(dphi0_sq > T::zero() && dphi0_sq < T::one()) {
                return Err(Error::InvalidParams(format!(
                    "dphi0^2 must lie in (0, 1), got {dphi0_sq}"
                )));
            }
            if !(e_j >= T::zero()) {
                return Err(Error::InvalidParams(format!(
                    "E_J must be non-negative, got {e_j}"
                )));
            }
        }
        Ok(())
    }

    /// Hopping amplitude in MHz.
    pub fn t0(&self) -> T {
        match self.hopping {
            Hopping::Direct(t0) => t0,
            Hopping::Josephson { e_j, dphi0_sq } => e_j * dphi0_sq,
        }
    }

    /// Effective phonon frequency in MHz; needs the Stark shift when derived
    /// from the drive frequency.
    pub fn domega(&self) -> Result<T> {
        match self.detuning {
            PhononDetuning::Direct(d) => Ok(d),
            PhononDetuning::Drive { omega_c, omega_d } => {
                Ok(omega_c + stark_shift(self.g, self.delta)? - omega_d)
            }
        }
    }

    pub fn omega_c(&self) -> Option<T> {
        match self.detuning {
            PhononDetuning::Drive { omega_c, .. } => Some(omega_c),
            PhononDetuning::Direct(_) => None,
        }
    }
}

/// Effective Holstein-model parameters.
///
/// `lambda` and the adiabaticity ratio are always recomputed from the stored
/// fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolsteinParams<T> {
    n_sites: usize,
    domega: T,
    t0: T,
    g_h: T,
}

impl<T: Real> HolsteinParams<T> {
    pub fn new(n_sites: usize, domega: T, t0: T, g_h: T) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidParams(format!(
                "lattice needs at least 2 sites, got {n_sites}"
            )));
        }
        if !(domega > T::zero()) || !domega.is_finite() {
            return Err(Error::ZeroDetuning(format!(
                "phonon frequency must be positive, got {domega}"
            )));
        }
        if !(t0 >= T::zero()) || !t0.is_finite() {
            return Err(Error::InvalidParams(format!(
                "hopping must be non-negative, got {t0}"
            )));
        }
        if !g_h.is_finite() {
            return Err(Error::InvalidParams(format!("coupling must be finite, got {g_h}")));
        }
        Ok(HolsteinParams {
            n_sites,
            domega,
            t0,
            g_h,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn domega(&self) -> T {
        self.domega
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn g_h(&self) -> T {
        self.g_h
    }

    /// `g_H^2 domega / t0`; infinite at `t0 = 0` unless `g_H = 0`.
    pub fn lambda(&self) -> T {
        let num = self.g_h * self.g_h * self.domega;
        if num == T::zero() {
            T::zero()
        } else {
            num / self.t0
        }
    }

    /// `domega / t0`.
    pub fn adiabaticity(&self) -> T {
        self.domega / self.t0
    }

    pub fn with_n_sites(self, n_sites: usize) -> Result<Self> {
        Self::new(n_sites, self.domega, self.t0, self.g_h)
    }

    pub fn with_coupling(self, g_h: T) -> Result<Self> {
        Self::new(self.n_sites, self.domega, self.t0, g_h)
    }

    /// Largest of the model energy scales, used to form relative tolerances.
    pub fn energy_scale(&self) -> T {
        self.domega.max(self.t0).max(self.g_h.abs() * self.domega)
    }
}

#[derive(Serialize, Deserialize)]
struct HolsteinRepr<T> {
    n_sites: usize,
    domega: T,
    t0: T,
    g_h: T,
    #[serde(default, skip_deserializing)]
    lambda: Option<T>,
    #[serde(default, skip_deserializing)]
    adiabaticity: Option<T>,
}

impl<T: Real + Serialize> Serialize for HolsteinParams<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let finite = |x: T| if x.is_finite() { Some(x) } else { None };
        HolsteinRepr {
            n_sites: self.n_sites,
            domega: self.domega,
            t0: self.t0,
            g_h: self.g_h,
            lambda: finite(self.lambda()),
            adiabaticity: finite(self.adiabaticity()),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for HolsteinParams<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = HolsteinRepr::<T>::deserialize(d)?;
        HolsteinParams::new(r.n_sites, r.domega, r.t0, r.g_h).map_err(serde::de::Error::custom)
    }
}

/// Validity thresholds for the dispersive mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapOptions {
    /// `|delta|/g` below this is an error.
    pub dispersive_min: f64,
    /// `|delta|/g` below this is flagged in the regime report.
    pub dispersive_warn: f64,
    /// `eps0/domega` below this is flagged in the regime report.
    pub drive_ratio_min: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            dispersive_min: 10.0,
            dispersive_warn: 20.0,
            drive_ratio_min: 3.0,
        }
    }
}

/// Dispersive Stark shift `chi = g^2 / delta`.
pub fn stark_shift<T: Real>(g: T, delta: T) -> Result<T> {
    if delta == T::zero() {
        return Err(Error::ZeroDetuning("qubit-resonator detuning is zero".into()));
    }
    Ok(g * g / delta)
}

/// Dispersive-regime coupling `g_H = 2 eps0 chi / domega^2`.
pub fn holstein_coupling<T: Real>(eps0: T, chi: T, domega: T) -> T {
    T::lit(2.0) * eps0 * chi / (domega * domega)
}

/// Maps device parameters onto the effective Holstein model.
pub fn map_to_holstein<T: Real>(cp: &CircuitParams<T>, opts: &MapOptions) -> Result<HolsteinParams<T>> {
    cp.validate()?;
    let chi = stark_shift(cp.g, cp.delta)?;
    let ratio = cp.delta.abs() / cp.g;
    if ratio < T::lit(opts.dispersive_min) {
        return Err(Error::DispersiveViolation {
            ratio: ratio.as_f64(),
            threshold: opts.dispersive_min,
        });
    }
    let domega = cp.domega()?;
    if !(domega > T::zero()) {
        return Err(Error::ZeroDetuning(format!(
            "effective phonon frequency domega = {domega} must be positive"
        )));
    }
    let g_h = holstein_coupling(cp.eps0, chi, domega);
    HolsteinParams::new(cp.n_sites, domega, cp.t0(), g_h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Adiabatic,
    Antiadiabatic,
    Boundary,
}

impl Regime {
    pub fn from_ratio(ratio: f64) -> Self {
        if ratio < 1.0 - REGIME_TIE_EPS {
            Regime::Adiabatic
        } else if ratio > 1.0 + REGIME_TIE_EPS {
            Regime::Antiadiabatic
        } else {
            Regime::Boundary
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport<T> {
    pub chi: T,
    pub adiabaticity: Option<T>,
    pub regime: Regime,
    pub small_polaron: bool,
    pub dispersive_ok: bool,
    pub dispersive_ratio: T,
    pub drive_ok: bool,
    pub drive_ratio: T,
    /// Qubit frequency in the driven frame,
    /// `omega_z - chi - 2 chi (eps0/domega)^2`. Only known when the resonator
    /// frequency is part of the input. Reported for calibration, not used by
    /// any solver.
    pub modified_qubit_frequency: Option<T>,
}

pub fn classify_regime<T: Real>(
    cp: &CircuitParams<T>,
    hp: &HolsteinParams<T>,
    opts: &MapOptions,
) -> RegimeReport<T> {
    let chi = stark_shift(cp.g, cp.delta).unwrap_or_else(|_| T::infinity());
    let ratio = hp.adiabaticity();
    let dispersive_ratio = cp.delta.abs() / cp.g;
    let drive_ratio = cp.eps0 / hp.domega();
    let modified_qubit_frequency = cp.omega_c().map(|omega_c| {
        let omega_z = omega_c - cp.delta;
        let r = cp.eps0 / hp.domega();
        omega_z - chi - T::lit(2.0) * chi * r * r
    });
    RegimeReport {
        chi,
        adiabaticity: ratio.is_finite().then_some(ratio),
        regime: Regime::from_ratio(ratio.as_f64()),
        small_polaron: hp.g_h() > T::one() && hp.lambda() > T::one(),
        dispersive_ok: dispersive_ratio >= T::lit(opts.dispersive_warn),
        dispersive_ratio,
        drive_ok: drive_ratio >= T::lit(opts.drive_ratio_min),
        drive_ratio,
        modified_qubit_frequency,
    }
}

/// Flux-qubit realization: `t0 = M I_cir^2`, converted with the caller's
/// energy-to-MHz factor.
pub fn flux_qubit_hopping<T: Real>(mutual_inductance: T, current: T, energy_to_mhz: T) -> Result<T> {
    if !(mutual_inductance > T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "mutual_inductance",
            value: mutual_inductance.as_f64(),
        });
    }
    if !(current > T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "circulating_current",
            value: current.as_f64(),
        });
    }
    if !(energy_to_mhz > T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "energy_to_mhz",
            value: energy_to_mhz.as_f64(),
        });
    }
    Ok(mutual_inductance * current * current * energy_to_mhz)
}

/// Required ratio of the smallest model scale to the fastest decoherence rate.
pub const BUDGET_MARGIN: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetReport<T> {
    /// `min(domega, g_H domega, t0)` in MHz.
    pub model_scale: T,
    /// Qubit decoherence rate `1 / (2 pi T_qubit)` in MHz.
    pub qubit_rate: T,
    /// Resonator damping rate `omega_c / Q` in MHz.
    pub resonator_rate: T,
    pub margin: T,
    pub ok: bool,
}

/// Compares the model energy scales against qubit and resonator decoherence.
///
/// `t_qubit_us` and `quality_factor` may be infinite.
pub fn coherence_budget<T: Real>(
    hp: &HolsteinParams<T>,
    t_qubit_us: T,
    quality_factor: T,
    omega_c: T,
) -> Result<BudgetReport<T>> {
    for (name, value) in [
        ("t_qubit_us", t_qubit_us),
        ("quality_factor", quality_factor),
        ("omega_c", omega_c),
    ] {
        if !(value > T::zero()) {
            return Err(Error::NonPositiveInput {
                name,
                value: value.as_f64(),
            });
        }
    }
    let model_scale = hp
        .domega()
        .min(hp.g_h().abs() * hp.domega())
        .min(hp.t0());
    let qubit_rate = T::one() / (T::lit(2.0) * T::PI() * t_qubit_us);
    let resonator_rate = omega_c / quality_factor;
    let fastest = qubit_rate.max(resonator_rate);
    let margin = if fastest == T::zero() {
        T::infinity()
    } else {
        model_scale / fastest
    };
    Ok(BudgetReport {
        model_scale,
        qubit_rate,
        resonator_rate,
        margin,
        ok: margin >= T::lit(BUDGET_MARGIN),
    })
}

/// Leakage probability out of the qubit subspace, `(beta_p / anharmonicity)^2`
/// clamped to `[0, 1]`.
pub fn leakage_estimate<T: Real>(beta_p: T, anharmonicity: T) -> Result<T> {
    if !(anharmonicity > T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "anharmonicity",
            value: anharmonicity.as_f64(),
        });
    }
    let r = beta_p / anharmonicity;
    Ok((r * r).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(eps0: f64) -> CircuitParams<f64> {
        CircuitParams::reference(eps0, 80.0)
    }

    #[test]
    fn stark_shift_examples() {
        assert_eq!(stark_shift(200.0, 4000.0).unwrap(), 10.0);
        assert_eq!(stark_shift(0.0, 4000.0).unwrap(), 0.0);
        assert_eq!(stark_shift(200.0, -4000.0).unwrap(), -10.0);
        assert!(matches!(stark_shift(200.0, 0.0), Err(Error::ZeroDetuning(_))));
    }

    #[test]
    fn reference_mapping() {
        let hp = map_to_holstein(&reference(400.0), &MapOptions::default()).unwrap();
        assert!((hp.g_h() - 1.25).abs() < 1e-12);
        assert!((hp.lambda() - 1.5625).abs() < 1e-12);
        assert_eq!(hp.adiabaticity(), 1.0);
    }

    #[test]
    fn half_drive_halves_coupling() {
        let hp = map_to_holstein(&reference(200.0), &MapOptions::default()).unwrap();
        assert!((hp.g_h() - 0.625).abs() < 1e-12);
        assert!((hp.lambda() - 0.390625).abs() < 1e-12);
        let full = map_to_holstein(&reference(400.0), &MapOptions::default()).unwrap();
        assert_eq!(2.0 * hp.g_h(), full.g_h());
    }

    #[test]
    fn undriven_has_no_coupling() {
        let hp = map_to_holstein(&reference(0.0), &MapOptions::default()).unwrap();
        assert_eq!(hp.g_h(), 0.0);
        assert_eq!(hp.lambda(), 0.0);
    }

    #[test]
    fn drive_frequency_route_matches_direct() {
        let mut cp = reference(400.0);
        // omega_c + chi - omega_d = 6000 + 10 - 5930 = 80
        cp.detuning = PhononDetuning::Drive {
            omega_c: 6000.0,
            omega_d: 5930.0,
        };
        let hp = map_to_holstein(&cp, &MapOptions::default()).unwrap();
        assert!((hp.domega() - 80.0).abs() < 1e-12);
        assert!((hp.g_h() - 1.25).abs() < 1e-12);
        let report = classify_regime(&cp, &hp, &MapOptions::default());
        // omega_z = 2000, minus chi = 10, minus 2 * 10 * 25
        assert!((report.modified_qubit_frequency.unwrap() - 1490.0).abs() < 1e-9);
    }

    #[test]
    fn josephson_hopping() {
        let mut cp = reference(400.0);
        cp.hopping = Hopping::Josephson {
            e_j: 800.0,
            dphi0_sq: 0.1,
        };
        let hp = map_to_holstein(&cp, &MapOptions::default()).unwrap();
        assert!((hp.t0() - 80.0).abs() < 1e-12);
        cp.hopping = Hopping::Josephson {
            e_j: 800.0,
            dphi0_sq: 1.2,
        };
        assert!(matches!(
            map_to_holstein(&cp, &MapOptions::default()),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn mapping_rejects_bad_detuning() {
        let mut cp = reference(400.0);
        cp.detuning = PhononDetuning::Direct(0.0);
        assert!(matches!(
            map_to_holstein(&cp, &MapOptions::default()),
            Err(Error::ZeroDetuning(_))
        ));
        let mut cp = reference(400.0);
        cp.delta = 1500.0;
        assert!(matches!(
            map_to_holstein(&cp, &MapOptions::default()),
            Err(Error::DispersiveViolation { .. })
        ));
    }

    #[test]
    fn marginal_dispersion_is_flagged_not_rejected() {
        let mut cp = reference(400.0);
        cp.delta = 3000.0;
        let opts = MapOptions::default();
        let hp = map_to_holstein(&cp, &opts).unwrap();
        let r = classify_regime(&cp, &hp, &opts);
        assert!(!r.dispersive_ok);
        assert_eq!(r.dispersive_ratio, 15.0);
    }

    #[test]
    fn regime_report_examples() {
        let opts = MapOptions::default();
        let cp = reference(400.0);
        let hp = map_to_holstein(&cp, &opts).unwrap();
        let r = classify_regime(&cp, &hp, &opts);
        assert!(r.small_polaron);
        assert_eq!(r.regime, Regime::Boundary);
        assert!(r.drive_ok);
        assert_eq!(r.drive_ratio, 5.0);
        assert!(r.dispersive_ok);

        let cp = reference(0.0);
        let hp = map_to_holstein(&cp, &opts).unwrap();
        let r = classify_regime(&cp, &hp, &opts);
        assert!(!r.small_polaron);
        assert!(!r.drive_ok);

        assert_eq!(Regime::from_ratio(0.75), Regime::Adiabatic);
        assert_eq!(Regime::from_ratio(1.25), Regime::Antiadiabatic);
        assert_eq!(Regime::from_ratio(1.0 + 1e-12), Regime::Boundary);
    }

    #[test]
    fn flux_qubit_hopping_scaling() {
        // Choose M so that M I^2 = h * 80 MHz.
        let current = 300e-9;
        let m = PLANCK * 80e6 / (current * current);
        let scale = joules_to_mhz(1.0);
        let t0 = flux_qubit_hopping(m, current, scale).unwrap();
        assert!((t0 - 80.0).abs() < 1e-9);
        let t0_double = flux_qubit_hopping(m, 2.0 * current, scale).unwrap();
        assert!((t0_double / t0 - 4.0).abs() < 1e-12);
        assert!(matches!(
            flux_qubit_hopping(0.0, current, scale),
            Err(Error::NonPositiveInput { .. })
        ));
    }

    #[test]
    fn coherence_budget_examples() {
        let hp = HolsteinParams::<f64>::new(4, 80.0, 80.0, 1.25).unwrap();
        let b = coherence_budget(&hp, 10.0, 1e6, 6000.0).unwrap();
        assert_eq!(b.model_scale, 80.0);
        assert!((b.qubit_rate - 0.015_915_494).abs() < 1e-8);
        assert!((b.resonator_rate - 0.006).abs() < 1e-15);
        assert!(b.margin > 100.0 && b.ok);

        let b = coherence_budget(&hp, f64::INFINITY, f64::INFINITY, 6000.0).unwrap();
        assert!(b.margin.is_infinite() && b.ok);

        let b = coherence_budget(&hp, 0.001, 1e6, 6000.0).unwrap();
        assert!(b.qubit_rate > 159.0 && !b.ok);

        assert!(coherence_budget(&hp, 0.0, 1e6, 6000.0).is_err());
    }

    #[test]
    fn leakage_examples() {
        assert!((leakage_estimate::<f64>(25.0, 500.0).unwrap() - 0.0025).abs() < 1e-15);
        assert_eq!(leakage_estimate::<f64>(0.0, 500.0).unwrap(), 0.0);
        assert_eq!(leakage_estimate::<f64>(500.0, 500.0).unwrap(), 1.0);
        assert_eq!(leakage_estimate::<f64>(900.0, 500.0).unwrap(), 1.0);
        assert!(leakage_estimate::<f64>(25.0, 0.0).is_err());
    }

    #[test]
    fn holstein_params_serde_round_trip() {
        let hp = HolsteinParams::<f64>::new(4, 80.0, 80.0, 1.25).unwrap();
        let json = serde_json::to_string(&hp).unwrap();
        assert!(json.contains("\"lambda\":1.5625"));
        let back: HolsteinParams<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, hp);
        assert!(serde_json::from_str::<HolsteinParams<f64>>(
            r#"{"n_sites":4,"domega":0.0,"t0":80.0,"g_h":1.0}"#
        )
        .is_err());
    }

    #[test]
    fn lang_firsov_limit_lambda() {
        let hp = HolsteinParams::<f64>::new(4, 80.0, 0.0, 1.0).unwrap();
        assert!(hp.lambda().is_infinite());
        let hp = HolsteinParams::<f64>::new(4, 80.0, 0.0, 0.0).unwrap();
        assert_eq!(hp.lambda(), 0.0);
    }

    #[test]
    fn single_precision_mapping() {
        let cp = CircuitParams::<f32>::reference(400.0, 80.0);
        let hp = map_to_holstein(&cp, &MapOptions::default()).unwrap();
        assert!((hp.g_h() - 1.25).abs() < 1e-6);
    }
}
