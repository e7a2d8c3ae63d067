use std::path::{Path, PathBuf};

use holstein_core::circuit::{map_to_holstein, Hopping, MapOptions, PhononDetuning, DEFAULT_DPHI0_SQ};
use holstein_core::{CircuitParams64, HolsteinParams64};
use serde::{Deserialize, Serialize};

/// Rejected configuration; maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Ed,
    Toyozawa,
    #[default]
    Both,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Ed => "ed",
            Solver::Toyozawa => "toyozawa",
            Solver::Both => "both",
        }
    }

    pub fn runs_ed(self) -> bool {
        matches!(self, Solver::Ed | Solver::Both)
    }

    pub fn runs_toyozawa(self) -> bool {
        matches!(self, Solver::Toyozawa | Solver::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Fig2,
    Fig3,
}

/// Device parameters in MHz. Give either `t0` or `e_j` (with optional
/// `dphi0_sq`), and either `domega` or both `omega_c` and `omega_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitBlock {
    pub g: f64,
    pub delta: f64,
    #[serde(default)]
    pub eps0: f64,
    pub t0: Option<f64>,
    pub e_j: Option<f64>,
    pub dphi0_sq: Option<f64>,
    pub domega: Option<f64>,
    pub omega_c: Option<f64>,
    pub omega_d: Option<f64>,
}

impl CircuitBlock {
    pub fn reference() -> Self {
        CircuitBlock {
            g: 200.0,
            delta: 4000.0,
            eps0: 400.0,
            t0: Some(80.0),
            e_j: None,
            dphi0_sq: None,
            domega: Some(80.0),
            omega_c: None,
            omega_d: None,
        }
    }

    fn hopping(&self) -> Result<Hopping<f64>, ConfigError> {
        match (self.t0, self.e_j) {
            (Some(t0), None) => {
                if self.dphi0_sq.is_some() {
                    return Err(bad("dphi0_sq only applies together with e_j"));
                }
                Ok(Hopping::Direct(t0))
            }
            (None, Some(e_j)) => Ok(Hopping::Josephson {
                e_j,
                dphi0_sq: self.dphi0_sq.unwrap_or(DEFAULT_DPHI0_SQ),
            }),
            _ => Err(bad("circuit block needs exactly one of t0 or e_j")),
        }
    }

    fn detuning(&self) -> Result<PhononDetuning<f64>, ConfigError> {
        match (self.domega, self.omega_c, self.omega_d) {
            (Some(d), None, None) => Ok(PhononDetuning::Direct(d)),
            (None, Some(omega_c), Some(omega_d)) => Ok(PhononDetuning::Drive { omega_c, omega_d }),
            _ => Err(bad("circuit block needs domega, or omega_c together with omega_d")),
        }
    }

    pub fn to_params(&self, n_sites: usize) -> Result<CircuitParams64, ConfigError> {
        Ok(CircuitParams64 {
            g: self.g,
            delta: self.delta,
            eps0: self.eps0,
            detuning: self.detuning()?,
            hopping: self.hopping()?,
            n_sites,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolsteinBlock {
    pub domega: f64,
    pub t0: f64,
    #[serde(alias = "gH")]
    pub g_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Eps0,
    #[serde(alias = "gH")]
    GH,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl SweepSpec {
    /// Evenly spaced values with exact endpoints.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpBlock {
    pub beta_p: f64,
    /// Defaults to the target quasimomentum.
    pub q_index: Option<usize>,
    pub omega_p: Option<f64>,
    /// Defaults to twice the resonant transfer time.
    pub duration_ns: Option<f64>,
    pub dt_ns: Option<f64>,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

fn four() -> usize {
    4
}

fn ten() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub circuit: Option<CircuitBlock>,
    pub holstein: Option<HolsteinBlock>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default = "four", alias = "N")]
    pub n_sites: usize,
    #[serde(default = "ten", alias = "M")]
    pub cutoff: usize,
    #[serde(default)]
    pub kappa_index: usize,
    pub sweep: Option<SweepSpec>,
    /// `domega / t0` values, one curve each; empty keeps the configured
    /// `domega`.
    #[serde(default)]
    pub ratios: Vec<f64>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for the sweep; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    pub pump: Option<PumpBlock>,
}

impl RunConfig {
    /// Parses TOML, or JSON when the path ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if json { Self::from_json(&text)? } else { Self::from_toml(&text)? };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }

    /// Both figure presets share one grid: N=4, M=10, three adiabaticity
    /// ratios and 25 drive amplitudes from 0 to 1000 MHz on the reference
    /// device.
    pub fn preset(_which: Preset) -> Self {
        RunConfig {
            circuit: Some(CircuitBlock::reference()),
            holstein: None,
            solver: Solver::Both,
            n_sites: 4,
            cutoff: 10,
            kappa_index: 0,
            sweep: Some(SweepSpec {
                parameter: SweepParameter::Eps0,
                from: 0.0,
                to: 1000.0,
                points: 25,
            }),
            ratios: vec![0.75, 1.0, 1.25],
            output: None,
            seed: 0,
            threads: 0,
            pump: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match (&self.circuit, &self.holstein) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(bad("exactly one of [circuit] or [holstein] is required")),
        }
        if self.n_sites < 2 {
            return Err(bad(format!("N must be at least 2, got {}", self.n_sites)));
        }
        if self.kappa_index >= self.n_sites {
            return Err(bad(format!("kappa_index {} out of range for N = {}", self.kappa_index, self.n_sites)));
        }
        if let Some(s) = &self.sweep {
            if s.points < 2 {
                return Err(bad(format!("sweep needs at least 2 points, got {}", s.points)));
            }
            if !(s.from.is_finite() && s.to.is_finite()) {
                return Err(bad("sweep endpoints must be finite"));
            }
            match (s.parameter, self.circuit.is_some()) {
                (SweepParameter::Eps0, false) => return Err(bad("an eps0 sweep needs a [circuit] block")),
                (SweepParameter::GH, true) => return Err(bad("a g_h sweep needs a [holstein] block")),
                _ => {}
            }
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(bad(format!("ratios must be positive, got {r}")));
        }
        if let Some(p) = &self.pump {
            if p.stride == 0 {
                return Err(bad("pump stride must be at least 1"));
            }
            if p.q_index.is_some_and(|q| q >= self.n_sites) {
                return Err(bad("pump q_index out of range"));
            }
        }
        Ok(())
    }

    /// Curves to run: each configured ratio, or the configured `domega`.
    pub fn curves(&self) -> Vec<Option<f64>> {
        if self.ratios.is_empty() {
            vec![None]
        } else {
            self.ratios.iter().copied().map(Some).collect()
        }
    }

    pub fn sweep_values(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values().into_iter().map(Some).collect(),
            None => vec![None],
        }
    }

    /// Model parameters at one grid point, with the drive amplitude when a
    /// circuit block is present. A ratio fixes `domega = ratio * t0`.
    pub fn point(&self, ratio: Option<f64>, value: Option<f64>) -> holstein_core::Result<(Option<f64>, HolsteinParams64)> {
        self.point_with(ratio, value, map_to_holstein)
    }

    pub fn point_with(
        &self,
        ratio: Option<f64>,
        value: Option<f64>,
        map: crate::MapFn,
    ) -> holstein_core::Result<(Option<f64>, HolsteinParams64)> {
        let invalid = |e: ConfigError| holstein_core::Error::InvalidParams(e.0);
        if let Some(block) = &self.circuit {
            let mut cp = block.to_params(self.n_sites).map_err(invalid)?;
            if let Some(x) = value {
                cp.eps0 = x;
            }
            if let Some(r) = ratio {
                cp.detuning = PhononDetuning::Direct(r * cp.t0());
            }
            let hp = map(&cp, &MapOptions::default())?;
            return Ok((Some(cp.eps0), hp));
        }
        let b = self.holstein.as_ref().expect("validated: one block present");
        let g_h = value.unwrap_or(b.g_h);
        let domega = ratio.map_or(b.domega, |r| r * b.t0);
        Ok((None, HolsteinParams64::new(self.n_sites, domega, b.t0, g_h)?))
    }

    pub fn circuit_params(&self) -> Option<Result<CircuitParams64, ConfigError>> {
        self.circuit.as_ref().map(|b| b.to_params(self.n_sites))
    }
}
