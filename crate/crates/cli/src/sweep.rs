use std::io::Write;
use std::sync::Arc;

use holstein_core::eigen::EigenOptions;
use holstein_core::fock::{build_basis, momentum_ground_state, Sector};
use holstein_core::observables::{format_sig, moments_of_state, Moments, ObservableReport};
use holstein_core::toyozawa::{self, optimize_ground, OptimizeOptions, OptimizeReport};
use holstein_core::{HolsteinParams64, StateVector64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, Solver};

/// Bumped whenever the column set or order changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const EXTRA_COLUMNS: [&str; 5] = ["solver", "E_ed_MHz", "E_toyozawa_MHz", "ed_cutoff_shift_MHz", "errors"];

pub fn header() -> Vec<&'static str> {
    ObservableReport::COLUMNS.iter().chain(EXTRA_COLUMNS.iter()).copied().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EdSolution {
    pub energy: f64,
    /// `E0(M) - E0(M - 2)`; large values mean the cutoff is not converged.
    pub cutoff_shift: Option<f64>,
    pub moments: Moments<f64>,
    #[serde(skip)]
    pub state: StateVector64,
}

/// Everything computed at one grid point. Failed solvers leave their slot
/// empty and add a message to `errors`.
#[derive(Debug, Clone, Serialize)]
pub struct PointResult {
    pub eps0: Option<f64>,
    pub holstein: Option<HolsteinParams64>,
    pub solver: Solver,
    pub ed: Option<EdSolution>,
    pub toyozawa: Option<ToyozawaSolution>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToyozawaSolution {
    pub energy: f64,
    pub moments: Moments<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub start: toyozawa::Start,
    pub state: holstein_core::ToyozawaState64,
}

impl PointResult {
    /// Observables from the variational solution when present, otherwise from
    /// the exact one.
    pub fn moments(&self) -> Option<&Moments<f64>> {
        self.toyozawa.as_ref().map(|t| &t.moments).or(self.ed.as_ref().map(|e| &e.moments))
    }

    pub fn report(&self) -> Option<ObservableReport> {
        let hp = self.holstein.as_ref()?;
        let m = self.moments()?;
        Some(ObservableReport::new(
            self.eps0.unwrap_or(f64::NAN),
            hp.adiabaticity(),
            hp.g_h(),
            hp.lambda(),
            m,
        ))
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let mut fields = match (self.report(), &self.holstein) {
            (Some(r), _) => r.csv_fields(),
            (None, hp) => {
                let mut f = vec![String::new(); ObservableReport::COLUMNS.len()];
                f[0] = self.eps0.map(format_sig).unwrap_or_default();
                if let Some(hp) = hp {
                    f[1] = format_sig(hp.adiabaticity());
                    f[2] = format_sig(hp.g_h());
                    f[3] = format_sig(hp.lambda());
                }
                f
            }
        };
        fields.push(self.solver.name().to_string());
        fields.push(self.ed.as_ref().map(|e| format_sig(e.energy)).unwrap_or_default());
        fields.push(self.toyozawa.as_ref().map(|t| format_sig(t.energy)).unwrap_or_default());
        fields.push(self.ed.as_ref().and_then(|e| e.cutoff_shift).map(format_sig).unwrap_or_default());
        fields.push(self.errors.join("; "));
        fields
    }
}

pub fn solve_ed(cfg: &RunConfig, hp: &HolsteinParams64) -> holstein_core::Result<EdSolution> {
    let basis = Arc::new(build_basis(hp.n_sites(), cfg.cutoff, Sector::OneExcitation)?);
    let opts = EigenOptions {
        seed: cfg.seed,
        ..EigenOptions::default()
    };
    let (energy, state) = momentum_ground_state(hp, &basis, cfg.kappa_index, &opts)?;
    let moments = moments_of_state(&state, cfg.kappa_index)?;
    let cutoff_shift = match cfg.cutoff.checked_sub(2) {
        Some(lower) => {
            let basis = Arc::new(build_basis(hp.n_sites(), lower, Sector::OneExcitation)?);
            Some(energy - momentum_ground_state(hp, &basis, cfg.kappa_index, &opts)?.0)
        }
        None => None,
    };
    Ok(EdSolution {
        energy,
        cutoff_shift,
        moments,
        state,
    })
}

pub fn solve_toyozawa(cfg: &RunConfig, hp: &HolsteinParams64, parallel: bool) -> holstein_core::Result<ToyozawaSolution> {
    let opts = OptimizeOptions {
        seed: cfg.seed,
        parallel,
        ..OptimizeOptions::default()
    };
    let OptimizeReport {
        state,
        energy,
        grad_norm,
        iterations,
        start,
        ..
    } = optimize_ground(hp, cfg.kappa_index, &opts)?;
    let moments = toyozawa::moments(&state)?;
    Ok(ToyozawaSolution {
        energy,
        moments,
        grad_norm,
        iterations,
        start,
        state,
    })
}

pub fn solve_point(cfg: &RunConfig, ratio: Option<f64>, value: Option<f64>, parallel: bool) -> PointResult {
    let mut out = PointResult {
        eps0: None,
        holstein: None,
        solver: cfg.solver,
        ed: None,
        toyozawa: None,
        errors: Vec::new(),
    };
    let hp = match cfg.point(ratio, value) {
        Ok((eps0, hp)) => {
            out.eps0 = eps0;
            hp
        }
        Err(e) => {
            out.eps0 = value;
            out.errors.push(format!("map: {e}"));
            return out;
        }
    };
    if cfg.solver.runs_ed() {
        match solve_ed(cfg, &hp) {
            Ok(s) => out.ed = Some(s),
            Err(e) => out.errors.push(format!("ed: {e}")),
        }
    }
    if cfg.solver.runs_toyozawa() {
        match solve_toyozawa(cfg, &hp, parallel) {
            Ok(s) => out.toyozawa = Some(s),
            Err(e) => out.errors.push(format!("toyozawa: {e}")),
        }
    }
    out.holstein = Some(hp);
    out
}

/// Solves every (ratio, value) grid point on a pool of `cfg.threads` workers.
/// Results come back ordered by ratio, then sweep value.
pub fn run_sweep(cfg: &RunConfig) -> anyhow::Result<Vec<PointResult>> {
    let grid: Vec<(Option<f64>, Option<f64>)> = cfg
        .curves()
        .into_iter()
        .flat_map(|r| cfg.sweep_values().into_iter().map(move |x| (r, x)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    Ok(pool.install(|| grid.par_iter().map(|&(r, x)| solve_point(cfg, r, x, false)).collect()))
}

pub fn write_csv<W: Write>(rows: &[PointResult], w: W) -> anyhow::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header())?;
    for row in rows {
        wr.write_record(row.csv_fields())?;
    }
    wr.flush()?;
    Ok(())
}
