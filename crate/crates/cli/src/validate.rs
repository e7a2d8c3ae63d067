//! Limit, oracle and property checks behind `holstein validate`.

use std::sync::Arc;

use holstein_core::circuit::{map_to_holstein, MapOptions};
use holstein_core::eigen::EigenOptions;
use holstein_core::fock::{build_basis, momentum_ground_state, Sector};
use holstein_core::observables::{moments_of_state, quasiparticle_residue, Moments};
use holstein_core::preparation::{rabi_time, simulate_pump, transition_element, PumpParams};
use holstein_core::toyozawa::{self, optimize_ground, OptimizeOptions};
use holstein_core::{CircuitParams64, HolsteinParams64};
use serde::Serialize;

use crate::config::{Preset, RunConfig, Solver, SweepParameter, SweepSpec};
use crate::sweep::{run_sweep, write_csv, PointResult};
use crate::MapFn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|got - expected| <= tolerance`
    Eq,
    /// `got <= expected + tolerance`
    Le,
    /// `got >= expected - tolerance`
    Ge,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, relation: Relation, expected: f64, got: f64, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::Eq => (got - expected).abs() <= tolerance,
            Relation::Le => got <= expected + tolerance,
            Relation::Ge => got >= expected - tolerance,
        };
        Check {
            name: name.into(),
            expected,
            got,
            tolerance,
            relation,
            pass,
            note: None,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check::new(name, Relation::Eq, 1.0, if ok { 1.0 } else { 0.0 }, 0.0)
    }

    fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Check::new(name, Relation::Eq, 0.0, f64::NAN, 0.0).with_note(err.to_string())
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone)]
pub struct ValidateOptions {
    /// Phonon cutoff for the exact Lang-Firsov checks.
    pub lang_firsov_cutoff: usize,
    pub map: MapFn,
    /// Include the figure-grid sweep (the slow part).
    pub sweep: bool,
    pub threads: usize,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            lang_firsov_cutoff: 24,
            map: map_to_holstein,
            sweep: true,
            threads: 0,
            seed: 0,
        }
    }
}

pub fn run_all(opts: &ValidateOptions) -> Vec<Check> {
    let mut checks = mapping_checks(opts.map);
    checks.extend(lang_firsov_checks(opts));
    checks.extend(free_checks());
    if opts.sweep {
        let mut cfg = RunConfig::preset(Preset::Fig2);
        cfg.threads = opts.threads;
        cfg.seed = opts.seed;
        match run_sweep(&cfg) {
            Ok(rows) => {
                checks.extend(crossover_checks(&rows, &cfg.ratios));
                checks.extend(squeezing_checks(&rows));
            }
            Err(e) => checks.push(Check::failed("sweep", e)),
        }
    }
    checks.extend(selection_rule_checks());
    checks.extend(preparation_checks());
    checks.push(determinism_check(opts.seed));
    checks
}

pub fn reference_device(eps0: f64) -> CircuitParams64 {
    CircuitParams64::reference(eps0, 80.0)
}

pub fn mapping_checks(map: MapFn) -> Vec<Check> {
    match map(&reference_device(400.0), &MapOptions::default()) {
        Ok(hp) => vec![
            Check::new("mapping.gH", Relation::Eq, 1.25, hp.g_h(), 1e-9),
            Check::new("mapping.lambda", Relation::Eq, 1.5625, hp.lambda(), 1e-9),
        ],
        Err(e) => vec![Check::failed("mapping", e)],
    }
}

/// Weight of a Poisson distribution with mean `mu` above `m`.
fn poisson_tail(mu: f64, m: usize) -> f64 {
    let mut term = (-mu).exp();
    let mut kept = term;
    for n in 1..=m {
        term *= mu / n as f64;
        kept += term;
    }
    (1.0 - kept).max(0.0)
}

fn moment_checks(prefix: &str, m: &Moments<f64>, z: f64, nph: f64, tol: f64) -> Vec<Check> {
    vec![
        Check::new(format!("{prefix}.Z0"), Relation::Eq, z, m.residue, tol),
        Check::new(format!("{prefix}.Nph"), Relation::Eq, nph, m.phonon_number, tol),
    ]
}

pub fn lang_firsov_checks(opts: &ValidateOptions) -> Vec<Check> {
    let m = opts.lang_firsov_cutoff;
    let mut out = Vec::new();
    for g in [0.5, 1.25, 2.0] {
        let hp = HolsteinParams64::new(4, 80.0, 0.0, g).expect("valid parameters");
        let e = -g * g * 80.0;
        let (z, nph) = ((-g * g).exp(), g * g);
        let tag = format!("lang_firsov.g{g}");
        let tail = poisson_tail(g * g, m);
        let note = (tail > 1e-8).then(|| {
            format!("phonon cutoff M={m} truncates {tail:.3e} of the Poisson cloud weight (mean {})", g * g)
        });
        let ed = build_basis(4, m, Sector::OneExcitation).and_then(|b| {
            let (energy, psi) = momentum_ground_state(&hp, &Arc::new(b), 0, &EigenOptions::default())?;
            Ok((energy, moments_of_state(&psi, 0)?))
        });
        match ed {
            Ok((energy, mm)) => {
                let mut group = vec![Check::new(format!("{tag}.ed.E0_rel"), Relation::Eq, 0.0, (energy - e) / e.abs(), 1e-6)];
                group.extend(moment_checks(&format!("{tag}.ed"), &mm, z, nph, 1e-4));
                for c in group {
                    out.push(match (&note, c.pass) {
                        (Some(n), false) => c.with_note(n.clone()),
                        _ => c,
                    });
                }
            }
            Err(err) => out.push(Check::failed(format!("{tag}.ed"), err)),
        }
        let tz = optimize_ground(&hp, 0, &OptimizeOptions { seed: opts.seed, ..OptimizeOptions::default() })
            .and_then(|r| Ok((r.energy, toyozawa::moments(&r.state)?)));
        match tz {
            Ok((energy, mm)) => {
                out.push(Check::new(format!("{tag}.toyozawa.E0_rel"), Relation::Eq, 0.0, (energy - e) / e.abs(), 1e-6));
                out.extend(moment_checks(&format!("{tag}.toyozawa"), &mm, z, nph, 1e-4));
            }
            Err(err) => out.push(Check::failed(format!("{tag}.toyozawa"), err)),
        }
    }
    out
}

fn variance_checks(prefix: &str, m: &Moments<f64>) -> Vec<Check> {
    [("Sx", m.sx), ("Sp", m.sp), ("Sxm", m.sxm), ("Spm", m.spm)]
        .into_iter()
        .map(|(k, v)| Check::new(format!("{prefix}.{k}"), Relation::Eq, 0.5, v, 1e-10))
        .collect()
}

pub fn free_checks() -> Vec<Check> {
    let hp = HolsteinParams64::new(4, 80.0, 80.0, 0.0).expect("valid parameters");
    let mut out = Vec::new();
    let ed = build_basis(4, 4, Sector::OneExcitation).and_then(|b| {
        let (energy, psi) = momentum_ground_state(&hp, &Arc::new(b), 0, &EigenOptions::default())?;
        Ok((energy, moments_of_state(&psi, 0)?))
    });
    match ed {
        Ok((e, m)) => {
            out.push(Check::new("free.ed.E0", Relation::Eq, -160.0, e, 1e-9 * 160.0));
            out.push(Check::new("free.ed.Z0", Relation::Eq, 1.0, m.residue, 1e-10));
            out.extend(variance_checks("free.ed", &m));
        }
        Err(err) => out.push(Check::failed("free.ed", err)),
    }
    match optimize_ground(&hp, 0, &OptimizeOptions::default()).and_then(|r| Ok((r.energy, toyozawa::moments(&r.state)?))) {
        Ok((e, m)) => {
            out.push(Check::new("free.toyozawa.E0", Relation::Eq, -160.0, e, 1e-9 * 160.0));
            out.push(Check::new("free.toyozawa.Z0", Relation::Eq, 1.0, m.residue, 1e-10));
            out.extend(variance_checks("free.toyozawa", &m));
        }
        Err(err) => out.push(Check::failed("free.toyozawa", err)),
    }
    out
}

fn curve(rows: &[PointResult], ratio: f64) -> Vec<&PointResult> {
    rows.iter()
        .filter(|r| r.holstein.is_some_and(|hp| (hp.adiabaticity() - ratio).abs() < 1e-12))
        .collect()
}

/// Largest step against the expected direction: `max_i (x_{i+1} - x_i)` for
/// a nonincreasing sequence when `sign = 1`, and the reverse for `-1`.
fn worst_step(xs: &[f64], sign: f64) -> f64 {
    xs.windows(2).map(|w| sign * (w[1] - w[0])).fold(f64::NEG_INFINITY, f64::max)
}

/// Variational bound, agreement with exact diagonalization and the
/// crossover shape of `Z0` and `Nph` along each ratio curve.
pub fn crossover_checks(rows: &[PointResult], ratios: &[f64]) -> Vec<Check> {
    let mut out = Vec::new();
    for &ratio in ratios {
        let tag = format!("crossover.ratio{ratio}");
        let pts = curve(rows, ratio);
        let complete: Vec<_> = pts.iter().filter(|p| p.ed.is_some() && p.toyozawa.is_some()).collect();
        if pts.is_empty() || complete.len() != pts.len() {
            let errs: Vec<_> = pts.iter().flat_map(|p| p.errors.iter().cloned()).collect();
            out.push(Check::failed(&tag, format!("incomplete curve: {}", errs.join("; "))));
            continue;
        }
        let domega = pts[0].holstein.unwrap().domega();
        let (mut bound, mut rel) = (f64::INFINITY, 0.0f64);
        let (mut at_bound, mut at_rel) = (0.0, 0.0);
        for p in &pts {
            let (e_ed, e_tz) = (p.ed.as_ref().unwrap().energy, p.toyozawa.as_ref().unwrap().energy);
            let b = (e_tz - e_ed) / domega;
            if b < bound {
                bound = b;
                at_bound = p.eps0.unwrap_or(f64::NAN);
            }
            let r = ((e_tz - e_ed) / e_ed.abs()).abs();
            if r > rel {
                rel = r;
                at_rel = p.eps0.unwrap_or(f64::NAN);
            }
        }
        out.push(
            Check::new(format!("{tag}.variational_bound"), Relation::Ge, 0.0, bound, 1e-9)
                .with_note(format!("min (E_toyozawa - E_ed)/domega at eps0 = {at_bound} MHz")),
        );
        out.push(
            Check::new(format!("{tag}.ed_agreement"), Relation::Le, 0.0, rel, 0.05)
                .with_note(format!("max relative deviation at eps0 = {at_rel} MHz")),
        );
        let z: Vec<f64> = pts.iter().map(|p| p.moments().unwrap().residue).collect();
        let n: Vec<f64> = pts.iter().map(|p| p.moments().unwrap().phonon_number).collect();
        out.push(Check::new(format!("{tag}.Z0_nonincreasing"), Relation::Le, 0.0, worst_step(&z, 1.0), MONOTONE_TOL));
        out.push(Check::new(format!("{tag}.Z0_start"), Relation::Ge, 0.99, z[0], 0.0));
        out.push(Check::new(format!("{tag}.Z0_end"), Relation::Le, 0.1, *z.last().unwrap(), 0.0));
        out.push(Check::new(format!("{tag}.Nph_nondecreasing"), Relation::Le, 0.0, worst_step(&n, -1.0), MONOTONE_TOL));
        out.push(Check::new(format!("{tag}.Nph_end"), Relation::Ge, 3.0, *n.last().unwrap(), 0.0));
    }
    out
}

/// Slack per grid step on monotonicity.
pub const MONOTONE_TOL: f64 = 1e-6;

/// Squeezing signature along the `domega = t0` curve.
pub fn squeezing_checks(rows: &[PointResult]) -> Vec<Check> {
    let pts = curve(rows, 1.0);
    let ms: Vec<Moments<f64>> = pts.iter().filter_map(|p| p.moments().copied()).collect();
    if ms.len() < 3 || ms.len() != pts.len() {
        return vec![Check::failed("squeezing", "incomplete ratio-1 curve")];
    }
    let eps0: Vec<f64> = pts.iter().map(|p| p.eps0.unwrap_or(f64::NAN)).collect();
    let sx: Vec<f64> = ms.iter().map(|m| m.sx).collect();
    let last = ms.len() - 1;
    let mut out = Vec::new();
    // the undriven point is the vacuum, exactly 1/2
    let above = sx.iter().zip(&eps0).filter(|(_, e)| **e > 0.0).map(|(s, _)| s - 0.5).fold(f64::INFINITY, f64::min);
    out.push(Check::new("squeezing.Sx_above_half", Relation::Ge, f64::MIN_POSITIVE, above, 0.0));
    out.push(Check::new("squeezing.Sx_increasing", Relation::Le, 0.0, worst_step(&sx, -1.0), 0.0).with_note("largest non-increase between neighbours"));
    let sp_max = ms.iter().map(|m| m.sp).fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::new("squeezing.Sp_max", Relation::Le, 0.5, sp_max, 1e-10));
    let (imin, spm_min) = ms.iter().map(|m| m.spm).enumerate().fold((0, f64::INFINITY), |a, (i, v)| if v < a.1 { (i, v) } else { a });
    out.push(
        Check::flag("squeezing.Spm_interior_min", imin > 0 && imin < last && (0.30..=0.45).contains(&spm_min))
            .with_note(format!("min Spm = {spm_min:.6} at eps0 = {} MHz; window [0.30, 0.45]", eps0[imin])),
    );
    let (imax, sxm_max) = ms.iter().map(|m| m.sxm).enumerate().fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    out.push(
        Check::flag("squeezing.Sxm_interior_max", imax > 0 && imax < last)
            .with_note(format!("max Sxm = {sxm_max:.6} at eps0 = {} MHz", eps0[imax])),
    );
    let heis = ms.iter().map(|m| (m.sx * m.sp).min(m.sxm * m.spm)).fold(f64::INFINITY, f64::min);
    out.push(Check::new("squeezing.heisenberg", Relation::Ge, 0.25, heis, 1e-9));
    out
}

pub fn crossover_params() -> HolsteinParams64 {
    map_to_holstein(&reference_device(400.0), &MapOptions::default()).expect("reference device maps")
}

pub fn selection_rule_checks() -> Vec<Check> {
    let hp = crossover_params();
    let basis = match build_basis(4, 8, Sector::OneExcitation) {
        Ok(b) => Arc::new(b),
        Err(e) => return vec![Check::failed("selection_rule", e)],
    };
    let (mut leak, mut diag) = (0.0f64, 0.0f64);
    for k in 0..4 {
        let r = momentum_ground_state(&hp, &basis, k, &EigenOptions::default()).and_then(|(_, psi)| {
            let z = quasiparticle_residue(&psi, k)?;
            let mut off = 0.0f64;
            let mut d = 0.0;
            for q in 0..4 {
                let w = transition_element(&psi, q)?;
                if q == k {
                    d = (w.norm_sqr() - z).abs();
                } else {
                    off = off.max(w.norm());
                }
            }
            Ok((off, d))
        });
        match r {
            Ok((o, d)) => {
                leak = leak.max(o);
                diag = diag.max(d);
            }
            Err(e) => return vec![Check::failed("selection_rule", e)],
        }
    }
    vec![
        Check::new("selection_rule.off_diagonal", Relation::Le, 0.0, leak, 1e-8),
        Check::new("selection_rule.diagonal_vs_residue", Relation::Le, 0.0, diag, 1e-10),
    ]
}

pub fn preparation_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let hp = crossover_params();
    let run = || -> holstein_core::Result<(f64, f64, f64, f64)> {
        let basis = Arc::new(build_basis(4, 8, Sector::OneExcitation)?);
        let (_, target) = momentum_ground_state(&hp, &basis, 0, &EigenOptions::default())?;
        let tau = rabi_time(20.0, quasiparticle_residue(&target, 0)?)?;
        let mut pp = PumpParams::new(0, 20.0, 2.0 * tau);
        pp.stride = 10;
        let trace = simulate_pump(&hp, &pp, &target)?;
        let peak = trace.peak();
        Ok((peak.fidelity, peak.t_ns, tau, trace.max_norm_drift()))
    };
    match run() {
        Ok((fid, t, tau, drift)) => {
            out.push(Check::new("preparation.peak_fidelity", Relation::Ge, 0.9, fid, 0.0));
            out.push(
                Check::new("preparation.timing_rel", Relation::Le, 0.0, (t - tau).abs() / tau, 0.15)
                    .with_note(format!("peak at {t:.3} ns, rabi_time {tau:.3} ns")),
            );
            out.push(Check::new("preparation.norm_drift", Relation::Le, 0.0, drift, 1e-6));
        }
        Err(e) => out.push(Check::failed("preparation", e)),
    }
    match step_halving_ratio() {
        Ok(r) => out.push(Check::new("preparation.step_halving_ratio", Relation::Eq, 16.0, r, 2.0)),
        Err(e) => out.push(Check::failed("preparation.step_halving_ratio", e)),
    }
    out
}

/// `(F(dt) - F(dt/2)) / (F(dt/2) - F(dt/4))` for the final fidelity of a
/// short two-site run.
pub fn step_halving_ratio() -> holstein_core::Result<f64> {
    let hp = HolsteinParams64::new(2, 80.0, 40.0, 0.8)?;
    let basis = Arc::new(build_basis(2, 3, Sector::OneExcitation)?);
    let (_, target) = momentum_ground_state(&hp, &basis, 0, &EigenOptions::default())?;
    let fidelity = |dt: f64| -> holstein_core::Result<f64> {
        let mut pp = PumpParams::new(0, 30.0, 8.0);
        pp.dt_ns = Some(dt);
        pp.stride = usize::MAX;
        Ok(simulate_pump(&hp, &pp, &target)?.samples.last().expect("final sample").fidelity)
    };
    let dt = 8e-3;
    let (f1, f2, f4) = (fidelity(dt)?, fidelity(dt / 2.0)?, fidelity(dt / 4.0)?);
    Ok((f1 - f2) / (f2 - f4))
}

/// Small sweep, run twice on one thread, compared byte for byte.
pub fn determinism_check(seed: u64) -> Check {
    let mut cfg = RunConfig::preset(Preset::Fig2);
    cfg.cutoff = 6;
    cfg.threads = 1;
    cfg.seed = seed;
    cfg.solver = Solver::Both;
    cfg.sweep = Some(SweepSpec {
        parameter: SweepParameter::Eps0,
        from: 0.0,
        to: 600.0,
        points: 4,
    });
    let render = || -> anyhow::Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_csv(&run_sweep(&cfg)?, &mut buf)?;
        Ok(buf)
    };
    match (render(), render()) {
        (Ok(a), Ok(b)) => Check::flag("determinism.sweep_bytes", a == b),
        (Err(e), _) | (_, Err(e)) => Check::failed("determinism.sweep_bytes", e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_tail_values() {
        assert!(poisson_tail(4.0, 2) > 0.76);
        assert!(poisson_tail(4.0, 24) < 1e-10);
    }

    #[test]
    fn relations() {
        assert!(Check::new("a", Relation::Le, 0.0, 0.05, 0.05).pass);
        assert!(!Check::new("a", Relation::Ge, 3.0, 2.9, 0.0).pass);
        assert!(!Check::new("a", Relation::Eq, 1.0, f64::NAN, 1.0).pass);
        assert!(!Check::flag("a", false).pass);
    }

    #[test]
    fn mapping_sentinel() {
        fn corrupted(cp: &CircuitParams64, o: &MapOptions) -> holstein_core::Result<HolsteinParams64> {
            let hp = map_to_holstein(cp, o)?;
            hp.with_coupling(hp.g_h() * hp.domega() / 80.0 * 1.01)
        }
        assert!(mapping_checks(map_to_holstein).iter().all(|c| c.pass));
        assert!(!mapping_checks(corrupted)[0].pass);
    }

    #[test]
    fn low_cutoff_fails_lang_firsov_with_diagnostic() {
        let opts = ValidateOptions {
            lang_firsov_cutoff: 2,
            ..ValidateOptions::default()
        };
        let checks = lang_firsov_checks(&opts);
        let ed: Vec<_> = checks.iter().filter(|c| c.name.starts_with("lang_firsov.g2.ed")).collect();
        assert!(ed.iter().any(|c| !c.pass));
        assert!(ed.iter().filter(|c| !c.pass).all(|c| c.note.as_deref().is_some_and(|n| n.contains("M=2"))));
        assert!(checks.iter().filter(|c| c.name.contains("toyozawa")).all(|c| c.pass));
    }

    #[test]
    fn fast_checks_pass() {
        for c in free_checks().into_iter().chain(selection_rule_checks()).chain([determinism_check(3)]) {
            assert!(c.pass, "{c:?}");
        }
    }
}
