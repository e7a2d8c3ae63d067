//! Quasi-Newton minimization of the Toyozawa Rayleigh quotient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fd_gradient, norm_and_energy, ToyozawaState};
use crate::circuit::HolsteinParams;
use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};

/// Initial guess for one optimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// Bare excitation plus small seeded noise.
    Free,
    /// Single-site cloud at `-g_H`.
    LangFirsov,
    /// Seeded random parameters.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub max_iter: usize,
    /// Stop when the energy change falls below `energy_tol * max(|E|, domega)`.
    pub energy_tol: f64,
    /// ... and the gradient of `E / domega` has norm below this.
    pub grad_tol: f64,
    pub noise: f64,
    pub seed: u64,
    pub starts: Vec<Start>,
    /// Run the starts on the rayon pool.
    pub parallel: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            max_iter: 2000,
            energy_tol: 1e-10,
            grad_tol: 1e-7,
            noise: 1e-3,
            seed: 0,
            starts: vec![Start::Free, Start::LangFirsov, Start::Random],
            parallel: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeReport<T> {
    /// Canonicalized optimum.
    pub state: ToyozawaState<T>,
    pub energy: T,
    /// Norm of the gradient of `E / domega` at the optimum.
    pub grad_norm: T,
    pub iterations: usize,
    pub start: Start,
    /// Energy after every accepted step of the winning run.
    pub history: Vec<T>,
}

struct Run<T> {
    x: Vec<T>,
    energy: T,
    grad_norm: T,
    iterations: usize,
    converged: bool,
    history: Vec<T>,
}

/// Minimizes the energy at quasimomentum `2 pi j / N` from every configured
/// start and returns the lowest converged result.
pub fn optimize_ground<T: Real>(
    hp: &HolsteinParams<T>,
    kappa_index: usize,
    opts: &OptimizeOptions,
) -> Result<OptimizeReport<T>> {
    if opts.starts.is_empty() {
        return Err(Error::InvalidParams("optimizer needs at least one start".into()));
    }
    let n = hp.n_sites();
    let job = |(i, start): (usize, &Start)| {
        let init = initial_state(hp, kappa_index, *start, opts, i as u64);
        (*start, minimize(hp, init, opts))
    };
    let runs: Vec<(Start, Result<Run<T>>)> = if opts.parallel {
        opts.starts.par_iter().enumerate().map(job).collect()
    } else {
        opts.starts.iter().enumerate().map(job).collect()
    };

    let mut best: Option<(Start, Run<T>)> = None;
    let mut fallback: Option<(T, T)> = None;
    let mut first_err = None;
    for (start, run) in runs {
        match run {
            Ok(r) if r.converged => {
                if best.as_ref().is_none_or(|(_, b)| r.energy < b.energy) {
                    best = Some((start, r));
                }
            }
            Ok(r) => {
                if fallback.is_none_or(|(e, _)| r.energy < e) {
                    fallback = Some((r.energy, r.grad_norm));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let Some((start, run)) = best else {
        return Err(match (fallback, first_err) {
            (Some((e, g)), _) => Error::OptimizerNoConvergence {
                energy: e.as_f64(),
                grad_norm: g.as_f64(),
            },
            (None, Some(e)) => e,
            (None, None) => unreachable!("at least one start ran"),
        });
    };
    let mut state = ToyozawaState::from_params(n, kappa_index, &run.x)?;
    state.canonicalize()?;
    Ok(OptimizeReport {
        state,
        energy: run.energy,
        grad_norm: run.grad_norm,
        iterations: run.iterations,
        start,
        history: run.history,
    })
}

fn initial_state<T: Real>(
    hp: &HolsteinParams<T>,
    kappa_index: usize,
    start: Start,
    opts: &OptimizeOptions,
    stream: u64,
) -> ToyozawaState<T> {
    let n = hp.n_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream + 1);
    match start {
        Start::LangFirsov => ToyozawaState::lang_firsov(n, kappa_index, hp.g_h()),
        Start::Free => {
            let mut x = ToyozawaState::<T>::free(n, kappa_index).to_params();
            for xi in x.iter_mut() {
                *xi += T::lit(opts.noise * (2.0 * rng.gen::<f64>() - 1.0));
            }
            ToyozawaState::from_params(n, kappa_index, &x).expect("finite parameters")
        }
        Start::Random => {
            let reach = hp.g_h().abs().as_f64().max(0.1);
            let mut draw = |scale: f64| cplx(T::lit(scale * rng.gen_range(-1.0..1.0)), T::lit(scale * rng.gen_range(-1.0..1.0)));
            let mut phi: Vec<_> = (0..n).map(|_| draw(1.0)).collect();
            phi[0] = cplx(T::one(), T::zero());
            let v = (0..n).map(|_| draw(reach)).collect();
            ToyozawaState::new(kappa_index, phi, v).expect("finite parameters")
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// BFGS with Armijo backtracking on `E / domega`.
fn minimize<T: Real>(hp: &HolsteinParams<T>, init: ToyozawaState<T>, opts: &OptimizeOptions) -> Result<Run<T>> {
    let n = init.n_sites();
    let k = init.kappa_index();
    let scale = hp.domega();
    let objective = |x: &[T]| -> Result<T> {
        let s = ToyozawaState::from_params(n, k, x)?;
        Ok(norm_and_energy(&s, hp)?.1 / scale)
    };
    // trial points may leave the region where the norm is usable
    let probe = |x: &[T]| match objective(x) {
        Ok(f) if f.is_finite() => Some(f),
        _ => None,
    };

    let dim = 4 * n;
    let mut x = init.to_params();
    let mut f = objective(&x)?;
    let mut g = fd_gradient(&x, objective)?;
    let mut h = identity::<T>(dim);
    let mut fresh = true;
    let mut history = vec![f * scale];
    let energy_tol = T::lit(opts.energy_tol);
    let grad_tol = T::lit(opts.grad_tol);
    let c1 = T::lit(1e-4);

    let gnorm = |g: &[T]| dot(g, g).sqrt();
    if gnorm(&g) < grad_tol {
        return Ok(Run {
            x,
            energy: f * scale,
            grad_norm: gnorm(&g),
            iterations: 0,
            converged: true,
            history,
        });
    }

    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut p: Vec<T> = (0..dim).map(|i| -dot(&h[i * dim..(i + 1) * dim], &g)).collect();
        let mut slope = dot(&p, &g);
        if !(slope < T::zero()) {
            h = identity(dim);
            fresh = true;
            p = g.iter().map(|gi| -*gi).collect();
            slope = dot(&p, &g);
        }
        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<T> = x.iter().zip(&p).map(|(xi, pi)| *xi + alpha * *pi).collect();
            if let Some(ft) = probe(&trial) {
                if ft <= f + c1 * alpha * slope {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            alpha *= T::lit(0.5);
        }
        let Some((x_new, f_new)) = accepted else {
            if !fresh {
                h = identity(dim);
                fresh = true;
                continue;
            }
            // no descent possible along the gradient: finite-difference floor
            converged = gnorm(&g) < grad_tol;
            break;
        };
        let g_new = fd_gradient(&x_new, objective)?;
        let s: Vec<T> = x_new.iter().zip(&x).map(|(a, b)| *a - *b).collect();
        let y: Vec<T> = g_new.iter().zip(&g).map(|(a, b)| *a - *b).collect();
        let sy = dot(&s, &y);
        if sy > T::epsilon() * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let gamma = sy / dot(&y, &y);
                h.iter_mut().for_each(|e| *e *= gamma);
                fresh = false;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
        let drop = (f - f_new) * scale;
        x = x_new;
        f = f_new;
        g = g_new;
        history.push(f * scale);
        let e_abs = (f * scale).abs().max(scale);
        if drop < energy_tol * e_abs && gnorm(&g) < grad_tol {
            converged = true;
            break;
        }
    }
    Ok(Run {
        x,
        energy: f * scale,
        grad_norm: gnorm(&g),
        iterations,
        converged,
        history,
    })
}

fn identity<T: Real>(dim: usize) -> Vec<T> {
    let mut h = vec![T::zero(); dim * dim];
    for i in 0..dim {
        h[i * dim + i] = T::one();
    }
    h
}

/// Inverse-Hessian update `H <- (I - r s y^T) H (I - r y s^T) + r s s^T`.
fn bfgs_update<T: Real>(h: &mut [T], s: &[T], y: &[T], sy: T) {
    let dim = s.len();
    let r = T::one() / sy;
    let hy: Vec<T> = (0..dim).map(|i| dot(&h[i * dim..(i + 1) * dim], y)).collect();
    let yhy = dot(y, &hy);
    let coef = (T::one() + r * yhy) * r;
    for i in 0..dim {
        for j in 0..dim {
            h[i * dim + j] += coef * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
