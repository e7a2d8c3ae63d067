//! Hermitian eigensolvers: dense Householder + implicit QL for small
//! problems, Lanczos with full reorthogonalization for large sparse ones.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{axpy, czero, inner, norm, Real};

/// A Hermitian linear map applied to complex vectors.
pub trait LinearOperator<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]);

    /// Upper bound on the spectral radius, used to scale tolerances.
    fn norm_bound(&self) -> T;
}

#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    pub value: T,
    pub vector: Vec<Complex<T>>,
    /// `||A v - value v||` for the normalized vector.
    pub residual: T,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Problems smaller than this are diagonalized densely.
    pub dense_below: usize,
    /// Krylov basis size before a restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Convergence on the change of the Ritz value, relative to the norm bound.
    pub eigenvalue_tol: f64,
    /// Convergence on the residual norm, relative to the norm bound.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            dense_below: 4000,
            max_basis: 300,
            max_restarts: 40,
            eigenvalue_tol: 1e-10,
            residual_tol: 1e-8,
            seed: 0x5eed_1234,
        }
    }
}

/// Lowest eigenpair, dispatching on dimension.
pub fn lowest_eigenpair<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    dense: impl FnOnce() -> Vec<Complex<T>>,
    opts: &EigenOptions,
) -> Result<EigenPair<T>> {
    if op.dim() < opts.dense_below {
        let n = op.dim();
        let mut a = dense();
        let (value, vector) = dense_lowest(&mut a, n);
        let residual = residual_norm(op, value, &vector);
        Ok(EigenPair {
            value,
            vector,
            residual,
        })
    } else {
        lanczos_lowest(op, None, opts)
    }
}

pub fn residual_norm<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    value: T,
    v: &[Complex<T>],
) -> T {
    let mut w = vec![czero(); v.len()];
    op.apply(v, &mut w);
    for (wi, vi) in w.iter_mut().zip(v) {
        *wi -= vi * value;
    }
    norm(&w)
}

/// Householder reflectors produced by [`tridiagonalize`].
struct Reduction<T> {
    diag: Vec<T>,
    offdiag: Vec<T>,
    /// Unit-modulus phases making the complex tridiagonal real.
    phases: Vec<Complex<T>>,
    reflectors: Vec<(usize, T, Vec<Complex<T>>)>,
}

/// Reduces a dense Hermitian matrix (row-major, destroyed) to a real
/// symmetric tridiagonal.
fn tridiagonalize<T: Real>(a: &mut [Complex<T>], n: usize) -> Reduction<T> {
    assert_eq!(a.len(), n * n);
    let two = T::lit(2.0);
    let mut reflectors = Vec::new();
    let mut sub = vec![czero::<T>(); n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<Complex<T>> = (0..m).map(|i| a[(k + 1 + i) * n + k]).collect();
        let xnorm = norm(&x);
        if xnorm == T::zero() {
            sub[k] = czero();
            continue;
        }
        let x0 = x[0];
        let ph = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        let alpha = -ph * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|z| z.norm_sqr()).sum::<T>();
        if vnorm2 == T::zero() {
            sub[k] = x0;
            continue;
        }
        let tau = two / vnorm2;
        // p = tau * B v over the trailing block
        let mut p = vec![czero::<T>(); m];
        for i in 0..m {
            let row = (k + 1 + i) * n + k + 1;
            let mut acc = czero();
            for j in 0..m {
                acc += a[row + j] * v[j];
            }
            p[i] = acc * tau;
        }
        let kfac = inner(&v, &p).re * tau / two;
        let q: Vec<Complex<T>> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kfac).collect();
        for i in 0..m {
            let row = (k + 1 + i) * n + k + 1;
            for j in 0..m {
                a[row + j] -= v[i] * q[j].conj() + q[i] * v[j].conj();
            }
        }
        sub[k] = alpha;
        for i in 0..m {
            a[(k + 1 + i) * n + k] = if i == 0 { alpha } else { czero() };
            a[k * n + k + 1 + i] = a[(k + 1 + i) * n + k].conj();
        }
        reflectors.push((k + 1, tau, v));
    }
    if n >= 2 {
        sub[n - 2] = a[(n - 1) * n + n - 2];
    }
    let diag: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut phases = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
    if n > 0 {
        phases.push(Complex::new(T::one(), T::zero()));
    }
    for (i, s) in sub.iter().enumerate() {
        let r = s.norm();
        offdiag.push(r);
        let next = if r > T::zero() {
            phases[i] * (s / r)
        } else {
            phases[i]
        };
        phases.push(next);
    }
    Reduction {
        diag,
        offdiag,
        phases,
        reflectors,
    }
}

impl<T: Real> Reduction<T> {
    /// Maps an eigenvector of the real tridiagonal back to the original basis.
    fn back_transform(&self, y: &[T]) -> Vec<Complex<T>> {
        let mut z: Vec<Complex<T>> = y
            .iter()
            .zip(&self.phases)
            .map(|(yi, ph)| ph * *yi)
            .collect();
        for (start, tau, v) in self.reflectors.iter().rev() {
            let tail = &mut z[*start..];
            let s = inner(v, tail) * *tau;
            axpy(-s, v, tail);
        }
        z
    }
}

/// All eigenvalues of a dense Hermitian matrix, ascending.
pub fn dense_eigenvalues<T: Real>(a: &mut [Complex<T>], n: usize) -> Vec<T> {
    let red = tridiagonalize(a, n);
    let mut d = red.diag.clone();
    let mut e = red.offdiag.clone();
    tridiagonal_eigenvalues(&mut d, &mut e);
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    d
}

/// Lowest eigenpair of a dense Hermitian matrix (row-major, destroyed).
pub fn dense_lowest<T: Real>(a: &mut [Complex<T>], n: usize) -> (T, Vec<Complex<T>>) {
    assert!(n > 0);
    let red = tridiagonalize(a, n);
    let mut d = red.diag.clone();
    let mut e = red.offdiag.clone();
    tridiagonal_eigenvalues(&mut d, &mut e);
    let lowest = d.iter().copied().fold(T::infinity(), T::min);
    let y = tridiagonal_eigenvector(&red.diag, &red.offdiag, lowest);
    let mut z = red.back_transform(&y);
    let nz = norm(&z);
    for zi in z.iter_mut() {
        *zi /= nz;
    }
    (lowest, z)
}

/// Eigenvalues of a real symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `d` is overwritten with the (unsorted) eigenvalues;
/// `e[i]` couples `d[i]` and `d[i+1]`.
pub fn tridiagonal_eigenvalues<T: Real>(d: &mut [T], e: &mut [T]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    let mut e_ext = vec![T::zero(); n];
    e_ext[..n - 1].copy_from_slice(&e[..n - 1]);
    let e = &mut e_ext;
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
}

/// Eigenvector of a symmetric tridiagonal for a known eigenvalue, by inverse
/// iteration with partial pivoting.
pub fn tridiagonal_eigenvector<T: Real>(d: &[T], e: &[T], lambda: T) -> Vec<T> {
    let n = d.len();
    if n == 1 {
        return vec![T::one()];
    }
    let scale = d
        .iter()
        .map(|x| x.abs())
        .chain(e.iter().map(|x| x.abs()))
        .fold(T::zero(), T::max)
        .max(T::min_positive_value());
    let shift = lambda - scale * T::epsilon() * T::lit(16.0);
    let mut x = vec![T::one(); n];
    // deterministic, non-symmetric start to avoid orthogonality accidents
    for (i, xi) in x.iter_mut().enumerate() {
        *xi = T::one() + T::lit(((i * 7919) % 97) as f64 / 97.0);
    }
    for _ in 0..4 {
        x = solve_shifted_tridiagonal(d, e, shift, &x, scale);
        let nx = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
        for xi in x.iter_mut() {
            *xi /= nx;
        }
    }
    x
}

/// Solves `(T - shift) x = b` for a symmetric tridiagonal `T` by Gaussian
/// elimination with partial pivoting (the `gtsv` scheme).
fn solve_shifted_tridiagonal<T: Real>(d: &[T], e: &[T], shift: T, b: &[T], scale: T) -> Vec<T> {
    let n = d.len();
    let tiny = scale * T::epsilon() * T::lit(1e-3);
    let mut dl: Vec<T> = e.to_vec();
    let mut dd: Vec<T> = d.iter().map(|x| *x - shift).collect();
    let mut du: Vec<T> = e.to_vec();
    let mut du2 = vec![T::zero(); n];
    let mut x = b.to_vec();
    for i in 0..n - 1 {
        if dd[i].abs() >= dl[i].abs() {
            if dd[i] == T::zero() {
                dd[i] = tiny;
            }
            let f = dl[i] / dd[i];
            dd[i + 1] -= f * du[i];
            x[i + 1] = x[i + 1] - f * x[i];
            dl[i] = T::zero();
        } else {
            let f = dd[i] / dl[i];
            dd[i] = dl[i];
            let tmp = dd[i + 1];
            dd[i + 1] = du[i] - f * tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = tmp;
            x.swap(i, i + 1);
            x[i + 1] = x[i + 1] - f * x[i];
        }
    }
    if dd[n - 1] == T::zero() {
        dd[n - 1] = tiny;
    }
    x[n - 1] /= dd[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / dd[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];
    }
    x
}

/// Lowest eigenpair by Lanczos with full reorthogonalization and explicit
/// restarts from the current Ritz vector.
pub fn lanczos_lowest<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    start: Option<&[Complex<T>]>,
    opts: &EigenOptions,
) -> Result<EigenPair<T>> {
    lanczos_lowest_with(op, start, opts, |_| {})
}

/// Lanczos with a hook applied to every new Krylov vector before
/// orthogonalization (used to keep iterates inside a symmetry sector).
pub fn lanczos_lowest_with<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    start: Option<&[Complex<T>]>,
    opts: &EigenOptions,
    constrain: impl Fn(&mut [Complex<T>]),
) -> Result<EigenPair<T>> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidParams("empty operator".into()));
    }
    let scale = op.norm_bound().max(T::min_positive_value());
    let eig_tol = scale * T::tol(opts.eigenvalue_tol, 10.0);
    let res_tol = scale * T::tol(opts.residual_tol, 1000.0);
    let mut v0: Vec<Complex<T>> = match start {
        Some(s) => s.to_vec(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..n)
                .map(|_| {
                    Complex::new(
                        T::lit(rng.gen::<f64>() - 0.5),
                        T::lit(rng.gen::<f64>() - 0.5),
                    )
                })
                .collect()
        }
    };
    constrain(&mut v0);
    let n0 = norm(&v0);
    if n0 == T::zero() {
        return Err(Error::InvalidParams("Lanczos start vector is zero".into()));
    }
    v0.iter_mut().for_each(|z| *z /= n0);

    let max_basis = opts.max_basis.min(n).max(1);
    let mut last_residual = T::infinity();
    let mut total_iters = 0;
    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<Complex<T>>> = vec![v0.clone()];
        let mut alpha: Vec<T> = Vec::new();
        let mut beta: Vec<T> = Vec::new();
        let mut w = vec![czero::<T>(); n];
        let mut theta_prev = T::infinity();
        let mut ritz: Option<(T, Vec<T>)> = None;
        for j in 0..max_basis {
            total_iters += 1;
            op.apply(&basis[j], &mut w);
            constrain(&mut w);
            let a = inner(&basis[j], &w).re;
            alpha.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = inner(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let b = norm(&w);
            let k = alpha.len();
            let check = k == max_basis || k.is_multiple_of(5) || b <= res_tol * T::lit(1e-3) || k < 5;
            if check {
                let mut d = alpha.clone();
                let mut e = beta.clone();
                e.push(T::zero());
                tridiagonal_eigenvalues(&mut d, &mut e);
                let theta = d.iter().copied().fold(T::infinity(), T::min);
                let y = tridiagonal_eigenvector(&alpha, &beta, theta);
                let est = b * y[k - 1].abs();
                let converged = (theta - theta_prev).abs() < eig_tol && est < res_tol;
                theta_prev = theta;
                ritz = Some((theta, y));
                if converged || b <= res_tol * T::lit(1e-3) {
                    break;
                }
            }
            if j + 1 == max_basis {
                break;
            }
            beta.push(b);
            let next: Vec<Complex<T>> = w.iter().map(|z| *z / b).collect();
            basis.push(next);
        }
        let (theta, y) = ritz.expect("at least one Ritz check");
        let mut psi = vec![czero::<T>(); n];
        for (q, yi) in basis.iter().zip(&y) {
            axpy(Complex::new(*yi, T::zero()), q, &mut psi);
        }
        let np = norm(&psi);
        psi.iter_mut().for_each(|z| *z /= np);
        // Rayleigh quotient of the assembled vector is at least as accurate as theta.
        let mut hpsi = vec![czero::<T>(); n];
        op.apply(&psi, &mut hpsi);
        let rq = inner(&psi, &hpsi).re;
        let value = if (rq - theta).abs() < scale * T::lit(1e-6) { rq } else { theta };
        let residual = residual_norm(op, value, &psi);
        last_residual = residual;
        if residual <= res_tol {
            return Ok(EigenPair {
                value,
                vector: psi,
                residual,
            });
        }
        v0 = psi;
    }
    Err(Error::NoConvergence {
        iterations: total_iters,
        residual: last_residual.as_f64(),
    })
}

/// Dense Hermitian matrix wrapper, mostly for tests.
pub struct DenseHermitian<T> {
    pub n: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> LinearOperator<T> for DenseHermitian<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            y[i] = row.iter().zip(x).fold(czero(), |acc, (a, b)| acc + a * b);
        }
    }

    fn norm_bound(&self) -> T {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|z| z.norm())
                    .sum::<T>()
            })
            .fold(T::zero(), T::max)
    }
}
