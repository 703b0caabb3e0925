//! Damped Newton iteration for small square systems with a restricted domain.
//!
//! The residual closure returns `None` outside its domain; trial steps that
//! leave the domain are shortened the same way as steps that fail the
//! sufficient-decrease test.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Convergence threshold on the Euclidean norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome<const N: usize> {
    pub x: [f64; N],
    pub residual: f64,
    pub iterations: usize,
    /// Residual norm before each iteration and after the last one.
    pub trace: Vec<f64>,
}

const MAX_HALVINGS: usize = 60;
const ARMIJO: f64 = 1e-4;

fn norm<const N: usize>(r: &[f64; N]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn jacobian<const N: usize, F>(f: &F, x: &[f64; N], fx: &[f64; N]) -> DMatrix<f64>
where
    F: Fn(&[f64; N]) -> Option<[f64; N]>,
{
    let mut jac = DMatrix::<f64>::zeros(N, N);
    for j in 0..N {
        let h = 1e-7 * x[j].abs().max(1.0);
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += h;
        xm[j] -= h;
        let col: [f64; N] = match (f(&xp), f(&xm)) {
            (Some(p), Some(m)) => std::array::from_fn(|i| (p[i] - m[i]) / (2.0 * h)),
            (Some(p), None) => std::array::from_fn(|i| (p[i] - fx[i]) / h),
            (None, Some(m)) => std::array::from_fn(|i| (fx[i] - m[i]) / h),
            (None, None) => [0.0; N],
        };
        for i in 0..N {
            jac[(i, j)] = col[i];
        }
    }
    jac
}

fn newton_direction(jac: &DMatrix<f64>, r: &[f64]) -> Option<DVector<f64>> {
    let n = r.len();
    let rhs = -DVector::<f64>::from_column_slice(r);
    if let Some(step) = jac.clone().lu().solve(&rhs) {
        if step.iter().all(|v| v.is_finite()) {
            return Some(step);
        }
    }
    // Singular Jacobian: regularized least-squares step.
    let jt = jac.transpose();
    let mut normal = &jt * jac;
    let mu = 1e-8 * normal.trace().max(f64::MIN_POSITIVE);
    for i in 0..n {
        normal[(i, i)] += mu;
    }
    normal.lu().solve(&(&jt * rhs)).filter(|s| s.iter().all(|v| v.is_finite()))
}

/// Solves `f(x) = 0` from `x0`. `method` names the solver in error reports.
pub fn damped_newton<const N: usize, F>(
    f: F,
    x0: [f64; N],
    opts: NewtonOptions,
    method: &'static str,
) -> Result<NewtonOutcome<N>>
where
    F: Fn(&[f64; N]) -> Option<[f64; N]>,
{
    let Some(mut fx) = f(&x0) else {
        return Err(Error::InvalidArgument(format!("{method}: initial guess {x0:?} is outside the solver domain")));
    };
    let mut x = x0;
    let mut res = norm(&fx);
    let mut trace = vec![res];
    let fail = |iterations: usize, residual: f64, trace: Vec<f64>| Error::NonConvergence {
        method,
        iterations,
        residual,
        last: None,
        trace,
    };

    for iter in 0..opts.max_iter {
        if !res.is_finite() {
            return Err(fail(iter, res, trace));
        }
        if res < opts.tol {
            return Ok(NewtonOutcome { x, residual: res, iterations: iter, trace });
        }
        let jac = jacobian(&f, &x, &fx);
        let Some(step) = newton_direction(&jac, &fx) else {
            return Err(fail(iter, res, trace));
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: [f64; N] = std::array::from_fn(|i| x[i] + t * step[i]);
            if let Some(ft) = f(&trial) {
                let rt = norm(&ft);
                if rt.is_finite() && rt <= (1.0 - ARMIJO * t) * res {
                    accepted = Some((trial, ft, rt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((nx, nf, nr)) = accepted else {
            return Err(fail(iter + 1, res, trace));
        };
        x = nx;
        fx = nf;
        res = nr;
        trace.push(res);
    }
    if res < opts.tol {
        Ok(NewtonOutcome { x, residual: res, iterations: opts.max_iter, trace })
    } else {
        Err(fail(opts.max_iter, res, trace))
    }
}
