//! Minimal-residual Krylov solvers under a diagonal metric.

use serde::{Deserialize, Serialize};

use super::{axpy, scale, LinearOperator, Metric, Preconditioner};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||A x - b|| / ||b||`, recomputed from the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
    pub condition_estimate: Option<f64>,
    /// Recurrence residual estimate after every iteration.
    pub history: Vec<f64>,
}

fn true_residual(op: &dyn LinearOperator, metric: &Metric, x: &[f64], b: &[f64], bnorm: f64) -> f64 {
    let mut ax = vec![0.0; x.len()];
    op.apply(x, &mut ax);
    for (a, bi) in ax.iter_mut().zip(b) {
        *a = bi - *a;
    }
    metric.norm(&ax) / bnorm
}

fn check_dims(op: &dyn LinearOperator, metric: &Metric, rhs: &[f64]) -> Result<()> {
    if rhs.len() != op.dim() || metric.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: rhs.len() });
    }
    Ok(())
}

/// MINRES for an operator self-adjoint under `metric`.
///
/// Starting from zero, the iterate for a consistent singular system is the
/// minimum-norm solution. Hitting `maxit` is reported through
/// [`SolveReport::converged`], not as an error.
pub fn solve_symmetric(
    op: &dyn LinearOperator,
    metric: &Metric,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    check_dims(op, metric, rhs)?;
    let n = op.dim();
    let mut x = vec![0.0; n];
    let beta1 = metric.norm(rhs);
    if beta1 == 0.0 {
        let report = SolveReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
            condition_estimate: None,
            history: vec![],
        };
        return Ok((x, report));
    }
    let mut r1 = rhs.to_vec();
    let mut r2 = rhs.to_vec();
    let mut y = rhs.to_vec();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut gmax: f64 = 0.0;
    let mut gmin = f64::MAX;

    for itn in 1..=maxit {
        iterations = itn;
        v.copy_from_slice(&y);
        scale(1.0 / beta, &mut v);
        op.apply(&v, &mut y);
        if itn >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = metric.dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = metric.norm(&y);
        if !beta.is_finite() || !alfa.is_finite() {
            return Err(Error::Breakdown("NaN in MINRES recurrence".into()));
        }
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        gmax = gmax.max(gamma);
        gmin = gmin.min(gamma);
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for k in 0..n {
            w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) / gamma;
        }
        axpy(phi, &w, &mut x);
        history.push(phibar / beta1);
        if phibar / beta1 <= tol || beta <= f64::EPSILON * beta1 {
            break;
        }
    }
    let rel = true_residual(op, metric, &x, rhs, beta1);
    let report = SolveReport {
        iterations,
        relative_residual: rel,
        converged: rel <= tol,
        condition_estimate: Some(gmax / gmin),
        history,
    };
    Ok((x, report))
}

/// Restarted GMRES without preconditioning.
pub fn solve_general(
    op: &dyn LinearOperator,
    metric: &Metric,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    solve_general_precond(op, metric, None, rhs, tol, maxit, 200)
}

/// Restarted GMRES with an optional right preconditioner. `maxit` counts
/// operator applications across restarts.
pub fn solve_general_precond(
    op: &dyn LinearOperator,
    metric: &Metric,
    precond: Option<&dyn Preconditioner>,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
    restart: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    check_dims(op, metric, rhs)?;
    let n = op.dim();
    let m = restart.max(1).min(n.max(1));
    let mut x = vec![0.0; n];
    let bnorm = metric.norm(rhs);
    let mut history = Vec::new();
    if bnorm == 0.0 {
        let report =
            SolveReport { iterations: 0, relative_residual: 0.0, converged: true, condition_estimate: None, history };
        return Ok((x, report));
    }
    let mut iterations = 0;
    let mut r = rhs.to_vec();
    let mut tmp = vec![0.0; n];
    loop {
        // r = b - A x
        op.apply(&x, &mut tmp);
        for k in 0..n {
            r[k] = rhs[k] - tmp[k];
        }
        let beta = metric.norm(&r);
        if !beta.is_finite() {
            return Err(Error::Breakdown("NaN in GMRES residual".into()));
        }
        if beta / bnorm <= tol || iterations >= maxit {
            break;
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut v0 = r.clone();
        scale(1.0 / beta, &mut v0);
        basis.push(v0);
        let mut cols = 0;
        for j in 0..m {
            let z = match precond {
                Some(p) => {
                    let mut z = vec![0.0; n];
                    p.apply(&basis[j], &mut z);
                    z
                }
                None => basis[j].clone(),
            };
            let mut w = vec![0.0; n];
            op.apply(&z, &mut w);
            zs.push(z);
            let wnorm0 = metric.norm(&w);
            for (i, vi) in basis.iter().enumerate() {
                let hij = metric.dot(&w, vi);
                hess[i][j] = hij;
                axpy(-hij, vi, &mut w);
            }
            // one reorthogonalization pass when cancellation was severe
            if metric.norm(&w) < 0.5 * wnorm0 {
                for (i, vi) in basis.iter().enumerate() {
                    let c = metric.dot(&w, vi);
                    hess[i][j] += c;
                    axpy(-c, vi, &mut w);
                }
            }
            let hnext = metric.norm(&w);
            if !hnext.is_finite() {
                return Err(Error::Breakdown("NaN in Arnoldi step".into()));
            }
            hess[j + 1][j] = hnext;
            for i in 0..j {
                let t = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
                hess[i + 1][j] = -sn[i] * hess[i][j] + cs[i] * hess[i + 1][j];
                hess[i][j] = t;
            }
            let denom = hess[j][j].hypot(hess[j + 1][j]);
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = hess[j][j] / denom;
                sn[j] = hess[j + 1][j] / denom;
            }
            hess[j][j] = denom;
            hess[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            iterations += 1;
            cols = j + 1;
            let est = g[j + 1].abs() / bnorm;
            history.push(est);
            if est <= tol || hnext <= f64::EPSILON * bnorm || iterations >= maxit {
                break;
            }
            let mut vnext = w;
            scale(1.0 / hnext, &mut vnext);
            basis.push(vnext);
        }
        // back substitution on the triangular factor
        let mut yv = vec![0.0; cols];
        for i in (0..cols).rev() {
            let s: f64 = ((i + 1)..cols).map(|k| hess[i][k] * yv[k]).sum();
            yv[i] = if hess[i][i] != 0.0 { (g[i] - s) / hess[i][i] } else { 0.0 };
        }
        for (yi, z) in yv.iter().zip(&zs) {
            axpy(*yi, z, &mut x);
        }
        let stalled = history.len() >= 2 * m && {
            let k = history.len();
            history[k - 1] > 0.999 * history[k - 1 - m]
        };
        if iterations >= maxit || stalled {
            break;
        }
    }
    let rel = true_residual(op, metric, &x, rhs, bnorm);
    let report = SolveReport {
        iterations,
        relative_residual: rel,
        converged: rel <= tol,
        condition_estimate: None,
        history,
    };
    Ok((x, report))
}
