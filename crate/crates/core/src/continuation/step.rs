use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ContinuationSettings;
use crate::bordered::{eta_column, phase_row, weighted_row, BorderedJacobian, BorderedPreconditioner, ShiftedFactor};
use crate::error::{Error, Result};
use crate::gauge::LinkField;
use crate::glop::{residual, residual_dmu, ExtendedState, ReferenceState};
use crate::grid::{inner_complex, inner_real, Grid, OrderField};
use crate::linalg::{solve_general_precond, Preconditioner};
use crate::newton::extended_norm;

/// Direction in `(psi, mu)` space, unit in the combined norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub psi: OrderField,
    pub mu: f64,
}

impl Tangent {
    /// Pure parameter step in the direction of `sign`.
    pub fn along_mu(grid: Grid, sign: f64, w_mu: f64) -> Self {
        Self { psi: OrderField::zeros(grid), mu: sign.signum() / w_mu.sqrt() }
    }

    /// Pure state step, used to leave a bifurcation point.
    pub fn along_psi(dir: &OrderField) -> Result<Self> {
        let n = dir.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("zero switching direction".into()));
        }
        Ok(Self { psi: dir.scale(Complex64::new(1.0 / n, 0.0)), mu: 0.0 })
    }

    pub fn dot(&self, other: &Tangent, w_mu: f64) -> f64 {
        inner_real(&self.psi, &other.psi).unwrap_or(f64::NAN) + w_mu * self.mu * other.mu
    }

    pub fn norm(&self, w_mu: f64) -> f64 {
        self.dot(self, w_mu).max(0.0).sqrt()
    }
}

/// `e^{i chi} psi` closest to `target`.
pub fn phase_align(psi: &OrderField, target: &OrderField) -> Result<OrderField> {
    let c = inner_complex(psi, target)?;
    if c.norm() == 0.0 {
        return Ok(psi.clone());
    }
    Ok(psi.scale(c / c.norm()))
}

/// Normalized secant from `prev` to `last` after phase alignment.
pub fn tangent(prev: &ExtendedState, last: &ExtendedState, w_mu: f64) -> Result<Tangent> {
    let aligned = phase_align(&last.psi, &prev.psi)?;
    let t = Tangent { psi: aligned.sub(&prev.psi)?, mu: last.mu - prev.mu };
    let n = t.norm(w_mu);
    if !(n > 0.0) {
        return Err(Error::Continuation("coincident points have no secant".into()));
    }
    Ok(Tangent { psi: t.psi.scale(Complex64::new(1.0 / n, 0.0)), mu: t.mu / n })
}

/// Converged corrector output.
#[derive(Debug, Clone, PartialEq)]
pub struct Corrected {
    pub state: ExtendedState,
    pub residual_norm: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// One predictor-corrector step of length `ds` from `prev` along `t`.
///
/// The corrector solves the phase-condition system augmented by
/// `<t_psi, psi - psi_prev>_W + w_mu t_mu (mu - mu_prev) = ds` with Newton
/// in `(psi, eta, mu)`. `factor`, when given, should be the shifted factor
/// at `prev`; it is only used as a preconditioner.
pub fn arclength_step(
    prev: &ExtendedState,
    t: &Tangent,
    ds: f64,
    settings: &ContinuationSettings,
    factor: Option<&ShiftedFactor>,
) -> Result<Corrected> {
    let grid = *prev.grid();
    prev.psi.check_same_grid(&t.psi)?;
    let owned;
    let factor = match factor {
        Some(f) => f,
        None => {
            owned = ShiftedFactor::new(&prev.psi, &prev.links(), settings.newton.shift)?;
            &owned
        }
    };
    let pn = prev.psi.norm();
    if !(pn > 0.0) {
        return Err(Error::TrivialState);
    }
    let reference = ReferenceState::new(prev.psi.scale(Complex64::new(1.0 / pn, 0.0)));
    let prow = phase_row(&reference.psi0);
    let trow = weighted_row(&t.psi);
    let w = settings.w_mu;
    let ns = &settings.newton;

    let mut psi = prev.psi.add_scaled(Complex64::new(ds, 0.0), &t.psi)?;
    let mut mu = prev.mu + ds * t.mu;
    let mut eta = 0.0;
    let mut history = Vec::new();
    let n = grid.real_dim();
    let maxit = ns.linear_maxit.unwrap_or(10 * (n + 2));
    for it in 0..=ns.max_iter {
        if psi.rms() < 1e-8 {
            return Err(Error::TrivialState);
        }
        let links = LinkField::new(grid, mu);
        let mut r1 = residual(&psi, &links)?;
        for (o, z) in r1.values_mut().iter_mut().zip(psi.values()) {
            *o -= Complex64::new(0.0, eta) * z;
        }
        let r2 = inner_complex(&reference.psi0, &psi)?.im;
        let r3 = inner_real(&t.psi, &psi.sub(&prev.psi)?)? + w * t.mu * (mu - prev.mu) - ds;
        let norm = extended_norm(&r1, r2).hypot(r3);
        if !norm.is_finite() {
            return Err(Error::NewtonDiverged("non-finite corrector residual".into()));
        }
        history.push(norm);
        if norm <= ns.tol {
            return Ok(Corrected { state: ExtendedState { psi, eta, mu }, residual_norm: norm, iterations: it, history });
        }
        if norm > ns.growth_limit * history[0] || it == ns.max_iter {
            break;
        }
        let dmu = residual_dmu(&psi, &links)?;
        let mut corner = DMatrix::zeros(2, 2);
        corner[(1, 1)] = w * t.mu;
        let op = BorderedJacobian::new(
            &psi,
            &links,
            eta,
            vec![eta_column(&psi), dmu.as_real().to_vec()],
            vec![prow.clone(), trow.clone()],
            corner,
        )?;
        let pre = BorderedPreconditioner::new(factor, &op);
        let mut rhs: Vec<f64> = r1.as_real().iter().map(|v| -v).collect();
        rhs.push(-r2);
        rhs.push(-r3);
        let (dx, report) = solve_general_precond(
            &op,
            &op.metric(),
            Some(&pre as &dyn Preconditioner),
            &rhs,
            ns.linear_tol_at(norm),
            maxit,
            ns.restart,
        )?;
        if !(report.relative_residual < 0.1) {
            return Err(Error::LinearSolve(format!("corrector residual {:.3e}", report.relative_residual)));
        }
        psi = psi.add_scaled(Complex64::new(1.0, 0.0), &OrderField::from_real(grid, &dx[..n])?)?;
        eta += dx[n];
        mu += dx[n + 1];
    }
    Err(Error::NewtonDiverged(format!(
        "corrector stalled at {:.3e} after {} iterations",
        history.last().copied().unwrap_or(f64::NAN),
        history.len().saturating_sub(1)
    )))
}

/// Tangent of the branch through the solution `state` in the direction of
/// increasing `mu` times `sign`, from `J dpsi/dmu = -d_mu GL` under the phase
/// condition.
pub fn parameter_tangent(
    state: &ExtendedState,
    sign: f64,
    settings: &ContinuationSettings,
    factor: &ShiftedFactor,
) -> Result<Tangent> {
    let grid = *state.grid();
    let pn = state.psi.norm();
    if !(pn > 0.0) {
        return Err(Error::TrivialState);
    }
    let links = state.links();
    let reference = state.psi.scale(Complex64::new(1.0 / pn, 0.0));
    let dmu = residual_dmu(&state.psi, &links)?;
    let op = BorderedJacobian::new(
        &state.psi,
        &links,
        state.eta,
        vec![eta_column(&state.psi)],
        vec![phase_row(&reference)],
        DMatrix::zeros(1, 1),
    )?;
    let pre = BorderedPreconditioner::new(factor, &op);
    let mut rhs: Vec<f64> = dmu.as_real().iter().map(|v| -v).collect();
    rhs.push(0.0);
    let n = grid.real_dim();
    let ns = &settings.newton;
    let (dx, report) = solve_general_precond(
        &op,
        &op.metric(),
        Some(&pre as &dyn Preconditioner),
        &rhs,
        ns.linear_tol_at(0.0),
        ns.linear_maxit.unwrap_or(10 * (n + 1)),
        ns.restart,
    )?;
    if !(report.relative_residual < 1e-4) {
        return Err(Error::LinearSolve(format!("tangent residual {:.3e}", report.relative_residual)));
    }
    let s = sign.signum();
    let t = Tangent { psi: OrderField::from_real(grid, &dx[..n])?.scale(Complex64::new(s, 0.0)), mu: s };
    let norm = t.norm(settings.w_mu);
    Ok(Tangent { psi: t.psi.scale(Complex64::new(1.0 / norm, 0.0)), mu: t.mu / norm })
}
