//! Newton-Krylov iteration on the phase-condition extended system.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bordered::{eta_column, phase_row, BorderedJacobian, BorderedPreconditioner, ShiftedFactor, DEFAULT_SHIFT};
use crate::error::{Error, Result};
use crate::gauge::LinkField;
use crate::glop::{residual_extended_with, ExtendedState, ReferenceState};
use crate::grid::{inner_complex, OrderField};
use crate::linalg::{solve_general_precond, LinearOperator, Preconditioner};

/// Below this relative pairing `|<psi0, psi>| / (||psi0|| ||psi||)` the
/// homogeneous reference is abandoned.
pub const PAIRING_THRESHOLD: f64 = 1e-6;

/// Below this rms amplitude a state counts as the trivial solution.
pub const TRIVIAL_RMS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum ReferencePolicy {
    Fixed(ReferenceState),
    /// `psi0` is reset to the current iterate before every step.
    UpdateEachStep,
    /// `psi0 = 1`, switching to [`ReferencePolicy::UpdateEachStep`] when the
    /// iterate is nearly orthogonal to it.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LinearTolerance {
    Fixed(f64),
    /// `max(min, min(0.1, factor * ||F||))`.
    Forcing { min: f64, factor: f64 },
}

impl LinearTolerance {
    fn at(&self, residual: f64) -> f64 {
        match *self {
            LinearTolerance::Fixed(t) => t,
            LinearTolerance::Forcing { min, factor } => (factor * residual).min(0.1).max(min),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonSettings {
    /// Absolute tolerance on the weighted extended residual norm.
    pub tol: f64,
    pub max_iter: usize,
    pub linear_tol: LinearTolerance,
    /// `None` means ten times the system dimension.
    pub linear_maxit: Option<usize>,
    pub restart: usize,
    /// Step halvings tried when a full step increases the residual.
    pub halvings: usize,
    /// Divergence is declared when the residual exceeds this multiple of the
    /// initial one.
    pub growth_limit: f64,
    pub shift: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 30,
            linear_tol: LinearTolerance::Fixed(1e-10),
            linear_maxit: None,
            restart: 80,
            halvings: 0,
            growth_limit: 1e4,
            shift: DEFAULT_SHIFT,
        }
    }
}

impl NewtonSettings {
    pub fn linear_tol_at(&self, residual: f64) -> f64 {
        self.linear_tol.at(residual)
    }

    pub fn validate(&self) -> Result<()> {
        let lt = match self.linear_tol {
            LinearTolerance::Fixed(t) => t,
            LinearTolerance::Forcing { min, factor } => min.min(factor),
        };
        if !(self.tol > 0.0 && lt > 0.0 && self.growth_limit > 1.0 && self.shift > 1.0) || self.max_iter == 0 {
            return Err(Error::InvalidArgument("Newton tolerances must be positive and shift > 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub state: ExtendedState,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Extended residual norm before every step and at the end.
    pub history: Vec<f64>,
    /// Reference used for the last step.
    pub reference: ReferenceState,
    pub linear_iterations: Vec<usize>,
}

/// `psi0 := psi`.
pub fn update_reference(current: &OrderField) -> ReferenceState {
    ReferenceState::new(current.clone())
}

fn relative_pairing(psi0: &OrderField, psi: &OrderField) -> f64 {
    let denom = psi0.norm() * psi.norm();
    if denom == 0.0 {
        return 0.0;
    }
    inner_complex(psi0, psi).map(|c| c.norm()).unwrap_or(0.0) / denom
}

pub(crate) fn extended_norm(r: &OrderField, p: f64) -> f64 {
    (r.norm().powi(2) + p * p).sqrt()
}

/// Solves `GL(psi) - i eta psi = 0`, `Im <psi0, psi> = 0` from `guess`.
pub fn newton_solve(guess: ExtendedState, policy: &ReferencePolicy, settings: &NewtonSettings) -> Result<Solution> {
    newton_solve_with(guess, policy, settings, None)
}

/// As [`newton_solve`], reusing `factor` as the preconditioner instead of
/// factoring at the guess.
pub fn newton_solve_with(
    guess: ExtendedState,
    policy: &ReferencePolicy,
    settings: &NewtonSettings,
    factor: Option<&ShiftedFactor>,
) -> Result<Solution> {
    settings.validate()?;
    if !guess.psi.is_finite() || !guess.eta.is_finite() || !guess.mu.is_finite() {
        return Err(Error::InvalidArgument("non-finite guess".into()));
    }
    let grid = *guess.grid();
    let links = guess.links();
    let homogeneous = ReferenceState::homogeneous(grid);
    let mut update = matches!(policy, ReferencePolicy::UpdateEachStep);
    let mut reference = match policy {
        ReferencePolicy::Fixed(r) => {
            r.psi0.check_same_grid(&guess.psi)?;
            r.clone()
        }
        ReferencePolicy::UpdateEachStep => update_reference(&guess.psi),
        ReferencePolicy::Auto => homogeneous.clone(),
    };

    let owned;
    let factor = match factor {
        Some(f) => f,
        None => {
            owned = ShiftedFactor::new(&guess.psi, &links, settings.shift)?;
            &owned
        }
    };

    let mut state = guess;
    let mut history = Vec::new();
    let mut linear_iterations = Vec::new();
    let dim = grid.real_dim() + 1;
    let maxit = settings.linear_maxit.unwrap_or(10 * dim);

    for it in 0..=settings.max_iter {
        if state.psi.rms() < TRIVIAL_RMS * 1e-2 {
            return Err(Error::TrivialState);
        }
        if matches!(policy, ReferencePolicy::Auto)
            && !update
            && relative_pairing(&homogeneous.psi0, &state.psi) < PAIRING_THRESHOLD
        {
            update = true;
        }
        if update {
            reference = update_reference(&state.psi);
        }
        let (r, p) = residual_extended_with(&state, &links, &reference)?;
        let norm = extended_norm(&r, p);
        if !norm.is_finite() {
            return Err(Error::NewtonDiverged(format!("non-finite residual at iteration {it}")));
        }
        history.push(norm);
        if norm <= settings.tol {
            if state.psi.rms() < TRIVIAL_RMS {
                return Err(Error::TrivialState);
            }
            return Ok(Solution {
                state,
                residual_norm: norm,
                iterations: it,
                history,
                reference,
                linear_iterations,
            });
        }
        if norm > settings.growth_limit * history[0] {
            return Err(Error::NewtonDiverged(format!("residual grew from {:.3e} to {norm:.3e}", history[0])));
        }
        if it == settings.max_iter {
            break;
        }

        let op = BorderedJacobian::new(
            &state.psi,
            &links,
            state.eta,
            vec![eta_column(&state.psi)],
            vec![phase_row(&reference.psi0)],
            DMatrix::zeros(1, 1),
        )?;
        let pre = BorderedPreconditioner::new(factor, &op);
        let mut rhs: Vec<f64> = r.as_real().iter().map(|v| -v).collect();
        rhs.push(-p);
        let (dx, report) = solve_general_precond(
            &op,
            &op.metric(),
            Some(&pre as &dyn Preconditioner),
            &rhs,
            settings.linear_tol.at(norm),
            maxit,
            settings.restart,
        )?;
        linear_iterations.push(report.iterations);
        if !(report.relative_residual < 0.1) {
            return Err(Error::LinearSolve(format!(
                "relative residual {:.3e} after {} iterations",
                report.relative_residual, report.iterations
            )));
        }

        let n = grid.real_dim();
        let step = OrderField::from_real(grid, &dx[..n])?;
        let nu = dx[n];
        let mut lambda = 1.0;
        let mut next = advance(&state, &step, nu, lambda)?;
        for _ in 0..settings.halvings {
            if update {
                // the constraint is re-anchored next step; judge on GL alone
                reference = update_reference(&next.psi);
            }
            let (rn, pn) = residual_extended_with(&next, &links, &reference)?;
            if extended_norm(&rn, pn) < norm {
                break;
            }
            lambda *= 0.5;
            next = advance(&state, &step, nu, lambda)?;
        }
        state = next;
    }
    Err(Error::NewtonDiverged(format!(
        "no convergence in {} iterations, residual {:.3e}",
        settings.max_iter,
        history.last().copied().unwrap_or(f64::NAN)
    )))
}

fn advance(state: &ExtendedState, step: &OrderField, nu: f64, lambda: f64) -> Result<ExtendedState> {
    Ok(ExtendedState {
        psi: state.psi.add_scaled(Complex64::new(lambda, 0.0), step)?,
        eta: state.eta + lambda * nu,
        mu: state.mu,
    })
}

/// Unextended Newton step `J dx = -GL(psi)` for diagnostics; the operator is
/// singular at solutions, which is what the regularization removes.
pub fn plain_jacobian<'a>(psi: &'a OrderField, links: &'a LinkField) -> impl LinearOperator + 'a {
    let n = psi.grid().real_dim();
    crate::linalg::FnOperator::new(n, true, move |x: &[f64], y: &mut [f64]| {
        let phi: &[Complex64] = bytemuck::cast_slice(x);
        let out: &mut [Complex64] = bytemuck::cast_slice_mut(y);
        crate::glop::jacobian_into(crate::exec::Exec::Auto, psi.values(), links, phi, out);
    })
}
