use num_complex::Complex64;

use super::detect::detect_bifurcation;
use super::step::{arclength_step, parameter_tangent, phase_align, tangent, Corrected, Tangent};
use super::{Branch, BranchEnd, BranchPoint, ContinuationSettings};
use crate::bordered::ShiftedFactor;
use crate::eigen::stability;
use crate::error::{Error, Result};
use crate::glop::ExtendedState;
use crate::grid::{inner_complex, inner_real, OrderField};
use crate::newton::{newton_solve, ReferencePolicy};
use crate::postproc::{free_energy, total_vorticity};
use crate::symmetry::isotropy;

/// Points with rms amplitude below this enter the terminal fit.
const FIT_RMS: f64 = 0.3;

/// Where a branch starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// Solve from `guess`, then step in the direction of `mu_sign`.
    Guess { guess: ExtendedState, mu_sign: f64 },
    /// Leave the solution `base` along the unit `direction` with a first
    /// step of length `amplitude`.
    Switch { base: ExtendedState, direction: OrderField, amplitude: f64 },
}

/// Evaluates stability and diagnostics of a converged state.
pub fn point_from_solution(
    state: ExtendedState,
    residual_norm: f64,
    newton_iterations: usize,
    arclength: f64,
    settings: &ContinuationSettings,
    warm: &[OrderField],
) -> Result<(BranchPoint, ShiftedFactor)> {
    let links = state.links();
    let factor = ShiftedFactor::new(&state.psi, &links, settings.eigen.shift)?;
    let info = stability(&state.psi, &links, settings.eigen_count, &settings.eigen, warm, Some(&factor))?;
    let point = BranchPoint {
        energy: free_energy(&state.psi),
        isotropy: isotropy(&state.psi, settings.isotropy_tol)?,
        total_vorticity: total_vorticity(&state.psi).ok(),
        stability: info,
        residual_norm,
        newton_iterations,
        arclength,
        state,
    };
    Ok((point, factor))
}

fn predictor_gap(prev: &ExtendedState, t: &Tangent, ds: f64, c: &ExtendedState, w_mu: f64) -> Result<f64> {
    let pred = prev.psi.add_scaled(Complex64::new(ds, 0.0), &t.psi)?;
    let dpsi = c.psi.sub(&pred)?.norm();
    let dmu = c.mu - (prev.mu + ds * t.mu);
    Ok((dpsi * dpsi + w_mu * dmu * dmu).sqrt())
}

/// Zero-amplitude limit of `mu` from a least-squares line in `rms^2`.
fn terminal_mu(points: &[BranchPoint]) -> f64 {
    let data: Vec<(f64, f64)> = points
        .iter()
        .rev()
        .take_while(|p| p.psi().rms() < FIT_RMS)
        .map(|p| (p.psi().rms().powi(2), p.mu()))
        .collect();
    let last = points.last().map(|p| p.mu()).unwrap_or(f64::NAN);
    if data.len() < 2 {
        return last;
    }
    let n = data.len() as f64;
    let (sx, sy) = data.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = data.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return last;
    }
    let sxy: f64 = data.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    my - (sxy / sxx) * mx
}

enum Outcome {
    Accept(Corrected),
    Reject(String),
    /// Corrector passed through `psi = 0`.
    Collapse(Option<Corrected>),
}

fn attempt(
    last: &BranchPoint,
    t: &Tangent,
    ds: f64,
    settings: &ContinuationSettings,
    factor: &ShiftedFactor,
) -> Result<Outcome> {
    let c = match arclength_step(&last.state, t, ds, settings, Some(factor)) {
        Ok(c) => c,
        Err(Error::TrivialState) => return Ok(Outcome::Collapse(None)),
        Err(e @ (Error::NewtonDiverged(_) | Error::LinearSolve(_) | Error::Breakdown(_))) => {
            return Ok(Outcome::Reject(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let gap = predictor_gap(&last.state, t, ds, &c.state, settings.w_mu)?;
    if gap > settings.max_deviation * ds {
        return Ok(Outcome::Reject(format!("corrector moved {gap:.3e} from the predictor")));
    }
    if inner_real(&last.state.psi, &c.state.psi)? < 0.0 || c.state.psi.rms() < settings.trivial_rms {
        return Ok(Outcome::Collapse(Some(c)));
    }
    let t_new = tangent(&last.state, &c.state, settings.w_mu)?;
    if t_new.dot(t, settings.w_mu) < 0.0 {
        return Ok(Outcome::Reject("step reversed the branch direction".into()));
    }
    Ok(Outcome::Accept(c))
}

/// Traces one branch from `start` with adaptive pseudo-arclength steps.
pub fn trace_branch(start: Start, label: &str, settings: &ContinuationSettings) -> Result<Branch> {
    settings.validate()?;
    let w = settings.w_mu;
    let (first, mut anchor) = match start {
        Start::Guess { guess, mu_sign } => {
            let sol = newton_solve(guess, &ReferencePolicy::Auto, &settings.newton)?;
            let psi = phase_to_real(&sol.state.psi)?;
            let state = ExtendedState { psi, ..sol.state };
            ((state, sol.residual_norm, sol.iterations, 0.0), AnchorTangent::Parameter(mu_sign))
        }
        Start::Switch { base, direction, amplitude } => {
            let t = Tangent::along_psi(&direction)?;
            let c = arclength_step(&base, &t, amplitude, settings, None)?;
            if c.state.psi.rms() < settings.trivial_rms {
                return Err(Error::TrivialState);
            }
            ((c.state, c.residual_norm, c.iterations, amplitude), AnchorTangent::Secant(base))
        }
    };
    let (state, res, its, s0) = first;
    let (p0, mut factor) = point_from_solution(state, res, its, s0, settings, &[])?;
    let mut branch = Branch {
        label: label.to_string(),
        parent: None,
        points: vec![p0],
        bifurcations: Vec::new(),
        end: BranchEnd::MaxPoints,
        warnings: Vec::new(),
    };
    if !in_window(branch.points[0].mu(), settings) {
        branch.end = BranchEnd::WindowExit;
        return Ok(branch);
    }
    let mut ds = settings.ds;
    let mut since_extremum: Option<usize> = None;
    while branch.points.len() < settings.max_points {
        let last = branch.points.last().expect("non-empty branch");
        let t = match &anchor {
            AnchorTangent::Parameter(sign) => match parameter_tangent(&last.state, *sign, settings, &factor) {
                Ok(t) => t,
                Err(Error::LinearSolve(_) | Error::Breakdown(_)) => Tangent::along_mu(*last.state.grid(), *sign, w),
                Err(e) => return Err(e),
            },
            AnchorTangent::Secant(prev) => tangent(prev, &last.state, w)?,
        };
        let outcome = attempt(last, &t, ds, settings, &factor)?;
        let c = match outcome {
            Outcome::Accept(c) => c,
            Outcome::Collapse(crossed) => {
                if last.psi().rms() < settings.collapse_rms {
                    if let Some(c) = crossed {
                        let psi = phase_align(&c.state.psi, &last.state.psi)?;
                        let s = last.arclength + ds;
                        let warm = last.stability.eigenfields.clone();
                        let state = ExtendedState { psi, ..c.state };
                        let (p, _) = point_from_solution(state, c.residual_norm, c.iterations, s, settings, &warm)?;
                        branch.points.push(p);
                    }
                    branch.end = BranchEnd::Trivial { mu: terminal_mu(&branch.points) };
                    return Ok(branch);
                }
                ds *= 0.5;
                if ds < settings.ds_min {
                    branch.end = BranchEnd::StepFailure("step collapsed onto the trivial state".into());
                    return Ok(branch);
                }
                continue;
            }
            Outcome::Reject(why) => {
                ds *= 0.5;
                if ds < settings.ds_min {
                    if last.psi().rms() < settings.collapse_rms {
                        branch.end = BranchEnd::Trivial { mu: terminal_mu(&branch.points) };
                    } else {
                        branch.end = BranchEnd::StepFailure(why);
                    }
                    return Ok(branch);
                }
                continue;
            }
        };
        let fast = c.iterations <= settings.fast_iterations;
        let warm = last.stability.eigenfields.clone();
        let (p, f) = point_from_solution(c.state, c.residual_norm, c.iterations, last.arclength + ds, settings, &warm)?;
        let prev_state = last.state.clone();
        if settings.detect && p.n_unstable() != last.n_unstable() {
            let next_id = branch.bifurcations.len();
            match detect_bifurcation(last, &p, settings, next_id) {
                Ok(found) => branch.bifurcations.extend(found),
                Err(e) => branch.warnings.push(format!("near mu = {:.6}: {e}", p.mu())),
            }
        }
        if let Some(k) = since_extremum.as_mut() {
            *k += 1;
        } else if branch.points.len() >= 2 {
            let n = branch.points.len();
            let d_old = branch.points[n - 1].mu() - branch.points[n - 2].mu();
            let d_new = p.mu() - branch.points[n - 1].mu();
            if d_old * d_new < 0.0 {
                since_extremum = Some(0);
            }
        }
        let mu = p.mu();
        branch.points.push(p);
        factor = f;
        anchor = AnchorTangent::Secant(prev_state);
        if !in_window(mu, settings) {
            branch.end = BranchEnd::WindowExit;
            return Ok(branch);
        }
        if let (Some(k), Some(limit)) = (since_extremum, settings.stop_after_extremum) {
            if k >= limit {
                branch.end = BranchEnd::AfterExtremum;
                return Ok(branch);
            }
        }
        if fast {
            ds = (ds * settings.grow).min(settings.ds_max);
        }
    }
    branch.end = BranchEnd::MaxPoints;
    Ok(branch)
}

enum AnchorTangent {
    /// Tangent of the branch in the direction of this sign of `mu`.
    Parameter(f64),
    Secant(ExtendedState),
}

fn in_window(mu: f64, settings: &ContinuationSettings) -> bool {
    mu >= settings.mu_min && mu <= settings.mu_max
}

/// Rotates the global phase so that the weighted sum of `psi` is real and
/// positive.
fn phase_to_real(psi: &OrderField) -> Result<OrderField> {
    let one = OrderField::constant(*psi.grid(), Complex64::new(1.0, 0.0));
    let c = inner_complex(psi, &one)?;
    if c.norm() < 1e-12 * psi.norm().max(1.0) {
        return Ok(psi.clone());
    }
    Ok(psi.scale(c / c.norm()))
}
