//! Discrete Ginzburg-Landau operator.
//!
//! Everything here is matrix free. The kinetic part is the five-point
//! link-variable stencil with doubled neighbours on boundary rows; the
//! Jacobian is only real-linear because of the `psi^2 conj(phi)` term, so all
//! Krylov work treats states as real vectors of length `2 (N + 1)^2` under
//! [`crate::grid::inner_real`].

use num_complex::Complex64;

use crate::error::Result;
use crate::exec::{self, Exec};
use crate::gauge::LinkField;
use crate::grid::{inner_complex_unchecked, Grid, OrderField};
use crate::linalg::banded::SymBand;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point of the phase-condition extended system.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    pub psi: OrderField,
    /// Multiplier of the circle-group generator; zero at true solutions.
    pub eta: f64,
    pub mu: f64,
}

impl ExtendedState {
    pub fn new(psi: OrderField, mu: f64) -> Self {
        Self { psi, eta: 0.0, mu }
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }

    pub fn links(&self) -> LinkField {
        LinkField::new(*self.psi.grid(), self.mu)
    }
}

/// Reference field of the phase condition `Im <psi0, psi> = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState {
    pub psi0: OrderField,
}

impl ReferenceState {
    pub fn new(psi0: OrderField) -> Self {
        Self { psi0 }
    }

    /// `psi0 = 1` everywhere.
    pub fn homogeneous(grid: Grid) -> Self {
        Self { psi0: OrderField::constant(grid, Complex64::new(1.0, 0.0)) }
    }
}

/// Applies the five-point stencil with the given edge factors.
///
/// `diag` scales the center coefficient; the kinetic operator uses 1 and the
/// `mu`-derivative (links replaced by their derivatives) uses 0.
pub(crate) fn stencil_into(
    exec: Exec,
    grid: &Grid,
    ux: &[Complex64],
    uy: &[Complex64],
    diag: f64,
    phi: &[Complex64],
    out: &mut [Complex64],
) {
    let side = grid.side();
    let n = grid.n();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let center = 4.0 * diag;
    exec::for_each_row(exec, out, side, |r, row| {
        let cur = &phi[r * side..(r + 1) * side];
        let lx = &ux[r * n..(r + 1) * n];
        // neighbour rows; boundary rows double the only available neighbour
        let (up, up_w) = if r + 1 < side {
            (Some((&phi[(r + 1) * side..(r + 2) * side], &uy[r * side..(r + 1) * side])), if r == 0 { 2.0 } else { 1.0 })
        } else {
            (None, 0.0)
        };
        let (down, down_w) = if r > 0 {
            (Some((&phi[(r - 1) * side..r * side], &uy[(r - 1) * side..r * side])), if r + 1 == side { 2.0 } else { 1.0 })
        } else {
            (None, 0.0)
        };
        for c in 0..side {
            let mut acc = center * cur[c];
            if c + 1 < side {
                let w = if c == 0 { 2.0 } else { 1.0 };
                acc -= w * lx[c] * cur[c + 1];
            }
            if c > 0 {
                let w = if c + 1 == side { 2.0 } else { 1.0 };
                acc -= w * lx[c - 1].conj() * cur[c - 1];
            }
            if let Some((vals, links)) = up {
                acc -= up_w * links[c] * vals[c];
            }
            if let Some((vals, links)) = down {
                acc -= down_w * links[c].conj() * vals[c];
            }
            row[c] = acc * inv_h2;
        }
    });
}

pub(crate) fn kinetic_into(exec: Exec, links: &LinkField, phi: &[Complex64], out: &mut [Complex64]) {
    stencil_into(exec, links.grid(), links.ux(), links.uy(), 1.0, phi, out);
}

/// `(D_xx + D_yy) phi`.
pub fn kinetic_apply(phi: &OrderField, links: &LinkField) -> Result<OrderField> {
    kinetic_apply_with(Exec::Auto, phi, links)
}

pub fn kinetic_apply_with(exec: Exec, phi: &OrderField, links: &LinkField) -> Result<OrderField> {
    links.check_grid(phi)?;
    let mut out = OrderField::zeros(*phi.grid());
    kinetic_into(exec, links, phi.values(), out.values_mut());
    Ok(out)
}

pub(crate) fn residual_into(exec: Exec, psi: &[Complex64], links: &LinkField, out: &mut [Complex64]) {
    kinetic_into(exec, links, psi, out);
    for (o, &z) in out.iter_mut().zip(psi) {
        *o -= z * (1.0 - z.norm_sqr());
    }
}

/// Node-wise discrete GL residual `K psi - psi (1 - |psi|^2)`.
pub fn residual(psi: &OrderField, links: &LinkField) -> Result<OrderField> {
    residual_with(Exec::Auto, psi, links)
}

pub fn residual_with(exec: Exec, psi: &OrderField, links: &LinkField) -> Result<OrderField> {
    links.check_grid(psi)?;
    let mut out = OrderField::zeros(*psi.grid());
    residual_into(exec, psi.values(), links, out.values_mut());
    Ok(out)
}

pub(crate) fn jacobian_into(
    exec: Exec,
    psi: &[Complex64],
    links: &LinkField,
    phi: &[Complex64],
    out: &mut [Complex64],
) {
    kinetic_into(exec, links, phi, out);
    for ((o, &z), &f) in out.iter_mut().zip(psi).zip(phi) {
        *o += (2.0 * z.norm_sqr() - 1.0) * f + z * z * f.conj();
    }
}

/// `K phi - phi + 2 |psi|^2 phi + psi^2 conj(phi)`.
pub fn apply_jacobian(psi: &OrderField, phi: &OrderField, links: &LinkField) -> Result<OrderField> {
    apply_jacobian_with(Exec::Auto, psi, phi, links)
}

pub fn apply_jacobian_with(exec: Exec, psi: &OrderField, phi: &OrderField, links: &LinkField) -> Result<OrderField> {
    links.check_grid(psi)?;
    psi.check_same_grid(phi)?;
    let mut out = OrderField::zeros(*psi.grid());
    jacobian_into(exec, psi.values(), links, phi.values(), out.values_mut());
    Ok(out)
}

pub(crate) fn dmu_into(exec: Exec, psi: &[Complex64], links: &LinkField, out: &mut [Complex64]) {
    stencil_into(exec, links.grid(), links.dux(), links.duy(), 0.0, psi, out);
}

/// Partial derivative of the residual with respect to `mu`.
pub fn residual_dmu(psi: &OrderField, links: &LinkField) -> Result<OrderField> {
    links.check_grid(psi)?;
    let mut out = OrderField::zeros(*psi.grid());
    dmu_into(Exec::Auto, psi.values(), links, out.values_mut());
    Ok(out)
}

/// `Im <psi0, psi>` with trapezoid weights.
pub fn phase_condition(psi0: &ReferenceState, psi: &OrderField) -> Result<f64> {
    psi0.psi0.check_same_grid(psi)?;
    Ok(inner_complex_unchecked(Exec::Auto, &psi0.psi0, psi).im)
}

/// `(residual(psi) - i eta psi, Im <psi0, psi>)`.
pub fn residual_extended(state: &ExtendedState, psi0: &ReferenceState) -> Result<(OrderField, f64)> {
    let links = state.links();
    residual_extended_with(state, &links, psi0)
}

pub fn residual_extended_with(
    state: &ExtendedState,
    links: &LinkField,
    psi0: &ReferenceState,
) -> Result<(OrderField, f64)> {
    let mut r = residual(&state.psi, links)?;
    for (o, &z) in r.values_mut().iter_mut().zip(state.psi.values()) {
        *o -= I * state.eta * z;
    }
    let p = phase_condition(psi0, &state.psi)?;
    Ok((r, p))
}

/// `((J - i eta) phi - i psi nu, Im <psi0, phi>)`.
pub fn apply_jacobian_extended(
    state: &ExtendedState,
    dir: (&OrderField, f64),
    psi0: &ReferenceState,
) -> Result<(OrderField, f64)> {
    let links = state.links();
    apply_jacobian_extended_with(state, &links, dir, psi0)
}

pub fn apply_jacobian_extended_with(
    state: &ExtendedState,
    links: &LinkField,
    dir: (&OrderField, f64),
    psi0: &ReferenceState,
) -> Result<(OrderField, f64)> {
    let (phi, nu) = dir;
    let mut out = apply_jacobian(&state.psi, phi, links)?;
    for ((o, &z), &f) in out.values_mut().iter_mut().zip(state.psi.values()).zip(phi.values()) {
        *o -= I * (state.eta * f + nu * z);
    }
    let p = phase_condition(psi0, phi)?;
    Ok((out, p))
}

/// Weighted realified `J(psi; mu) + shift` as a symmetric band matrix.
///
/// Row `k` of the result is row `k` of `J + shift` scaled by the quadrature
/// weight of its node, which makes it symmetric in the Euclidean sense. For
/// `shift > 1` it is positive definite.
pub fn assemble_shifted(psi: &OrderField, links: &LinkField, shift: f64) -> Result<SymBand> {
    links.check_grid(psi)?;
    let g = *psi.grid();
    let side = g.side();
    let n = g.n();
    let inv_h2 = 1.0 / (g.h() * g.h());
    let weights = g.node_weights();
    let mut band = SymBand::zeros(g.real_dim(), 2 * side + 1);
    let ux = links.ux();
    let uy = links.uy();
    for p in 0..g.len() {
        let (c, r) = (p % side, p / side);
        let w = weights[p];
        let z = psi.values()[p];
        let sq = z * z;
        let d = 4.0 * inv_h2 - 1.0 + 2.0 * z.norm_sqr() + shift;
        // diagonal block: d * I + [[re, im], [im, -re]] of psi^2
        band.add(2 * p, 2 * p, w * (d + sq.re));
        band.add(2 * p + 1, 2 * p, w * sq.im);
        band.add(2 * p + 1, 2 * p + 1, w * (d - sq.re));
        // couplings to earlier nodes only; the upper half follows by symmetry
        let mut couple = |q: usize, a: Complex64| {
            let a = -w * inv_h2 * a;
            band.add(2 * p, 2 * q, a.re);
            band.add(2 * p, 2 * q + 1, -a.im);
            band.add(2 * p + 1, 2 * q, a.im);
            band.add(2 * p + 1, 2 * q + 1, a.re);
        };
        if c > 0 {
            let m = if c + 1 == side { 2.0 } else { 1.0 };
            couple(p - 1, m * ux[r * n + c - 1].conj());
        }
        if r > 0 {
            let m = if r + 1 == side { 2.0 } else { 1.0 };
            couple(p - side, m * uy[(r - 1) * side + c].conj());
        }
    }
    Ok(band)
}
