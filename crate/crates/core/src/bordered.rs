//! Jacobians of the GL system bordered by extra unknowns and constraints.
//!
//! The Newton corrector works with `[[J - i eta, B], [C, D]]` where the
//! columns of `B` are derivatives of the residual with respect to the extra
//! unknowns (`eta`, and `mu` during continuation) and the rows of `C` are
//! constraint functionals. The whole thing is handed to GMRES as one
//! operator. The preconditioner eliminates the border with a banded Cholesky
//! factor of `W (J + s)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gauge::LinkField;
use crate::glop::{assemble_shifted, jacobian_into};
use crate::grid::OrderField;
use crate::linalg::{LinearOperator, Metric, Preconditioner, SymBandCholesky};

/// Shift that makes `J + s` positive definite for every state (`J >= -1`).
pub const DEFAULT_SHIFT: f64 = 1.05;

/// Realified `-i psi`, the derivative of `-i eta psi` with respect to `eta`.
pub fn eta_column(psi: &OrderField) -> Vec<f64> {
    let mut out = vec![0.0; 2 * psi.values().len()];
    for (k, z) in psi.values().iter().enumerate() {
        out[2 * k] = z.im;
        out[2 * k + 1] = -z.re;
    }
    out
}

/// Row vector `r` with `r . phi = Im <psi0, phi>` for realified `phi`.
pub fn phase_row(psi0: &OrderField) -> Vec<f64> {
    let w = psi0.grid().node_weights();
    let mut out = vec![0.0; 2 * w.len()];
    for (k, (z, wk)) in psi0.values().iter().zip(&w).enumerate() {
        out[2 * k] = -wk * z.im;
        out[2 * k + 1] = wk * z.re;
    }
    out
}

/// Row vector `r` with `r . phi = <t, phi>_W` for realified fields.
pub fn weighted_row(t: &OrderField) -> Vec<f64> {
    let w = t.grid().real_weights();
    t.as_real().iter().zip(&w).map(|(a, b)| a * b).collect()
}

/// `[[J(psi) - i eta, cols], [rows, corner]]` on `R^(2n + k)`.
pub struct BorderedJacobian<'a> {
    psi: &'a OrderField,
    links: &'a LinkField,
    eta: f64,
    cols: Vec<Vec<f64>>,
    rows: Vec<Vec<f64>>,
    corner: DMatrix<f64>,
    exec: Exec,
}

impl<'a> BorderedJacobian<'a> {
    pub fn new(
        psi: &'a OrderField,
        links: &'a LinkField,
        eta: f64,
        cols: Vec<Vec<f64>>,
        rows: Vec<Vec<f64>>,
        corner: DMatrix<f64>,
    ) -> Result<Self> {
        links.check_grid(psi)?;
        let n = psi.grid().real_dim();
        let k = cols.len();
        if rows.len() != k || corner.nrows() != k || corner.ncols() != k {
            return Err(Error::InvalidArgument("border blocks disagree in size".into()));
        }
        if let Some(v) = cols.iter().chain(&rows).find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        Ok(Self { psi, links, eta, cols, rows, corner, exec: Exec::Auto })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn border(&self) -> usize {
        self.cols.len()
    }

    pub fn metric(&self) -> Metric {
        Metric::for_grid(self.psi.grid(), self.border())
    }

    pub fn cols(&self) -> &[Vec<f64>] {
        &self.cols
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn corner(&self) -> &DMatrix<f64> {
        &self.corner
    }
}

impl LinearOperator for BorderedJacobian<'_> {
    fn dim(&self) -> usize {
        self.psi.grid().real_dim() + self.cols.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.psi.grid().real_dim();
        let (xt, xb) = x.split_at(n);
        let (yt, yb) = y.split_at_mut(n);
        let phi: &[Complex64] = bytemuck::cast_slice(xt);
        let out: &mut [Complex64] = bytemuck::cast_slice_mut(yt);
        jacobian_into(self.exec, self.psi.values(), self.links, phi, out);
        if self.eta != 0.0 {
            for (o, f) in out.iter_mut().zip(phi) {
                *o -= Complex64::new(0.0, self.eta) * f;
            }
        }
        for (col, z) in self.cols.iter().zip(xb) {
            for (o, c) in yt.iter_mut().zip(col) {
                *o += c * z;
            }
        }
        for (k, row) in self.rows.iter().enumerate() {
            let mut s: f64 = row.iter().zip(xt).map(|(a, b)| a * b).sum();
            for (l, z) in xb.iter().enumerate() {
                s += self.corner[(k, l)] * z;
            }
            yb[k] = s;
        }
    }
}

/// Factor of `W (J(psi) + shift)` shared by the Newton preconditioner and
/// the shift-invert eigensolver.
#[derive(Debug, Clone)]
pub struct ShiftedFactor {
    chol: SymBandCholesky,
    weights: Vec<f64>,
    shift: f64,
}

impl ShiftedFactor {
    pub fn new(psi: &OrderField, links: &LinkField, shift: f64) -> Result<Self> {
        let band = assemble_shifted(psi, links, shift)?;
        let chol = band.cholesky()?;
        Ok(Self { chol, weights: psi.grid().real_weights(), shift })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `x <- (J + shift)^{-1} x`.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        for (v, w) in x.iter_mut().zip(&self.weights) {
            *v *= w;
        }
        self.chol.solve_in_place(x);
    }
}

/// Block elimination of the border around `(J + s)^{-1}`.
pub struct BorderedPreconditioner<'f> {
    factor: &'f ShiftedFactor,
    inv_cols: Vec<Vec<f64>>,
    rows: Vec<Vec<f64>>,
    schur_inv: Option<DMatrix<f64>>,
}

impl<'f> BorderedPreconditioner<'f> {
    pub fn new(factor: &'f ShiftedFactor, op: &BorderedJacobian<'_>) -> Self {
        let k = op.border();
        let inv_cols: Vec<Vec<f64>> = op
            .cols()
            .iter()
            .map(|c| {
                let mut v = c.clone();
                factor.solve_in_place(&mut v);
                v
            })
            .collect();
        let mut schur = op.corner().clone();
        for a in 0..k {
            for b in 0..k {
                schur[(a, b)] -= dot(&op.rows()[a], &inv_cols[b]);
            }
        }
        let schur_inv = schur.try_inverse().filter(|m| m.iter().all(|v| v.is_finite()));
        Self { factor, inv_cols, rows: op.rows().to_vec(), schur_inv }
    }
}

impl Preconditioner for BorderedPreconditioner<'_> {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.factor.dim();
        let (rt, rb) = r.split_at(n);
        let (zt, zb) = z.split_at_mut(n);
        zt.copy_from_slice(rt);
        self.factor.solve_in_place(zt);
        let k = rb.len();
        let s: Vec<f64> = (0..k).map(|a| rb[a] - dot(&self.rows[a], zt)).collect();
        match &self.schur_inv {
            Some(si) => {
                for a in 0..k {
                    zb[a] = (0..k).map(|b| si[(a, b)] * s[b]).sum();
                }
                for (col, v) in self.inv_cols.iter().zip(zb.iter()) {
                    for (t, c) in zt.iter_mut().zip(col) {
                        *t -= c * v;
                    }
                }
            }
            None => zb.copy_from_slice(rb),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
