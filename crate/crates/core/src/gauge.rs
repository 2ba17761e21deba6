//! Applied vector potential and per-edge link variables.
//!
//! The potential is the symmetric gauge `A = (-mu y, mu x) / 2` with gauge
//! origin at the square's center. Because `A` is linear the edge integrals
//! are exact, so every link is `exp(i mu c_e)` for a fixed per-edge rate `c_e`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, OrderField};

/// `A(x, y; mu) = (-mu y / 2, mu x / 2)`.
pub fn vector_potential(mu: f64, x: f64, y: f64) -> (f64, f64) {
    (-0.5 * mu * y, 0.5 * mu * x)
}

/// Integral of `A_x(., y_j)` over `[x_i, x_{i+1}]`.
pub fn edge_integral_x(mu: f64, i: i64, j: i64, grid: &Grid) -> Result<f64> {
    check_edge(grid, i, j, true)?;
    Ok(-0.5 * mu * grid.x(j) * grid.h())
}

/// Integral of `A_y(x_i, .)` over `[y_j, y_{j+1}]`.
pub fn edge_integral_y(mu: f64, i: i64, j: i64, grid: &Grid) -> Result<f64> {
    check_edge(grid, i, j, false)?;
    Ok(0.5 * mu * grid.x(i) * grid.h())
}

fn check_edge(grid: &Grid, i: i64, j: i64, along_x: bool) -> Result<()> {
    grid.check_index(i)?;
    grid.check_index(j)?;
    let last = if along_x { i } else { j };
    if last == grid.half() {
        return Err(Error::IndexOutOfRange { index: last + 1, half: grid.half() });
    }
    Ok(())
}

/// Unit link factors on every edge for a given field strength.
///
/// `ux[r * N + c]` belongs to the edge from node column `c` to `c + 1` in row
/// `r`; `uy[r * (N + 1) + c]` to the edge from row `r` to `r + 1` in column `c`.
/// Traversing an edge backwards uses the conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkField {
    grid: Grid,
    mu: f64,
    ux: Vec<Complex64>,
    uy: Vec<Complex64>,
    dux: Vec<Complex64>,
    duy: Vec<Complex64>,
}

impl LinkField {
    pub fn new(grid: Grid, mu: f64) -> Self {
        let side = grid.side();
        let n = grid.n();
        let h = grid.h();
        let half = grid.half();
        // U = exp(-i * integral) = exp(i mu rate)
        let mut rate_x = Vec::with_capacity(side * n);
        for r in 0..side {
            let y = grid.x(r as i64 - half);
            rate_x.extend(std::iter::repeat_n(0.5 * y * h, n));
        }
        let mut rate_y = Vec::with_capacity(n * side);
        for _ in 0..n {
            rate_y.extend((0..side).map(|c| -0.5 * grid.x(c as i64 - half) * h));
        }
        let phase = |c: &f64| Complex64::from_polar(1.0, mu * c);
        let ux: Vec<Complex64> = rate_x.iter().map(phase).collect();
        let uy: Vec<Complex64> = rate_y.iter().map(phase).collect();
        let derivative =
            |u: &[Complex64], rate: &[f64]| u.iter().zip(rate).map(|(u, c)| Complex64::new(0.0, *c) * u).collect();
        let dux = derivative(&ux, &rate_x);
        let duy = derivative(&uy, &rate_y);
        Self { grid, mu, ux, uy, dux, duy }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn ux(&self) -> &[Complex64] {
        &self.ux
    }

    pub fn uy(&self) -> &[Complex64] {
        &self.uy
    }

    /// `d U / d mu` on x-edges, same layout as [`LinkField::ux`].
    pub fn dux(&self) -> &[Complex64] {
        &self.dux
    }

    pub fn duy(&self) -> &[Complex64] {
        &self.duy
    }

    /// Link from node `(i, j)` to `(i + 1, j)`.
    pub fn link_x(&self, i: i64, j: i64) -> Complex64 {
        let half = self.grid.half();
        self.ux[(j + half) as usize * self.grid.n() + (i + half) as usize]
    }

    /// Link from node `(i, j)` to `(i, j + 1)`.
    pub fn link_y(&self, i: i64, j: i64) -> Complex64 {
        let half = self.grid.half();
        self.uy[(j + half) as usize * self.grid.side() + (i + half) as usize]
    }

    /// Product of links counterclockwise around the cell with lower-left
    /// corner `(i, j)`.
    pub fn plaquette(&self, i: i64, j: i64) -> Complex64 {
        self.link_x(i, j) * self.link_y(i + 1, j) * self.link_x(i, j + 1).conj() * self.link_y(i, j).conj()
    }

    /// Links after the gauge change `psi -> psi exp(i chi)`: the edge from `p`
    /// to `q` picks up `exp(i (chi_p - chi_q))`.
    pub fn gauge_transformed(&self, chi: &[f64]) -> Result<Self> {
        let g = self.grid;
        if chi.len() != g.len() {
            return Err(Error::DimensionMismatch { expected: g.len(), got: chi.len() });
        }
        let side = g.side();
        let n = g.n();
        let mut out = self.clone();
        // derivatives are not meaningful for a generic gauge; drop them
        out.dux.iter_mut().chain(out.duy.iter_mut()).for_each(|z| *z = Complex64::new(0.0, 0.0));
        for r in 0..side {
            for c in 0..n {
                let p = r * side + c;
                out.ux[r * n + c] *= Complex64::from_polar(1.0, chi[p] - chi[p + 1]);
            }
        }
        for r in 0..n {
            for c in 0..side {
                let p = r * side + c;
                out.uy[r * side + c] *= Complex64::from_polar(1.0, chi[p] - chi[p + side]);
            }
        }
        Ok(out)
    }

    pub(crate) fn check_grid(&self, psi: &OrderField) -> Result<()> {
        if psi.grid().n() == self.grid.n() && psi.grid().d() == self.grid.d() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Free-function form of [`LinkField::new`].
pub fn link_field(grid: &Grid, mu: f64) -> LinkField {
    LinkField::new(*grid, mu)
}
