//! Initial fields for Newton.

use num_complex::Complex64;

use crate::grid::{Grid, OrderField};

/// `psi = c` everywhere.
pub fn constant(grid: Grid, c: Complex64) -> OrderField {
    OrderField::constant(grid, c)
}

/// Product of vortex profiles `tanh(r_k) e^{i n_k theta_k}` centered at
/// `(x_k, y_k)` with windings `n_k`, scaled by `amplitude`.
pub fn vortices(grid: Grid, centers: &[(f64, f64, i32)], amplitude: f64) -> OrderField {
    OrderField::from_fn(grid, |x, y| {
        let mut z = Complex64::new(amplitude, 0.0);
        for &(cx, cy, n) in centers {
            let (dx, dy) = (x - cx, y - cy);
            let r = dx.hypot(dy);
            let core = r.tanh().powi(n.abs());
            z *= Complex64::from_polar(core, f64::from(n) * dy.atan2(dx));
        }
        z
    })
}

/// A single vortex of winding `n` at the center.
pub fn giant_vortex(grid: Grid, n: i32, amplitude: f64) -> OrderField {
    vortices(grid, &[(0.0, 0.0, n)], amplitude)
}
