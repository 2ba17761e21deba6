//! Square grid geometry, trapezoid weights and the weighted discrete inner
//! products.
//!
//! Nodes are `h * (i, j)` with `i, j` in `-N/2..=N/2`. Node storage is row
//! major: rows run along `y`, entries within a row along `x`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    d: f64,
    n: usize,
    h: f64,
}

impl Grid {
    /// Square of edge `d` split into `n` intervals per edge; `n` must be even.
    pub fn new(d: f64, n: usize) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidGrid(format!("edge length must be positive, got {d}")));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("N must be positive".into()));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid("N must be even".into()));
        }
        Ok(Self { d, n, h: d / n as f64 })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Intervals per edge.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Nodes per edge, `N + 1`.
    pub fn side(&self) -> usize {
        self.n + 1
    }

    /// Total node count `(N + 1)^2`.
    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension of the realified state space.
    pub fn real_dim(&self) -> usize {
        2 * self.len()
    }

    /// Storage offset of node `(i, j)`; no range check.
    #[inline]
    pub fn index(&self, i: i64, j: i64) -> usize {
        let half = self.half();
        ((j + half) as usize) * self.side() + (i + half) as usize
    }

    /// Inverse of [`Grid::index`].
    #[inline]
    pub fn coords(&self, p: usize) -> (i64, i64) {
        let half = self.half();
        let side = self.side();
        ((p % side) as i64 - half, (p / side) as i64 - half)
    }

    pub fn check_index(&self, i: i64) -> Result<()> {
        let half = self.half();
        if i < -half || i > half {
            return Err(Error::IndexOutOfRange { index: i, half });
        }
        Ok(())
    }

    #[inline]
    pub fn x(&self, i: i64) -> f64 {
        i as f64 * self.h
    }

    /// Trapezoid weight of index `i`: one half on the boundary, one inside.
    pub fn trapezoid_weight(&self, i: i64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.weight_unchecked(i))
    }

    #[inline]
    pub(crate) fn weight_unchecked(&self, i: i64) -> f64 {
        if i.abs() == self.half() {
            0.5
        } else {
            1.0
        }
    }

    /// Quadrature weight `w_i w_j h^2` of every node, in storage order.
    pub fn node_weights(&self) -> Vec<f64> {
        let h2 = self.h * self.h;
        (0..self.len())
            .map(|p| {
                let (i, j) = self.coords(p);
                self.weight_unchecked(i) * self.weight_unchecked(j) * h2
            })
            .collect()
    }

    /// Node weights repeated for the real and imaginary component.
    pub fn real_weights(&self) -> Vec<f64> {
        self.node_weights().into_iter().flat_map(|w| [w, w]).collect()
    }

    fn same(&self, other: &Grid) -> bool {
        self.n == other.n && self.d == other.d
    }
}

/// Free-function form of [`Grid::new`].
pub fn make_grid(d: f64, n: usize) -> Result<Grid> {
    Grid::new(d, n)
}

/// Trapezoid weight of index `i` on a grid with `n` intervals.
pub fn trapezoid_weight(i: i64, n: usize) -> Result<f64> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid("N must be even and positive".into()));
    }
    let half = (n / 2) as i64;
    if i < -half || i > half {
        return Err(Error::IndexOutOfRange { index: i, half });
    }
    Ok(if i.abs() == half { 0.5 } else { 1.0 })
}

/// Complex order parameter sampled on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl OrderField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|p| {
                let (i, j) = grid.coords(p);
                f(grid.x(i), grid.x(j))
            })
            .collect();
        Self { grid, values }
    }

    /// Builds a field from its realified representation `[re0, im0, re1, ...]`.
    pub fn from_real(grid: Grid, x: &[f64]) -> Result<Self> {
        if x.len() < grid.real_dim() {
            return Err(Error::DimensionMismatch { expected: grid.real_dim(), got: x.len() });
        }
        let values = bytemuck::cast_slice::<f64, Complex64>(&x[..grid.real_dim()]).to_vec();
        Ok(Self { grid, values })
    }

    /// Independent standard normal real and imaginary parts at every node.
    pub fn random(grid: Grid, rng: &mut impl Rng) -> Self {
        let values = (0..grid.len())
            .map(|_| {
                let re: f64 = rng.sample(rand::distr::StandardUniform);
                let im: f64 = rng.sample(rand::distr::StandardUniform);
                Complex64::new(2.0 * re - 1.0, 2.0 * im - 1.0)
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Realified view `[re0, im0, re1, im1, ...]`.
    pub fn as_real(&self) -> &[f64] {
        bytemuck::cast_slice(&self.values)
    }

    pub fn as_real_mut(&mut self) -> &mut [f64] {
        bytemuck::cast_slice_mut(&mut self.values)
    }

    #[inline]
    pub fn at(&self, i: i64, j: i64) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_same_grid(&self, other: &OrderField) -> Result<()> {
        if self.grid.same(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: Complex64, other: &OrderField) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| x + a * y).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn sub(&self, other: &OrderField) -> Result<Self> {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    /// Weighted discrete L2 norm.
    pub fn norm(&self) -> f64 {
        inner_real_unchecked(Exec::Auto, self, self).max(0.0).sqrt()
    }

    /// Root mean square amplitude, `norm / d`.
    pub fn rms(&self) -> f64 {
        self.norm() / self.grid.d
    }

    /// Largest modulus at any node.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `sum w_i w_j h^2 conj(a) b`.
pub fn inner_complex(a: &OrderField, b: &OrderField) -> Result<Complex64> {
    a.check_same_grid(b)?;
    Ok(inner_complex_unchecked(Exec::Auto, a, b))
}

/// Real part of [`inner_complex`]; the inner product for all symmetric
/// Krylov work.
pub fn inner_real(a: &OrderField, b: &OrderField) -> Result<f64> {
    a.check_same_grid(b)?;
    Ok(inner_real_unchecked(Exec::Auto, a, b))
}

pub(crate) fn inner_complex_unchecked(exec: Exec, a: &OrderField, b: &OrderField) -> Complex64 {
    let g = a.grid;
    let side = g.side();
    let h2 = g.h * g.h;
    let row = |j: usize, part: fn(Complex64) -> f64| -> f64 {
        let wj = g.weight_unchecked(j as i64 - g.half());
        let av = &a.values[j * side..(j + 1) * side];
        let bv = &b.values[j * side..(j + 1) * side];
        let inner: f64 = av[1..side - 1]
            .iter()
            .zip(&bv[1..side - 1])
            .map(|(x, y)| part(x.conj() * y))
            .sum();
        let ends = 0.5 * (part(av[0].conj() * bv[0]) + part(av[side - 1].conj() * bv[side - 1]));
        wj * h2 * (inner + ends)
    };
    let re = exec::sum_rows(exec, side, g.len(), |j| row(j, |z| z.re));
    let im = exec::sum_rows(exec, side, g.len(), |j| row(j, |z| z.im));
    Complex64::new(re, im)
}

pub(crate) fn inner_real_unchecked(exec: Exec, a: &OrderField, b: &OrderField) -> f64 {
    let g = a.grid;
    let side = g.side();
    let h2 = g.h * g.h;
    exec::sum_rows(exec, side, g.len(), |j| {
        let wj = g.weight_unchecked(j as i64 - g.half());
        let av = &a.values[j * side..(j + 1) * side];
        let bv = &b.values[j * side..(j + 1) * side];
        let dot = |x: &Complex64, y: &Complex64| x.re * y.re + x.im * y.im;
        let inner: f64 = av[1..side - 1].iter().zip(&bv[1..side - 1]).map(|(x, y)| dot(x, y)).sum();
        let ends = 0.5 * (dot(&av[0], &bv[0]) + dot(&av[side - 1], &bv[side - 1]));
        wj * h2 * (inner + ends)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn grid_spacing_and_size() {
        let g = Grid::new(3.0, 2).unwrap();
        assert_eq!(g.h(), 1.5);
        assert_eq!(g.len(), 9);
        let g = Grid::new(5.5, 110).unwrap();
        assert_relative_eq!(g.h(), 0.05, max_relative = 1e-15);
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert_eq!(Grid::new(3.0, 3).unwrap_err(), Error::InvalidGrid("N must be even".into()));
        assert!(Grid::new(3.0, 0).is_err());
        assert!(Grid::new(0.0, 4).is_err());
        assert!(Grid::new(-1.0, 4).is_err());
        assert!(Grid::new(f64::NAN, 4).is_err());
    }

    #[test]
    fn index_roundtrip_and_symmetric_node_set() {
        let g = Grid::new(2.0, 6).unwrap();
        for p in 0..g.len() {
            let (i, j) = g.coords(p);
            assert_eq!(g.index(i, j), p);
            // rotation and mirror images stay on the grid
            g.check_index(-j).unwrap();
            g.check_index(-i).unwrap();
        }
        assert_relative_eq!(g.h() * g.n() as f64, g.d(), max_relative = 1e-15);
    }

    #[test]
    fn weights() {
        assert_eq!(trapezoid_weight(0, 10).unwrap(), 1.0);
        assert_eq!(trapezoid_weight(5, 10).unwrap(), 0.5);
        assert_eq!(trapezoid_weight(-5, 10).unwrap(), 0.5);
        assert!(trapezoid_weight(6, 10).is_err());
        let g = Grid::new(3.0, 10).unwrap();
        let total: f64 = (-5..=5).map(|i| g.trapezoid_weight(i).unwrap() * g.h()).sum();
        assert_relative_eq!(total, 3.0, max_relative = 1e-15);
    }

    #[test]
    fn inner_products_on_constants() {
        let g = Grid::new(3.0, 8).unwrap();
        let one = OrderField::constant(g, Complex64::new(1.0, 0.0));
        let i = OrderField::constant(g, I);
        let z = inner_complex(&one, &one).unwrap();
        assert_relative_eq!(z.re, 9.0, max_relative = 1e-14);
        assert_eq!(z.im, 0.0);
        let z = inner_complex(&one, &i).unwrap();
        assert!(z.re.abs() < 1e-14);
        assert_relative_eq!(z.im, 9.0, max_relative = 1e-14);
        assert!(inner_real(&one, &i).unwrap().abs() < 1e-14);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = OrderField::zeros(Grid::new(3.0, 8).unwrap());
        let b = OrderField::zeros(Grid::new(3.0, 10).unwrap());
        assert_eq!(inner_complex(&a, &b).unwrap_err(), Error::GridMismatch);
        assert_eq!(inner_real(&a, &b).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn inner_real_is_symmetric_and_positive() {
        let g = Grid::new(3.0, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = OrderField::random(g, &mut rng);
        let b = OrderField::random(g, &mut rng);
        let ab = inner_real(&a, &b).unwrap();
        let ba = inner_real(&b, &a).unwrap();
        assert_relative_eq!(ab, ba, max_relative = 1e-14);
        assert!(inner_real(&a, &a).unwrap() > 0.0);
        assert!(inner_complex(&a, &a).unwrap().re >= 0.0);
        let lhs = inner_real(&a, &a.add_scaled(Complex64::new(2.5, 0.0), &b).unwrap()).unwrap();
        assert_relative_eq!(lhs, inner_real(&a, &a).unwrap() + 2.5 * ab, max_relative = 1e-13);
    }

    #[test]
    fn realified_view_matches_weights() {
        let g = Grid::new(3.0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = OrderField::random(g, &mut rng);
        let w = g.real_weights();
        let x = a.as_real();
        let direct: f64 = x.iter().zip(&w).map(|(v, w)| v * v * w).sum();
        assert_relative_eq!(direct, a.norm().powi(2), max_relative = 1e-14);
        let back = OrderField::from_real(g, x).unwrap();
        assert_eq!(back, a);
    }
}
