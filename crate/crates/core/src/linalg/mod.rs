//! Linear algebra on realified states.
//!
//! Vectors are plain `f64` slices; the geometry comes from a diagonal
//! [`Metric`] so that the Ginzburg-Landau Jacobian, which is self-adjoint
//! only under the trapezoid-weighted product, can be handed to symmetric
//! Krylov methods unchanged.

pub mod banded;
pub mod dense;
pub mod krylov;

pub use banded::{SymBand, SymBandCholesky};
pub use dense::{bordered_nullity, condition_estimate, dense_materialize, BorderedNullity};
pub use krylov::{solve_general, solve_general_precond, solve_symmetric, SolveReport};

/// A real-linear map on `R^dim`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Whether the map is self-adjoint under the metric it is used with.
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// Approximate inverse applied on the right in GMRES.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// Closure-backed operator.
pub struct FnOperator<F> {
    dim: usize,
    symmetric: bool,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, symmetric: bool, f: F) -> Self {
        Self { dim, symmetric, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Diagonal inner product `<x, y> = sum_k m_k x_k y_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    weights: Vec<f64>,
}

impl Metric {
    pub fn new(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|w| *w > 0.0));
        Self { weights }
    }

    pub fn identity(dim: usize) -> Self {
        Self { weights: vec![1.0; dim] }
    }

    /// Realified grid weights followed by `extra` unit-weight scalars.
    pub fn for_grid(grid: &crate::grid::Grid, extra: usize) -> Self {
        let mut weights = grid.real_weights();
        weights.extend(std::iter::repeat_n(1.0, extra));
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).zip(&self.weights).map(|((a, b), w)| a * b * w).sum()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.dot(x, x).max(0.0).sqrt()
    }
}

pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn scale(a: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= a;
    }
}
