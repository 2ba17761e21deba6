//! Property suite behind `glv verify`: structural identities of the discrete
//! operator that must hold to roundoff on random data.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gauge::LinkField;
use crate::glop::{apply_jacobian, residual, ExtendedState};
use crate::grid::{inner_real, Grid, OrderField};
use crate::linalg::dense::bordered_nullity;
use crate::newton::{newton_solve, NewtonSettings, ReferencePolicy};
use crate::symmetry::{equivariance_residual, GroupElement, D4};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

/// `max |<a, J b> - <J a, b>| / (||a|| ||J b||)` over random pairs.
pub fn self_adjointness(grid: Grid, mu: f64, trials: usize, rng: &mut impl Rng) -> Result<f64> {
    let links = LinkField::new(grid, mu);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let psi = OrderField::random(grid, rng);
        let a = OrderField::random(grid, rng);
        let b = OrderField::random(grid, rng);
        let jb = apply_jacobian(&psi, &b, &links)?;
        let ja = apply_jacobian(&psi, &a, &links)?;
        let defect = (inner_real(&a, &jb)? - inner_real(&ja, &b)?).abs();
        worst = worst.max(defect / (a.norm() * jb.norm()).max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Largest node-wise relative mismatch between `F(psi e^{i chi}; U^chi)` and
/// `e^{i chi} F(psi; U)`.
pub fn gauge_covariance(grid: Grid, mu: f64, rng: &mut impl Rng) -> Result<f64> {
    let links = LinkField::new(grid, mu);
    let psi = OrderField::random(grid, rng);
    let chi: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    let moved = OrderField::from_values(
        grid,
        psi.values().iter().zip(&chi).map(|(z, c)| z * Complex64::from_polar(1.0, *c)).collect(),
    )?;
    let r0 = residual(&psi, &links)?;
    let r1 = residual(&moved, &links.gauge_transformed(&chi)?)?;
    let scale = r0.max_abs().max(1.0);
    Ok(r0
        .values()
        .iter()
        .zip(r1.values())
        .zip(&chi)
        .map(|((a, b), c)| (a * Complex64::from_polar(1.0, *c) - b).norm() / scale)
        .fold(0.0, f64::max))
}

/// Worst equivariance residual over `rho`, `sigma` and a phase rotation.
pub fn equivariance(grid: Grid, mu: f64, rng: &mut impl Rng) -> Result<f64> {
    let links = LinkField::new(grid, mu);
    let psi = OrderField::random(grid, rng);
    let eta = rng.random_range(0.0..std::f64::consts::TAU);
    let mut worst = 0.0f64;
    for g in [GroupElement::from(D4::RHO), GroupElement::from(D4::SIGMA), GroupElement::phase(eta)] {
        worst = worst.max(equivariance_residual(g, &psi, &links)?);
    }
    Ok(worst)
}

/// `||J(i psi)|| / ||i psi||` at the solution reached from `psi = 1`.
pub fn phase_nullspace(grid: Grid, mu: f64) -> Result<f64> {
    let guess = ExtendedState::new(OrderField::constant(grid, Complex64::new(1.0, 0.0)), mu);
    let sol = newton_solve(guess, &ReferencePolicy::Auto, &NewtonSettings::default())?;
    let links = sol.state.links();
    let ipsi = sol.state.psi.scale(Complex64::new(0.0, 1.0));
    Ok(apply_jacobian(&sol.state.psi, &ipsi, &links)?.norm() / ipsi.norm())
}

fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    a.qr().q()
}

/// `U diag(s) V^T` with exactly `k` zero singular values, the first `k`.
fn factors_with_nullity(n: usize, k: usize, rng: &mut impl Rng) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let u = random_orthogonal(n, rng);
    let v = random_orthogonal(n, rng);
    let s = DMatrix::from_fn(n, n, |i, j| if i == j && i >= k { rng.random_range(0.5..2.0) } else { 0.0 });
    (&u * s * v.transpose(), u, v)
}

pub fn random_with_nullity(n: usize, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    factors_with_nullity(n, k, rng).0
}

/// Bordered instance whose `b` is, at random, inside or outside the range
/// of `L` and whose `f` vanishes or not on its kernel.
fn random_instance(n: usize, k: usize, rng: &mut impl Rng) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let (l, u, v) = factors_with_nullity(n, k, rng);
    let b_out = rng.random_bool(0.5);
    let f_hits = rng.random_bool(0.5);
    let mut b = DVector::zeros(n);
    let mut f = DVector::zeros(n);
    for i in 0..n {
        let kernel = i < k;
        // kernel coefficients bounded away from zero so membership is unambiguous
        let coef = |on: bool, rng: &mut dyn rand::RngCore| {
            if !on {
                0.0
            } else if kernel {
                rng.random_range(0.2..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }
            } else {
                rng.random_range(-1.0..1.0)
            }
        };
        b += u.column(i) * coef(!kernel || b_out, rng);
        f += v.column(i) * coef(!kernel || f_hits, rng);
    }
    if rng.random_bool(0.05) {
        b.fill(0.0);
    }
    if rng.random_bool(0.05) {
        f.fill(0.0);
    }
    (l, b, f)
}

/// Random dense instances of the bordering lemma; returns the number of
/// instances whose nullity change disagrees with the lemma.
pub fn bordering_counterexamples(instances: usize, rng: &mut impl Rng) -> usize {
    let mut bad = 0;
    for t in 0..instances {
        let n = rng.random_range(4..9);
        let k = 1 + t % 3;
        let (l, b, f) = random_instance(n, k, rng);
        let d = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(-1.0..1.0) };
        if !bordered_nullity(&l, &b, &f, d).consistent() {
            bad += 1;
        }
    }
    bad
}

/// Runs every check with fixed sizes and tolerances.
pub fn run_all(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in [8usize, 16] {
        let g = Grid::new(3.0, n)?;
        for mu in [0.0, 1.0] {
            out.push(CheckResult::new(
                format!("self-adjointness N={n} mu={mu}"),
                self_adjointness(g, mu, 4, &mut rng)?,
                1e-12,
            ));
            out.push(CheckResult::new(format!("equivariance N={n} mu={mu}"), equivariance(g, mu, &mut rng)?, 1e-12));
            out.push(CheckResult::new(format!("gauge covariance N={n} mu={mu}"), gauge_covariance(g, mu, &mut rng)?, 1e-12));
        }
    }
    let g = Grid::new(3.0, 12)?;
    out.push(CheckResult::new("phase-mode nullspace N=12 mu=0.5", phase_nullspace(g, 0.5)?, 1e-8));
    out.push(CheckResult::new(
        "bordering lemma (1000 instances)",
        bordering_counterexamples(1000, &mut rng) as f64,
        0.0,
    ));
    Ok(out)
}
