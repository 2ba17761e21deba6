//! Lowest eigenpairs of the Jacobian and the stability index.
//!
//! `J` is self-adjoint under the weighted real product, so everything runs in
//! that geometry. Small grids go through a dense symmetric eigensolve; larger
//! ones use block Krylov iteration on `(J + s)^{-1}` with the banded factor,
//! restarted from the best Ritz vectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bordered::{ShiftedFactor, DEFAULT_SHIFT};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::gauge::LinkField;
use crate::glop::jacobian_into;
use crate::grid::OrderField;
use crate::linalg::{dense_materialize, Metric};

/// Negative eigenvalues above `-TOL_STAB` do not count as unstable.
pub const TOL_STAB: f64 = 1e-6;
/// Eigenvalues closer than this are one cluster.
pub const CLUSTER_GAP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenSettings {
    /// Residual tolerance relative to a bound on `||J||`.
    pub tol: f64,
    pub shift: f64,
    /// Extra block vectors beyond the requested count.
    pub extra: usize,
    /// Krylov blocks generated per restart cycle.
    pub blocks: usize,
    pub max_restarts: usize,
    /// Grids with `N` at most this are solved densely.
    pub dense_max_n: usize,
    pub seed: u64,
}

impl Default for EigenSettings {
    fn default() -> Self {
        Self { tol: 1e-10, shift: DEFAULT_SHIFT, extra: 4, blocks: 4, max_restarts: 60, dense_max_n: 16, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit weighted norm.
    pub field: OrderField,
    /// `||J phi - lambda phi||` in the weighted norm (after deflation).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityInfo {
    /// Lowest eigenvalues on the complement of `i psi`, ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenfields: Vec<OrderField>,
    pub residuals: Vec<f64>,
    /// Rayleigh quotient of `J` along `i psi`.
    pub phase_eigenvalue: f64,
    pub n_unstable: usize,
    pub stable: bool,
    /// Eigenvalue nearest zero and the size of its cluster.
    pub critical_value: f64,
    pub critical_multiplicity: usize,
}

impl StabilityInfo {
    /// Indices of the eigenvalues in the critical cluster.
    pub fn critical_indices(&self) -> Vec<usize> {
        cluster_around(&self.eigenvalues, self.critical_value)
    }
}

pub(crate) fn cluster_around(values: &[f64], center: f64) -> Vec<usize> {
    let Some(start) = values.iter().position(|v| *v == center) else {
        return Vec::new();
    };
    let mut lo = start;
    while lo > 0 && values[lo] - values[lo - 1] <= CLUSTER_GAP {
        lo -= 1;
    }
    let mut hi = start;
    while hi + 1 < values.len() && values[hi + 1] - values[hi] <= CLUSTER_GAP {
        hi += 1;
    }
    (lo..=hi).collect()
}

/// The `m` algebraically smallest eigenpairs of `J(psi; mu)`.
pub fn leading_eigenpairs(psi: &OrderField, links: &LinkField, m: usize, tol: f64) -> Result<Vec<EigenPair>> {
    let settings = EigenSettings { tol, ..EigenSettings::default() };
    lowest_eigenpairs(psi, links, m, false, &settings, &[], None)
}

/// The `m` smallest eigenpairs of `J`, optionally on the complement of the
/// phase mode `i psi`. `warm` seeds the iteration; `factor` must be the
/// factor of `J(psi) + settings.shift` when given.
pub fn lowest_eigenpairs(
    psi: &OrderField,
    links: &LinkField,
    m: usize,
    deflate: bool,
    settings: &EigenSettings,
    warm: &[OrderField],
    factor: Option<&ShiftedFactor>,
) -> Result<Vec<EigenPair>> {
    links.check_grid(psi)?;
    if m == 0 {
        return Ok(Vec::new());
    }
    let grid = *psi.grid();
    let n = grid.real_dim();
    let m = m.min(n - usize::from(deflate));
    let metric = Metric::for_grid(&grid, 0);
    let phase = if deflate { Some(phase_direction(psi, &metric)?) } else { None };
    if grid.n() <= settings.dense_max_n {
        return dense_pairs(psi, links, m, phase.as_deref(), &metric);
    }
    let owned;
    let factor = match factor {
        Some(f) => f,
        None => {
            owned = ShiftedFactor::new(psi, links, settings.shift)?;
            &owned
        }
    };
    krylov_pairs(psi, links, m, phase.as_deref(), &metric, settings, warm, factor)
}

fn phase_direction(psi: &OrderField, metric: &Metric) -> Result<Vec<f64>> {
    let mut u = crate::bordered::eta_column(psi);
    let nu = metric.norm(&u);
    if !(nu > 0.0) {
        return Err(Error::TrivialState);
    }
    u.iter_mut().for_each(|v| *v /= -nu);
    Ok(u)
}

fn project_out(u: Option<&[f64]>, metric: &Metric, x: &mut [f64]) {
    if let Some(u) = u {
        let c = metric.dot(u, x);
        x.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
    }
}

fn apply_j(psi: &OrderField, links: &LinkField, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    jacobian_into(
        Exec::Auto,
        psi.values(),
        links,
        bytemuck::cast_slice(x),
        bytemuck::cast_slice_mut::<f64, Complex64>(&mut y),
    );
    y
}

fn finish_pair(
    psi: &OrderField,
    links: &LinkField,
    metric: &Metric,
    u: Option<&[f64]>,
    mut x: Vec<f64>,
) -> Result<EigenPair> {
    project_out(u, metric, &mut x);
    let nx = metric.norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut r = apply_j(psi, links, &x);
    project_out(u, metric, &mut r);
    let value = metric.dot(&x, &r);
    r.iter_mut().zip(&x).for_each(|(a, b)| *a -= value * b);
    let residual = metric.norm(&r);
    Ok(EigenPair { value, field: OrderField::from_real(*psi.grid(), &x)?, residual })
}

/// Row-sum bound on `||J||`; residuals are measured against it.
pub(crate) fn jacobian_scale(psi: &OrderField) -> f64 {
    let h = psi.grid().h();
    let a = psi.max_abs();
    8.0 / (h * h) + 1.0 + 3.0 * a * a
}

fn dense_pairs(
    psi: &OrderField,
    links: &LinkField,
    m: usize,
    u: Option<&[f64]>,
    metric: &Metric,
) -> Result<Vec<EigenPair>> {
    let n = metric.dim();
    let op = crate::newton::plain_jacobian(psi, links);
    let mut a = dense_materialize(&op, metric);
    a = (&a + a.transpose()) * 0.5;
    let sq: Vec<f64> = metric.weights().iter().map(|w| w.sqrt()).collect();
    let (b, house) = match u {
        Some(u) => {
            let uh = DVector::from_iterator(n, u.iter().zip(&sq).map(|(a, s)| a * s));
            let k = uh.iamax();
            let mut v = uh.clone();
            v[k] += uh[k].signum();
            let vn = v.norm();
            v /= vn;
            let h = DMatrix::identity(n, n) - 2.0 * &v * v.transpose();
            let full = &h * &a * &h;
            (full.remove_row(k).remove_column(k), Some((h, k)))
        }
        None => (a, None),
    };
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order
        .into_iter()
        .take(m)
        .map(|idx| {
            let c = eig.eigenvectors.column(idx);
            let y = match &house {
                Some((h, k)) => h * c.clone_owned().insert_row(*k, 0.0),
                None => c.clone_owned(),
            };
            let x: Vec<f64> = y.iter().zip(&sq).map(|(a, s)| a / s).collect();
            finish_pair(psi, links, metric, u, x)
        })
        .collect()
}

/// Orthonormalizes `v` against `basis` (two passes). Returns `None` when
/// nothing is left.
fn orthonormalize(metric: &Metric, basis: &[Vec<f64>], mut v: Vec<f64>) -> Option<Vec<f64>> {
    let n0 = metric.norm(&v);
    if !(n0 > 0.0) {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let c = metric.dot(q, &v);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
    }
    let nv = metric.norm(&v);
    if nv <= 1e-10 * n0 {
        return None;
    }
    v.iter_mut().for_each(|a| *a /= nv);
    Some(v)
}

#[allow(clippy::too_many_arguments)]
fn krylov_pairs(
    psi: &OrderField,
    links: &LinkField,
    m: usize,
    u: Option<&[f64]>,
    metric: &Metric,
    settings: &EigenSettings,
    warm: &[OrderField],
    factor: &ShiftedFactor,
) -> Result<Vec<EigenPair>> {
    let grid = *psi.grid();
    let n = grid.real_dim();
    let p = m + settings.extra.max(1);
    let scale = jacobian_scale(psi);
    let apply_t = |x: &Vec<f64>| {
        let mut y = x.clone();
        factor.solve_in_place(&mut y);
        project_out(u, metric, &mut y);
        y
    };

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut start: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut candidates: Vec<Vec<f64>> = warm.iter().filter(|f| f.grid() == &grid).map(|f| f.as_real().to_vec()).collect();
    while start.len() < p {
        let mut v = if candidates.is_empty() {
            OrderField::random(grid, &mut rng).as_real().to_vec()
        } else {
            candidates.remove(0)
        };
        project_out(u, metric, &mut v);
        if let Some(q) = orthonormalize(metric, &start, v) {
            start.push(q);
        }
    }

    let mut best: Vec<EigenPair> = Vec::new();
    for _cycle in 0..settings.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut images: Vec<Vec<f64>> = Vec::new();
        let mut block = std::mem::take(&mut start);
        for b in 0..=settings.blocks {
            let mut fresh = Vec::new();
            for v in block {
                if let Some(q) = orthonormalize(metric, &basis, v) {
                    basis.push(q.clone());
                    fresh.push(q);
                }
            }
            if fresh.is_empty() {
                break;
            }
            let out = exec::map_each(Exec::Auto, &fresh, apply_t);
            images.extend(out.iter().cloned());
            if b == settings.blocks || basis.len() + fresh.len() > n {
                break;
            }
            block = out;
        }
        let q = basis.len();
        let mut h = DMatrix::zeros(q, q);
        for i in 0..q {
            for j in i..q {
                let v = 0.5 * (metric.dot(&basis[i], &images[j]) + metric.dot(&basis[j], &images[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..q).filter(|&i| eig.eigenvalues[i] > 1e-14).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let ritz = |idx: usize| {
            let c = eig.eigenvectors.column(idx);
            let mut x = vec![0.0; n];
            for (ck, bk) in c.iter().zip(&basis) {
                x.iter_mut().zip(bk).for_each(|(a, b)| *a += ck * b);
            }
            x
        };
        let vecs: Vec<Vec<f64>> = order.iter().take(p).map(|&i| ritz(i)).collect();
        let pairs: Vec<EigenPair> = order
            .iter()
            .take(m)
            .zip(&vecs)
            .map(|(_, x)| finish_pair(psi, links, metric, u, x.clone()))
            .collect::<Result<_>>()?;
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
        let done = pairs.len() == m && pairs.iter().all(|e| e.residual <= settings.tol * scale);
        best = pairs;
        if done {
            return Ok(best);
        }
        start = vecs;
        // top up with random directions if the space collapsed
        while start.len() < p {
            let mut v = OrderField::random(grid, &mut rng).as_real().to_vec();
            project_out(u, metric, &mut v);
            if let Some(qv) = orthonormalize(metric, &start, v) {
                start.push(qv);
            }
        }
    }
    let worst = best.iter().map(|e| e.residual / scale).fold(0.0, f64::max);
    Err(Error::Eigen(format!("{} restarts, worst relative residual {worst:.3e}", settings.max_restarts)))
}

/// Stability of a solution: the lowest `m` eigenvalues on the complement of
/// the phase mode, enlarging `m` while all of them are negative.
pub fn stability(
    psi: &OrderField,
    links: &LinkField,
    m: usize,
    settings: &EigenSettings,
    warm: &[OrderField],
    factor: Option<&ShiftedFactor>,
) -> Result<StabilityInfo> {
    let metric = Metric::for_grid(psi.grid(), 0);
    let u = phase_direction(psi, &metric)?;
    let ju = apply_j(psi, links, &u);
    let phase_eigenvalue = metric.dot(&u, &ju);
    let mut m = m.max(1);
    loop {
        let pairs = lowest_eigenpairs(psi, links, m, true, settings, warm, factor)?;
        let n_unstable = pairs.iter().filter(|e| e.value < -TOL_STAB).count();
        if n_unstable == pairs.len() && m < psi.grid().real_dim() - 1 {
            m *= 2;
            continue;
        }
        let eigenvalues: Vec<f64> = pairs.iter().map(|e| e.value).collect();
        let critical_value =
            eigenvalues.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(f64::NAN);
        let critical_multiplicity = cluster_around(&eigenvalues, critical_value).len();
        return Ok(StabilityInfo {
            residuals: pairs.iter().map(|e| e.residual).collect(),
            eigenfields: pairs.into_iter().map(|e| e.field).collect(),
            eigenvalues,
            phase_eigenvalue,
            n_unstable,
            stable: n_unstable == 0,
            critical_value,
            critical_multiplicity,
        });
    }
}
