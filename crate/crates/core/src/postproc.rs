//! Energies, winding numbers and vortex census.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::LinkField;
use crate::glop::kinetic_apply;
use crate::grid::{inner_real, OrderField};

/// Amplitude below which a node is treated as a zero of `psi`.
pub const AMPLITUDE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexRecord {
    pub x: f64,
    pub y: f64,
    /// Positive for vortices, negative for antivortices.
    pub winding: i64,
}

impl VortexRecord {
    pub fn multiplicity(&self) -> u64 {
        self.winding.unsigned_abs()
    }
}

/// `-(1/d^2) sum w |psi|^4`; equal to `-1` for `psi = 1`.
pub fn free_energy(psi: &OrderField) -> f64 {
    let g = psi.grid();
    let w = g.node_weights();
    let s: f64 = psi.values().iter().zip(&w).map(|(z, w)| w * z.norm_sqr() * z.norm_sqr()).sum();
    -s / (g.d() * g.d())
}

/// `sum w (-|psi|^2 + |psi|^4 / 2) + <psi, K psi>`, valid for any field.
pub fn full_energy(psi: &OrderField, links: &LinkField) -> Result<f64> {
    let w = psi.grid().node_weights();
    let pot: f64 = psi
        .values()
        .iter()
        .zip(&w)
        .map(|(z, w)| {
            let a = z.norm_sqr();
            w * (-a + 0.5 * a * a)
        })
        .sum();
    let kin = inner_real(psi, &kinetic_apply(psi, links)?)?;
    Ok(pot + kin)
}

/// Winding of `psi` along the closed node loop `path` (the last node
/// connects back to the first).
pub fn winding_number(psi: &OrderField, path: &[(i64, i64)]) -> Result<i64> {
    let g = psi.grid();
    if path.len() < 3 {
        return Err(Error::InvalidArgument("a loop needs at least three nodes".into()));
    }
    let mut vals = Vec::with_capacity(path.len());
    for &(i, j) in path {
        g.check_index(i)?;
        g.check_index(j)?;
        let z = psi.at(i, j);
        if !(z.norm() > AMPLITUDE_FLOOR) {
            return Err(Error::InvalidArgument(format!("loop passes through a zero of psi at ({i}, {j})")));
        }
        vals.push(z);
    }
    Ok(phase_turns(&vals))
}

fn phase_turns(vals: &[Complex64]) -> i64 {
    let n = vals.len();
    let total: f64 = (0..n).map(|k| (vals[(k + 1) % n] * vals[k].conj()).arg()).sum();
    (total / TAU).round() as i64
}

/// Counterclockwise boundary of the square of half-width `r` around
/// `(ci, cj)`, starting at its lower left corner.
pub fn square_loop(ci: i64, cj: i64, r: i64) -> Vec<(i64, i64)> {
    if r == 0 {
        return vec![(ci, cj)];
    }
    rect_loop(ci - r, cj - r, ci + r, cj + r)
}

/// Counterclockwise boundary of the node rectangle `[i0, i1] x [j0, j1]`.
pub fn rect_loop(i0: i64, j0: i64, i1: i64, j1: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for i in i0..i1 {
        out.push((i, j0));
    }
    for j in j0..j1 {
        out.push((i1, j));
    }
    for i in (i0 + 1..=i1).rev() {
        out.push((i, j1));
    }
    for j in (j0 + 1..=j1).rev() {
        out.push((i0, j));
    }
    out
}

/// Winding along the outermost ring of nodes whose amplitude clears the
/// floor everywhere.
pub fn total_vorticity(psi: &OrderField) -> Result<i64> {
    let half = psi.grid().half();
    for r in (1..=half).rev() {
        if let Ok(w) = winding_number(psi, &square_loop(0, 0, r)) {
            return Ok(w);
        }
    }
    Err(Error::InvalidArgument("no admissible loop around the center".into()))
}

/// Vortices from plaquette windings, with clusters of near-zero nodes
/// resolved by the winding around their bounding box.
pub fn vortex_census(psi: &OrderField) -> Vec<VortexRecord> {
    let g = *psi.grid();
    let half = g.half();
    let side = g.side();
    let h = g.h();
    let low: Vec<bool> = psi.values().iter().map(|z| !(z.norm() > AMPLITUDE_FLOOR)).collect();
    let is_low = |i: i64, j: i64| low[g.index(i, j)];

    // windings of cells whose four corners are admissible, indexed by the
    // lower left corner
    let cells = side - 1;
    let mut cell_w = vec![0i64; cells * cells];
    for j in -half..half {
        for i in -half..half {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if corners.iter().any(|&(a, b)| is_low(a, b)) {
                continue;
            }
            let vals: Vec<Complex64> = corners.iter().map(|&(a, b)| psi.at(a, b)).collect();
            cell_w[(j + half) as usize * cells + (i + half) as usize] = phase_turns(&vals);
        }
    }
    let cell_at = |i: i64, j: i64| cell_w[(j + half) as usize * cells + (i + half) as usize];

    let mut out = Vec::new();
    let mut seen = vec![false; g.len()];
    for p in 0..g.len() {
        if !low[p] || seen[p] {
            continue;
        }
        // flood the 8-connected cluster of low nodes
        let mut members = Vec::new();
        let mut queue = VecDeque::from([p]);
        seen[p] = true;
        while let Some(q) = queue.pop_front() {
            let (i, j) = g.coords(q);
            members.push((i, j));
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (a, b) = (i + di, j + dj);
                    if a.abs() > half || b.abs() > half {
                        continue;
                    }
                    let r = g.index(a, b);
                    if low[r] && !seen[r] {
                        seen[r] = true;
                        queue.push_back(r);
                    }
                }
            }
        }
        let i0 = members.iter().map(|m| m.0).min().unwrap_or(0) - 1;
        let i1 = members.iter().map(|m| m.0).max().unwrap_or(0) + 1;
        let j0 = members.iter().map(|m| m.1).min().unwrap_or(0) - 1;
        let j1 = members.iter().map(|m| m.1).max().unwrap_or(0) + 1;
        if i0 < -half || j0 < -half || i1 > half || j1 > half {
            // touches the boundary; no enclosing loop exists
            continue;
        }
        let Ok(ring) = winding_number(psi, &rect_loop(i0, j0, i1, j1)) else {
            continue;
        };
        let inside: i64 = (j0..j1).flat_map(|j| (i0..i1).map(move |i| (i, j))).map(|(i, j)| cell_at(i, j)).sum();
        let w = ring - inside;
        if w != 0 {
            let n = members.len() as f64;
            let x = members.iter().map(|m| g.x(m.0)).sum::<f64>() / n;
            let y = members.iter().map(|m| g.x(m.1)).sum::<f64>() / n;
            out.push(VortexRecord { x, y, winding: w });
        }
    }
    for j in -half..half {
        for i in -half..half {
            let w = cell_at(i, j);
            if w != 0 {
                out.push(VortexRecord { x: g.x(i) + 0.5 * h, y: g.x(j) + 0.5 * h, winding: w });
            }
        }
    }
    out
}
