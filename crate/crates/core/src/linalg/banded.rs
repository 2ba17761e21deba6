//! Symmetric band matrices and their Cholesky factors.
//!
//! Used for the shifted Jacobian `W (J + s)`, whose bandwidth on the
//! row-major grid is `2 (N + 1) + 1`.

use crate::error::{Error, Result};

/// Lower half of a symmetric band matrix, stored column by column.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Adds `v` at `(i, j)` of the lower half (`i >= j`).
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i >= j && i - j <= self.bw, "({i}, {j}) outside the lower band");
        self.data[j * (self.bw + 1) + (i - j)] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[j * (self.bw + 1) + (i - j)]
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let stride = self.bw + 1;
        for k in 0..self.n {
            let len = self.bw.min(self.n - 1 - k);
            let col = &self.data[k * stride..k * stride + len + 1];
            y[k] += col[0] * x[k];
            for t in 1..=len {
                y[k + t] += col[t] * x[k];
                y[k] += col[t] * x[k + t];
            }
        }
    }

    /// In-place band Cholesky `A = L L^T`.
    pub fn cholesky(mut self) -> Result<SymBandCholesky> {
        let n = self.n;
        let stride = self.bw + 1;
        for k in 0..n {
            let (head, tail) = self.data.split_at_mut((k + 1) * stride);
            let col = &mut head[k * stride..];
            let d = col[0];
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Breakdown(format!("band matrix not positive definite at pivot {k}")));
            }
            let l = d.sqrt();
            col[0] = l;
            let len = self.bw.min(n - 1 - k);
            let inv = 1.0 / l;
            for v in &mut col[1..=len] {
                *v *= inv;
            }
            for j in 1..=len {
                let ljk = col[j];
                if ljk == 0.0 {
                    continue;
                }
                let target = &mut tail[(j - 1) * stride..(j - 1) * stride + (len - j + 1)];
                for (t, s) in target.iter_mut().zip(&col[j..=len]) {
                    *t -= s * ljk;
                }
            }
        }
        Ok(SymBandCholesky { n, bw: self.bw, data: self.data })
    }
}

#[derive(Debug, Clone)]
pub struct SymBandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBandCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let stride = self.bw + 1;
        let n = self.n;
        for k in 0..n {
            let col = &self.data[k * stride..];
            let len = self.bw.min(n - 1 - k);
            let v = x[k] / col[0];
            x[k] = v;
            for (t, l) in col[1..=len].iter().enumerate() {
                x[k + 1 + t] -= l * v;
            }
        }
        for k in (0..n).rev() {
            let col = &self.data[k * stride..];
            let len = self.bw.min(n - 1 - k);
            let s: f64 = col[1..=len].iter().zip(&x[k + 1..=k + len]).map(|(l, v)| l * v).sum();
            x[k] = (x[k] - s) / col[0];
        }
    }
}
