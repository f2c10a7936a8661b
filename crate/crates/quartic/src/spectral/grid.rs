use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_DIM: usize = 3;
pub const MIN_POINTS: usize = 16;

/// Uniform periodic box with the origin at its centre.
///
/// Axis `a` carries `points[a]` samples at `x_j = (j − N/2)·dx`, and the
/// wavenumbers `q_k = k·dq` in DFT order (`k = 0, 1, …, N/2 − 1, −N/2, …, −1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    points: [usize; MAX_DIM],
    box_length: [f64; MAX_DIM],
}

/// Same points and length on every axis.
pub fn make_grid(dim: usize, points: usize, box_length: f64) -> Result<GridSpec> {
    GridSpec::new(&vec![points; dim], &vec![box_length; dim])
}

impl GridSpec {
    pub fn new(points: &[usize], box_length: &[f64]) -> Result<Self> {
        let dim = points.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if box_length.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} box lengths for {dim} axes",
                box_length.len()
            )));
        }
        let mut p = [1usize; MAX_DIM];
        let mut l = [1.0f64; MAX_DIM];
        for a in 0..dim {
            if points[a] < MIN_POINTS || !points[a].is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: {} points is not a power of two >= {MIN_POINTS}",
                    points[a]
                )));
            }
            if !(box_length[a] > 0.0 && box_length[a].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: box length {} must be positive",
                    box_length[a]
                )));
            }
            p[a] = points[a];
            l[a] = box_length[a];
        }
        points
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::InvalidGrid("sample count overflows".into()))?;
        Ok(GridSpec { dim, points: p, box_length: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    pub fn box_length(&self) -> &[f64] {
        &self.box_length[..self.dim]
    }

    pub fn len(&self) -> usize {
        self.points().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self, axis: usize) -> f64 {
        self.box_length[axis] / self.points[axis] as f64
    }

    pub fn dq(&self, axis: usize) -> f64 {
        TAU / self.box_length[axis]
    }

    /// Largest lattice wavenumber magnitude on an axis, π/dx.
    pub fn q_max(&self, axis: usize) -> f64 {
        PI / self.dx(axis)
    }

    /// Position-space quadrature weight, ∏ dx.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.dx(a)).product()
    }

    /// Spectrum-space quadrature weight, ∏ dq/2π.
    pub fn spectral_cell(&self) -> f64 {
        (0..self.dim).map(|a| self.dq(a) / TAU).product()
    }

    pub fn x_axis(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis];
        let dx = self.dx(axis);
        (0..n).map(|j| (j as f64 - (n / 2) as f64) * dx).collect()
    }

    pub fn q_axis(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis];
        let dq = self.dq(axis);
        (0..n).map(|k| signed_index(k, n) as f64 * dq).collect()
    }

    /// Evaluates `f` at every lattice position in row-major order.
    pub fn map_positions<T>(&self, f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let axes: Vec<Vec<f64>> = (0..self.dim).map(|a| self.x_axis(a)).collect();
        self.map_lattice(&axes, f)
    }

    /// Evaluates `f` at every lattice wavevector in DFT row-major order.
    pub fn map_wavevectors<T>(&self, f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let axes: Vec<Vec<f64>> = (0..self.dim).map(|a| self.q_axis(a)).collect();
        self.map_lattice(&axes, f)
    }

    /// True where any axis index sits on the Nyquist mode.
    pub fn nyquist_mask(&self) -> Vec<bool> {
        let axes: Vec<Vec<f64>> = (0..self.dim)
            .map(|a| {
                let n = self.points[a];
                (0..n).map(|k| if k == n / 2 { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        self.map_lattice(&axes, |v| v.iter().any(|&s| s > 0.0))
    }

    fn map_lattice<T>(&self, axes: &[Vec<f64>], mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        let mut idx = [0usize; MAX_DIM];
        let mut coord = [0.0f64; MAX_DIM];
        for _ in 0..self.len() {
            for a in 0..self.dim {
                coord[a] = axes[a][idx[a]];
            }
            out.push(f(&coord[..self.dim]));
            for a in (0..self.dim).rev() {
                idx[a] += 1;
                if idx[a] < self.points[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }
}

/// DFT index `k` as a signed frequency in `[−N/2, N/2)`.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
