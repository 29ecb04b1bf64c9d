use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest total number of grid points accepted.
pub const MAX_POINTS: usize = 1 << 24;

/// The periodic box `[−L, L)^d` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub half_length: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(dim: usize, half_length: f64, points: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("grid dimension must be positive".into()));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid half-length must be positive, got {half_length}"
            )));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "points per axis must be a power of two and at least 8, got {points}"
            )));
        }
        match points.checked_pow(dim as u32) {
            Some(n) if n <= MAX_POINTS => {}
            _ => {
                return Err(Error::InvalidInput(format!(
                    "{points}^{dim} grid points exceed the limit of {MAX_POINTS}"
                )))
            }
        }
        Ok(Self {
            dim,
            half_length,
            points,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    /// Total number of points `n^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing of the momentum lattice, `π/L`.
    pub fn momentum_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_length
    }

    /// Row-major multi-index, last axis fastest.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        let mut r = flat;
        for a in (0..self.dim).rev() {
            idx[a] = r % self.points;
            r /= self.points;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Signed momentum integer for FFT slot `j`.
    pub fn signed_mode(&self, j: usize) -> i64 {
        let n = self.points;
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    pub fn position(&self, flat: usize) -> Vec<f64> {
        let dx = self.spacing();
        self.multi_index(flat)
            .into_iter()
            .map(|j| -self.half_length + j as f64 * dx)
            .collect()
    }

    /// The momentum `k = (π/L) m` at FFT slot `flat`.
    pub fn momentum(&self, flat: usize) -> Vec<f64> {
        let dk = self.momentum_spacing();
        self.multi_index(flat)
            .into_iter()
            .map(|j| self.signed_mode(j) as f64 * dk)
            .collect()
    }

    pub fn positions(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.position(i)).collect()
    }

    pub fn momenta(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.momentum(i)).collect()
    }

    /// Same spacing, box scaled by `factor`.
    pub fn scaled(&self, factor: usize) -> Result<Self> {
        Self::new(self.dim, self.half_length * factor as f64, self.points * factor)
    }

    /// Same box, `n` doubled.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dim, self.half_length, self.points * 2)
    }
}

/// Unitary multidimensional FFT on a [`Grid`].
#[derive(Clone)]
pub struct GridFft {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for GridFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFft").field("grid", &self.grid).finish()
    }
}

impl GridFft {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.points),
            inverse: planner.plan_fft_inverse(grid.points),
            scale: 1.0 / (grid.len() as f64).sqrt(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn transform(&self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.grid.points;
        let total = data.len();
        assert_eq!(total, self.grid.len());
        let mut line = vec![Complex64::default(); total];
        for axis in 0..self.grid.dim {
            let stride = n.pow((self.grid.dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process(data);
                continue;
            }
            // Gather every line along `axis` contiguously, transform, scatter back.
            let block = stride * n;
            let mut l = 0;
            for base in (0..total).step_by(block) {
                for off in 0..stride {
                    for j in 0..n {
                        line[l * n + j] = data[base + off + j * stride];
                    }
                    l += 1;
                }
            }
            fft.process(&mut line);
            let mut l = 0;
            for base in (0..total).step_by(block) {
                for off in 0..stride {
                    for j in 0..n {
                        data[base + off + j * stride] = line[l * n + j];
                    }
                    l += 1;
                }
            }
        }
        for z in data.iter_mut() {
            *z *= self.scale;
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(self.forward.as_ref(), data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(self.inverse.as_ref(), data);
    }

    /// `ψ ↦ F⁻¹ (m · F ψ)` into `out`.
    pub fn apply_multiplier(&self, m: &[f64], x: &[Complex64], out: &mut [Complex64]) {
        out.copy_from_slice(x);
        self.forward(out);
        for (z, mk) in out.iter_mut().zip(m) {
            *z *= *mk;
        }
        self.inverse(out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1, 16.0, 256).is_ok());
        assert!(Grid::new(1, 16.0, 4).is_err());
        assert!(Grid::new(1, 16.0, 100).is_err());
        assert!(Grid::new(1, 0.0, 256).is_err());
        assert!(Grid::new(0, 1.0, 8).is_err());
        assert!(Grid::new(4, 1.0, 1024).is_err());
    }

    #[test]
    fn lattice_layout() {
        let g = Grid::new(2, 4.0, 8).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.position(0), vec![-4.0, -4.0]);
        assert_eq!(g.position(9), vec![-3.0, -3.0]);
        assert_eq!(g.signed_mode(3), 3);
        assert_eq!(g.signed_mode(4), -4);
        let k = g.momentum(g.flat_index(&[7, 1]));
        assert!((k[0] + std::f64::consts::PI / 4.0).abs() < 1e-15);
        assert_eq!(g.multi_index(g.flat_index(&[5, 2])), vec![5, 2]);
    }

    #[test]
    fn fft_matches_direct_dft_and_is_unitary() {
        let g = Grid::new(2, 1.0, 8).unwrap();
        let f = GridFft::new(g);
        let x: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut y = x.clone();
        f.forward(&mut y);
        let n = g.points as f64;
        for m in 0..g.len() {
            let mi = g.multi_index(m);
            let mut s = Complex64::default();
            for j in 0..g.len() {
                let ji = g.multi_index(j);
                let ph: f64 = mi.iter().zip(&ji).map(|(a, b)| (a * b) as f64).sum();
                s += x[j] * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * ph / n);
            }
            s /= (g.len() as f64).sqrt();
            assert!((s - y[m]).norm() < 1e-12);
        }
        let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        assert!((nx - ny).abs() < 1e-12);
        f.inverse(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
