//! Dense assembly of a discretized operator, built without the FFT.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;

use super::operator::DiscretizedOperator;
use super::GridOperator;
use crate::error::{Error, Result};

/// Largest matrix order assembled densely.
pub const MAX_DENSE: usize = 8192;

#[derive(Debug, Clone)]
pub enum DenseOperator {
    Real(Mat<f64>),
    Complex(Mat<Complex64>),
}

impl DenseOperator {
    pub fn order(&self) -> usize {
        match self {
            DenseOperator::Real(m) => m.nrows(),
            DenseOperator::Complex(m) => m.nrows(),
        }
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let fail = |e| Error::OracleFailure(format!("dense eigensolver failed: {e:?}"));
        let mut v = match self {
            DenseOperator::Real(m) => m.self_adjoint_eigenvalues(Side::Lower).map_err(fail)?,
            DenseOperator::Complex(m) => m.self_adjoint_eigenvalues(Side::Lower).map_err(fail)?,
        };
        v.sort_by(f64::total_cmp);
        Ok(v)
    }
}

/// Convolution kernel `c(Δ) = N⁻¹ Σ_m h_m e^{2πi m·Δ/n}` by direct summation.
fn kernel(op: &DiscretizedOperator) -> Vec<Complex64> {
    let g = op.grid();
    let n = g.points;
    let total = g.len();
    let roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    let modes: Vec<Vec<usize>> = (0..total).map(|m| g.multi_index(m)).collect();
    let mult = op.multiplier();
    (0..total)
        .map(|delta| {
            let di = g.multi_index(delta);
            let mut s = Complex64::default();
            for (m, mi) in modes.iter().enumerate() {
                let mut ph = Complex64::new(1.0, 0.0);
                for (a, b) in mi.iter().zip(&di) {
                    ph *= roots[(a * b) % n];
                }
                s += ph * mult[m];
            }
            s / total as f64
        })
        .collect()
}

/// `A_ij = c(x_i − x_j) + V_i δ_ij`, real when the kernel is.
pub fn dense_matrix(op: &DiscretizedOperator) -> Result<DenseOperator> {
    let g = op.grid();
    let total = g.len();
    if total > MAX_DENSE {
        return Err(Error::OracleFailure(format!(
            "dense assembly of order {total} exceeds the limit of {MAX_DENSE}"
        )));
    }
    let c = kernel(op);
    let n = g.points;
    let idx: Vec<Vec<usize>> = (0..total).map(|i| g.multi_index(i)).collect();
    let diff = |i: usize, j: usize| {
        idx[i]
            .iter()
            .zip(&idx[j])
            .fold(0, |f, (a, b)| f * n + (a + n - b) % n)
    };
    let cmax = c.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let real = c.iter().all(|z| z.im.abs() <= 1e-13 * cmax.max(1.0));
    let v = op.potential();
    Ok(if real {
        DenseOperator::Real(Mat::from_fn(total, total, |i, j| {
            c[diff(i, j)].re + if i == j { v[i] } else { 0.0 }
        }))
    } else {
        DenseOperator::Complex(Mat::from_fn(total, total, |i, j| {
            c[diff(i, j)] + if i == j { Complex64::new(v[i], 0.0) } else { Complex64::default() }
        }))
    })
}

/// Sorted spectrum of the discretized operator by dense diagonalization.
pub fn dense_eigenvalues(op: &DiscretizedOperator) -> Result<Vec<f64>> {
    let vals = dense_matrix(op)?.eigenvalues()?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::OracleFailure("dense eigensolver returned non-finite values".into()));
    }
    Ok(vals)
}
