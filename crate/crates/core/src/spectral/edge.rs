use serde::Serialize;

use super::dense::dense_eigenvalues;
use super::grid::Grid;
use super::operator::discretize;
use crate::error::{Error, Result};
use crate::localization::HamiltonianLike;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeOptions {
    pub energy_step: f64,
    pub growth_threshold: f64,
    /// Top of the energy mesh; defaults to the smallest box's largest eigenvalue.
    pub energy_max: Option<f64>,
}

impl Default for EdgeOptions {
    fn default() -> Self {
        Self {
            energy_step: 0.01,
            growth_threshold: 0.5,
            energy_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeEstimate {
    pub edge: f64,
    pub half_lengths: Vec<f64>,
    pub points: Vec<usize>,
    pub energies: Vec<f64>,
    /// `counts[b][k] = N(energies[k], half_lengths[b])`.
    pub counts: Vec<Vec<usize>>,
}

/// Counting function of a sorted spectrum.
pub fn counting_function(sorted: &[f64], e: f64) -> usize {
    sorted.partition_point(|x| *x <= e)
}

/// Locates the bottom of the essential spectrum from volume growth of the
/// eigenvalue counting function at fixed spacing.
///
/// Discrete eigenvalues below the edge do not multiply when the box grows,
/// while the continuum does. `E*` is the first mesh energy with
/// `N₂ − N₁ ≥ θ((L₂/L₁)^d − 1) N₁` and `N₂ − N₁ ≥ 1`, comparing the smallest
/// and the largest box.
pub fn brute_force_edge<H: HamiltonianLike + ?Sized>(
    h: &H,
    base: &Grid,
    box_factors: &[usize],
    opts: &EdgeOptions,
) -> Result<EdgeEstimate> {
    if box_factors.len() < 2
        || box_factors[0] == 0
        || box_factors.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidInput(format!(
            "box factors must be positive and strictly increasing, got {box_factors:?}"
        )));
    }
    if !(opts.energy_step > 0.0 && opts.growth_threshold > 0.0) {
        return Err(Error::InvalidInput("energy step and growth threshold must be positive".into()));
    }
    let grids = box_factors
        .iter()
        .map(|f| base.scaled(*f))
        .collect::<Result<Vec<_>>>()?;
    let mut spectra = Vec::with_capacity(grids.len());
    for g in &grids {
        let op = discretize(h, g)?;
        spectra.push(dense_eigenvalues(&op)?);
    }

    let lo = spectra
        .iter()
        .map(|s| s[0])
        .fold(f64::INFINITY, f64::min);
    let hi = opts
        .energy_max
        .unwrap_or_else(|| spectra.iter().map(|s| s[s.len() - 1]).fold(f64::INFINITY, f64::min));
    let step = opts.energy_step;
    let k0 = (lo / step).floor() as i64;
    let energies: Vec<f64> = (0..)
        .map(|k| step * (k0 + k) as f64)
        .take_while(|e| *e <= hi)
        .collect();
    let counts: Vec<Vec<usize>> = spectra
        .iter()
        .map(|s| energies.iter().map(|e| counting_function(s, *e)).collect())
        .collect();

    let first = grids[0].half_length;
    let last = grids[grids.len() - 1].half_length;
    let ratio = (last / first).powi(base.dim as i32);
    let (c1, c2) = (&counts[0], &counts[counts.len() - 1]);
    let edge = energies
        .iter()
        .enumerate()
        .find(|&(k, _)| {
            let grown = c2[k].saturating_sub(c1[k]) as f64;
            grown >= 1.0 && grown >= opts.growth_threshold * (ratio - 1.0) * c1[k] as f64
        })
        .map(|(_, e)| *e)
        .ok_or_else(|| {
            Error::OracleFailure("no mesh energy shows volume growth of the counting function".into())
        })?;

    Ok(EdgeEstimate {
        edge,
        half_lengths: grids.iter().map(|g| g.half_length).collect(),
        points: grids.iter().map(|g| g.points).collect(),
        energies,
        counts,
    })
}

impl EdgeEstimate {
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("energy");
        for l in &self.half_lengths {
            write!(out, ",count_L{}", super::essential::fmt_float(*l)).unwrap();
        }
        out.push('\n');
        for (k, e) in self.energies.iter().enumerate() {
            out.push_str(&super::essential::fmt_float(*e));
            for c in &self.counts {
                write!(out, ",{}", c[k]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}
