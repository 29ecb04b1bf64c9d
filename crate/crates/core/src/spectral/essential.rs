use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{Grid, GridFft};
use super::lanczos::{ground_energy, GroundState, LanczosOptions};
use super::operator::discretize_with;
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::localization::{direction_sampler, localize, strata, Hamiltonian, StratumSignature};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralRow {
    pub direction: Vec<f64>,
    pub signature: StratumSignature,
    pub signature_hash: String,
    /// Ground energy of the localized operator; the best Ritz value if unconverged.
    pub c_alpha: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub grid: Grid,
    pub tol: f64,
    pub rows: Vec<SpectralRow>,
    /// `inf_α c_α` over converged rows.
    pub infimum: Option<f64>,
    pub argmin: Option<Vec<f64>>,
    /// Set when some rows failed to converge and were left out of the infimum.
    pub incomplete: bool,
    /// Distinct localized operators actually solved.
    pub distinct_operators: usize,
}

fn canonical_order(dirs: &mut [Direction]) {
    dirs.sort_by(|a, b| {
        a.vector()
            .iter()
            .zip(b.vector().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// `inf_α c_α` over a sampled set of directions.
///
/// Directions whose localized operators coincide structurally share one solve.
/// Rows are sorted by the direction components, so the report does not depend
/// on scheduling.
pub fn essential_spectrum_bottom(
    h: &Hamiltonian,
    grid: &Grid,
    budget: usize,
    opts: &LanczosOptions,
) -> Result<SpectralReport> {
    let dirs = direction_sampler(h, budget)?;
    essential_spectrum_over(h, grid, dirs, opts)
}

/// As [`essential_spectrum_bottom`] on a caller-chosen direction set.
pub fn essential_spectrum_over(
    h: &Hamiltonian,
    grid: &Grid,
    mut dirs: Vec<Direction>,
    opts: &LanczosOptions,
) -> Result<SpectralReport> {
    opts.validate()?;
    canonical_order(&mut dirs);
    let local = dirs
        .par_iter()
        .map(|a| Ok((localize(h, a)?, strata(h, a)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut keys: HashMap<(Vec<usize>, u64), usize> = HashMap::new();
    let mut unique = Vec::new();
    let mut slot = Vec::with_capacity(local.len());
    for (i, (loc, _)) in local.iter().enumerate() {
        let next = unique.len();
        let s = *keys.entry(loc.structure_key()).or_insert(next);
        if s == next {
            unique.push(i);
        }
        slot.push(s);
    }

    let fft = Arc::new(GridFft::new(*grid));
    let solves = unique
        .par_iter()
        .map(|&i| {
            let op = discretize_with(&local[i].0, grid, fft.clone())?;
            Ok(match ground_energy(&op, opts) {
                Ok(gs) => (gs, true),
                Err(Error::ConvergenceFailure {
                    energy,
                    residual,
                    iterations,
                }) => (
                    GroundState {
                        energy,
                        residual,
                        iterations,
                    },
                    false,
                ),
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<SpectralRow> = dirs
        .iter()
        .zip(local)
        .zip(&slot)
        .map(|((a, (_, sig)), &s)| {
            let (gs, converged) = solves[s];
            SpectralRow {
                direction: a.vector().iter().copied().collect(),
                signature_hash: sig.hash_hex(),
                signature: sig,
                c_alpha: gs.energy,
                residual: gs.residual,
                iterations: gs.iterations,
                converged,
            }
        })
        .collect();

    let mut infimum: Option<(f64, &SpectralRow)> = None;
    for r in rows.iter().filter(|r| r.converged) {
        if infimum.map_or(true, |(m, _)| r.c_alpha < m) {
            infimum = Some((r.c_alpha, r));
        }
    }
    let (infimum, argmin) = match infimum {
        Some((m, r)) => (Some(m), Some(r.direction.clone())),
        None => (None, None),
    };
    let incomplete = rows.iter().any(|r| !r.converged);
    Ok(SpectralReport {
        grid: *grid,
        tol: opts.tol,
        infimum,
        argmin,
        incomplete,
        distinct_operators: unique.len(),
        rows,
    })
}

/// Fixed 17-significant-digit rendering used by every CSV writer.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SpectralReport {
    pub fn to_csv(&self) -> String {
        let d = self.grid.dim;
        let mut out = String::new();
        for i in 0..d {
            write!(out, "alpha_{i},").unwrap();
        }
        out.push_str("signature_hash,c_alpha,residual,iterations,converged\n");
        for r in &self.rows {
            for x in &r.direction {
                write!(out, "{},", fmt_float(*x)).unwrap();
            }
            writeln!(
                out,
                "{},{},{},{},{}",
                r.signature_hash,
                fmt_float(r.c_alpha),
                fmt_float(r.residual),
                r.iterations,
                r.converged
            )
            .unwrap();
        }
        out
    }

    /// `(θ, c_α)` polyline sorted by angle in `[0, 2π)`; `None` unless `d = 2`.
    pub fn angle_csv(&self) -> Option<String> {
        if self.grid.dim != 2 {
            return None;
        }
        let mut pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| {
                let t = r.direction[1].atan2(r.direction[0]);
                (t.rem_euclid(std::f64::consts::TAU), r.c_alpha)
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = String::from("theta,c_alpha\n");
        for (t, c) in pts {
            writeln!(out, "{},{}", fmt_float(t), fmt_float(c)).unwrap();
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementCheck {
    pub coarse_points: usize,
    pub fine_points: usize,
    /// Largest change of `c_α` over directions converged on both grids.
    pub max_change: f64,
    pub tolerance: f64,
    pub reliable: bool,
}

/// Compares a report against the same computation with `n` doubled.
pub fn refinement_check(
    h: &Hamiltonian,
    coarse: &SpectralReport,
    budget: usize,
    opts: &LanczosOptions,
    tolerance: f64,
) -> Result<RefinementCheck> {
    let fine_grid = coarse.grid.refined()?;
    let fine = essential_spectrum_bottom(h, &fine_grid, budget, opts)?;
    let mut max_change = 0.0f64;
    for (a, b) in coarse.rows.iter().zip(&fine.rows) {
        if a.converged && b.converged {
            max_change = max_change.max((a.c_alpha - b.c_alpha).abs());
        }
    }
    Ok(RefinementCheck {
        coarse_points: coarse.grid.points,
        fine_points: fine_grid.points,
        max_change,
        tolerance,
        reliable: max_change < tolerance && !coarse.incomplete && !fine.incomplete,
    })
}
