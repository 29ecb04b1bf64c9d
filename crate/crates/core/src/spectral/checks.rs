use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dense::dense_eigenvalues;
use super::grid::Grid;
use super::operator::{norm, operator_norm_estimate, DiscretizedOperator, GridOperator};
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::localization::{Dispersion, HamiltonianLike};
use crate::potentials::{radial_limit, sup_norm_estimate, RadialLimitFunction};

/// Power iterations used by the norm estimates.
pub const NORM_ITERATIONS: usize = 50;

fn apply_vec<A: GridOperator + ?Sized>(a: &A, x: &[Complex64], adjoint: bool) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); x.len()];
    if adjoint {
        a.apply_adjoint(x, &mut out);
    } else {
        a.apply(x, &mut out);
    }
    out
}

/// Values of `e^{i p·x}` on the grid for the lattice momentum `(π/L)·m`.
fn plane_wave(grid: &Grid, m: &[i64]) -> Result<Vec<Complex64>> {
    if m.len() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            got: m.len(),
        });
    }
    let dk = grid.momentum_spacing();
    Ok((0..grid.len())
        .map(|i| {
            let x = grid.position(i);
            let ph: f64 = x.iter().zip(m).map(|(xi, mi)| xi * dk * *mi as f64).sum();
            Complex64::from_polar(1.0, ph)
        })
        .collect())
}

/// `‖[S_p, A]‖` for `p = (π/L)·m`, by power iteration.
pub fn commutator_norm_sp<A: GridOperator + ?Sized>(a: &A, m: &[i64], seed: u64) -> Result<f64> {
    let s = plane_wave(a.grid(), m)?;
    let mul = |x: &[Complex64], conj: bool| -> Vec<Complex64> {
        x.iter()
            .zip(&s)
            .map(|(z, w)| if conj { z * w.conj() } else { z * w })
            .collect()
    };
    // C = S A − A S and C* = A* S* − S* A*.
    let c = |x: &[Complex64]| {
        let l = mul(&apply_vec(a, x, false), false);
        let r = apply_vec(a, &mul(x, false), false);
        l.iter().zip(&r).map(|(p, q)| p - q).collect::<Vec<_>>()
    };
    let ct = |x: &[Complex64]| {
        let l = apply_vec(a, &mul(x, true), true);
        let r = mul(&apply_vec(a, x, true), true);
        l.iter().zip(&r).map(|(p, q)| p - q).collect::<Vec<_>>()
    };
    Ok(operator_norm_estimate(a.len(), c, ct, NORM_ITERATIONS, seed))
}

/// `(T_q f)(x) = f(x + qΔx)`, cyclically; `sign = −1` gives `T_q*`.
fn shift(grid: &Grid, q: &[i64], sign: i64, x: &[Complex64]) -> Vec<Complex64> {
    let n = grid.points as i64;
    (0..grid.len())
        .map(|i| {
            let idx = grid.multi_index(i);
            let src: Vec<usize> = idx
                .iter()
                .zip(q)
                .map(|(j, s)| (*j as i64 + sign * s).rem_euclid(n) as usize)
                .collect();
            x[grid.flat_index(&src)]
        })
        .collect()
}

/// `max(‖(T_q − 1)A‖, ‖(T_q − 1)A*‖)` for a shift by `q` grid steps.
pub fn translation_defect<A: GridOperator + ?Sized>(a: &A, q: &[i64], seed: u64) -> Result<f64> {
    let g = *a.grid();
    if q.len() != g.dim {
        return Err(Error::DimensionMismatch {
            expected: g.dim,
            got: q.len(),
        });
    }
    let minus = |u: Vec<Complex64>, v: &[Complex64]| -> Vec<Complex64> {
        u.into_iter().zip(v).map(|(p, q)| p - q).collect()
    };
    let estimate = |adj: bool| {
        // C = (T − 1)B with B = A or A*, C* = B*(T* − 1).
        let c = |x: &[Complex64]| {
            let bx = apply_vec(a, x, adj);
            minus(shift(&g, q, 1, &bx), &bx)
        };
        let ct = |x: &[Complex64]| apply_vec(a, &minus(shift(&g, q, -1, x), x), !adj);
        operator_norm_estimate(a.len(), c, ct, NORM_ITERATIONS, seed)
    };
    Ok(estimate(false).max(estimate(true)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientCheck {
    pub radii: Vec<f64>,
    pub defects: Vec<f64>,
    /// `φ(α)`, the constant the translates converge to.
    pub limit: f64,
}

impl QuotientCheck {
    pub fn strictly_decreasing(&self) -> bool {
        self.defects.windows(2).all(|w| w[1] < w[0])
    }

    pub fn final_defect(&self) -> f64 {
        *self.defects.last().unwrap_or(&0.0)
    }
}

/// Normalized Gaussians of several widths centred at the origin, one of them modulated.
pub fn default_test_vectors(grid: &Grid) -> Vec<Vec<Complex64>> {
    let make = |w: f64, k: f64| {
        let mut v: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                let r2: f64 = x.iter().map(|t| t * t).sum();
                Complex64::from_polar((-r2 / (2.0 * w * w)).exp(), k * x[0])
            })
            .collect();
        let s = norm(&v);
        v.iter_mut().for_each(|z| *z /= s);
        v
    };
    vec![make(0.5, 0.0), make(1.0, 0.0), make(2.0, 0.0), make(1.0, 1.0)]
}

/// Defects `max_u ‖(T_{rα} A T_{rα}* − φ(α)ψ(P))u‖` for `A = φ(Q)ψ(P)`.
///
/// Conjugating by the translation turns `φ(Q)` into `φ(Q + rα)`, evaluated
/// pointwise rather than on the torus, so radii must stay below `L/2`.
pub fn two_body_quotient_check(
    phi: &RadialLimitFunction,
    psi: impl Fn(&[f64]) -> f64,
    alpha: &Direction,
    radii: &[f64],
    grid: &Grid,
    test_vectors: &[Vec<Complex64>],
) -> Result<QuotientCheck> {
    phi.validate(grid.dim)?;
    if alpha.dim() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            got: alpha.dim(),
        });
    }
    let limit_radius = grid.half_length / 2.0;
    if let Some(&r) = radii.iter().find(|r| !(**r < limit_radius) || **r < 0.0) {
        return Err(Error::RadiusTooLarge {
            radius: r,
            limit: limit_radius,
        });
    }
    let defaults;
    let vectors = if test_vectors.is_empty() {
        defaults = default_test_vectors(grid);
        &defaults
    } else {
        test_vectors
    };
    let limit = radial_limit(phi, alpha)?;
    let fft = super::grid::GridFft::new(*grid);
    let psi_vals: Vec<f64> = (0..grid.len()).map(|i| psi(&grid.momentum(i))).collect();
    let smoothed: Vec<Vec<Complex64>> = vectors
        .iter()
        .map(|u| {
            let mut w = vec![Complex64::default(); u.len()];
            fft.apply_multiplier(&psi_vals, u, &mut w);
            w
        })
        .collect();
    let positions = grid.positions();
    let a = alpha.vector();
    let defects = radii
        .iter()
        .map(|r| {
            let diff: Vec<f64> = positions
                .iter()
                .map(|x| {
                    let y: Vec<f64> = x.iter().zip(a.iter()).map(|(xi, ai)| xi + r * ai).collect();
                    phi.eval(&y) - limit
                })
                .collect();
            vectors
                .iter()
                .zip(&smoothed)
                .map(|(u, w)| {
                    let num = w
                        .iter()
                        .zip(&diff)
                        .map(|(z, d)| (z * *d).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    num / norm(u)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(QuotientCheck {
        radii: radii.to_vec(),
        defects,
        limit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionCheck {
    /// Smallest `c` satisfying both bounds on the samples.
    pub c: f64,
    /// Fitted growth exponent.
    pub s: f64,
    pub proper: bool,
    pub passed: bool,
}

/// `0.1, 0.3, 0.5` and 21 log-spaced radii in `[1, 100]`.
pub fn default_dispersion_radii() -> Vec<f64> {
    let mut r = vec![0.1, 0.3, 0.5];
    r.extend((0..=20).map(|i| 10f64.powf(i as f64 / 10.0)));
    r
}

fn sample_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            out.push(e);
        }
    }
    if dim > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xd15);
        for _ in 0..32 {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            if n > 1e-3 {
                out.push(v.into_iter().map(|t| t / n).collect());
            }
        }
    }
    out
}

/// Checks `|∇h| ≤ c(1+h)` and `c⁻¹|p|^s ≤ (1+h)^{1/2} ≤ c|p|^s` on samples,
/// with central differences of step `1e-5` for the gradient and `s` fitted
/// by least squares on `log (1+h)^{1/2}` against `log |p|` for `|p| ∈ [1, 100]`.
pub fn validate_symbol(dim: usize, h: impl Fn(&[f64]) -> f64, radii: &[f64]) -> DispersionCheck {
    const STEP: f64 = 1e-5;
    let dirs = sample_directions(dim);
    let mut samples = Vec::new();
    for &r in radii {
        for d in &dirs {
            let p: Vec<f64> = d.iter().map(|t| t * r).collect();
            let hp = h(&p);
            let grad = (0..dim)
                .map(|i| {
                    let mut a = p.clone();
                    let mut b = p.clone();
                    a[i] += STEP;
                    b[i] -= STEP;
                    ((h(&a) - h(&b)) / (2.0 * STEP)).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            samples.push((r, hp, grad));
        }
    }
    let fail = DispersionCheck {
        c: f64::INFINITY,
        s: 0.0,
        proper: false,
        passed: false,
    };
    if samples.iter().any(|(_, hp, g)| !(1.0 + hp > 0.0) || !g.is_finite()) {
        return fail;
    }

    // The exponent is an asymptotic quantity, so it is fitted on the top decade
    // of the sampled radii where lower-order terms no longer bend the curve.
    let top = radii.iter().copied().fold(0.0f64, f64::max);
    let fit: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(r, _, _)| *r >= 1.0 && *r >= top / 10.0)
        .map(|(r, hp, _)| (r.ln(), 0.5 * (1.0 + hp).ln()))
        .collect();
    if fit.len() < 2 {
        return fail;
    }
    let n = fit.len() as f64;
    let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
    let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let s = if sxx > 0.0 { sxy / sxx } else { 0.0 };

    let mut c = 0.0f64;
    for &(r, hp, g) in &samples {
        c = c.max(g / (1.0 + hp));
        if r >= 1.0 {
            let root = (1.0 + hp).sqrt();
            let ps = r.powf(s);
            c = c.max(ps / root).max(root / ps);
        }
    }

    let (rmin, rmax) = radii
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    let at = |r0: f64| samples.iter().filter(move |(r, _, _)| *r == r0).map(|s| s.1);
    let outer_min = at(rmax).fold(f64::INFINITY, f64::min);
    let inner_max = at(rmin).fold(f64::NEG_INFINITY, f64::max);
    let proper = outer_min > inner_max && s > 0.05;
    DispersionCheck {
        c,
        s,
        proper,
        passed: proper && c.is_finite(),
    }
}

pub fn validate_dispersion(h: &Dispersion, dim: usize, radii: &[f64]) -> Result<DispersionCheck> {
    h.validate(dim)?;
    Ok(validate_symbol(dim, |p| h.eval(p), radii))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormBound {
    pub term: usize,
    pub subspace_dim: usize,
    pub mu: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormBoundReport {
    pub rows: Vec<FormBound>,
    pub mu_total: f64,
    pub passed: bool,
}

/// `±V_Y ≤ μ_Y h(P) + ν_Y`. Every supported term is bounded, so `μ_Y = 0`
/// and `ν_Y = sup |v|`.
pub fn form_bound_check<H: HamiltonianLike + ?Sized>(h: &H) -> FormBoundReport {
    let rows: Vec<FormBound> = h
        .terms()
        .iter()
        .enumerate()
        .map(|(i, t)| FormBound {
            term: i,
            subspace_dim: t.subspace().dim(),
            mu: 0.0,
            nu: sup_norm_estimate(t),
        })
        .collect();
    let mu_total = rows.iter().map(|r| r.mu).sum();
    FormBoundReport {
        rows,
        mu_total,
        passed: mu_total < 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalCheck {
    pub c_alpha: f64,
    /// Largest gap between consecutive points of `{c_α + 0.1} ∪ σ ∪ {first eigenvalue ≥ c_α + window}`
    /// restricted to the window.
    pub max_gap: f64,
    /// Largest gap of the free spectrum below `c_α + window`.
    pub free_gap: f64,
    pub passed: bool,
}

/// Checks that the spectrum above `c_α` fills in like the free one, as a
/// half-line `[c_α, ∞)` does after discretization.
pub fn interval_structure_check(
    op: &DiscretizedOperator,
    c_alpha: f64,
    window: f64,
) -> Result<IntervalCheck> {
    let eig = dense_eigenvalues(op)?;
    let lo = c_alpha + 0.1;
    let hi = c_alpha + window;
    // The window edges count as points so an empty window shows up as one
    // large gap rather than passing for lack of eigenvalues.
    let mut pts = vec![lo];
    pts.extend(eig.iter().copied().filter(|e| *e > lo && *e < hi));
    match eig.iter().find(|e| **e >= hi) {
        Some(e) => pts.push(*e),
        None => pts.push(hi),
    }
    let max_gap = pts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let mut free: Vec<f64> = op.multiplier().to_vec();
    free.sort_by(f64::total_cmp);
    let free_gap = free
        .windows(2)
        .filter(|w| w[0] <= hi)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    Ok(IntervalCheck {
        c_alpha,
        max_gap,
        free_gap,
        passed: max_gap <= 5.0 * free_gap,
    })
}
