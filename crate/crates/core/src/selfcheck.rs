//! Built-in property suites run by `hvz selfcheck`.
//!
//! The localization map is a parameter so a deliberately broken one can be
//! substituted and shown to be caught.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{Direction, Space, Subspace};
use crate::localization::{tau_alpha_elem, Dispersion, Hamiltonian};
use crate::potentials::{AlgebraElement, PotentialTerm, RadialLimitFunction, SphereProfile};
use crate::spectral::{
    commutator_norm_sp, discretize, essential_spectrum_bottom, translation_defect, Grid,
    LanczosOptions, LinearOperator, QPProduct,
};

/// Signature of a localization map `u ↦ τ_α(u)`.
pub type Localizer = dyn Fn(&AlgebraElement, &Direction) -> Result<AlgebraElement> + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfcheckOptions {
    /// Multiplies every tolerance; below 1 tightens the suites.
    pub tolerance_scale: f64,
    pub seed: u64,
}

impl Default for SelfcheckOptions {
    fn default() -> Self {
        Self {
            tolerance_scale: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    /// The quantity compared against `tolerance`; smaller is better.
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Passing, but with `measured` above a tenth of the tolerance.
    pub marginal: bool,
}

impl SuiteResult {
    fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        let passed = measured <= tolerance;
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed,
            marginal: passed && measured > 0.1 * tolerance,
        }
    }

    fn failed(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured: f64::INFINITY,
            tolerance,
            passed: false,
            marginal: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfcheckReport {
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl SelfcheckReport {
    pub fn table(&self) -> String {
        let mut s = format!("{:<28} {:>12} {:>12}  status\n", "suite", "measured", "tolerance");
        for r in &self.suites {
            let status = match (r.passed, r.marginal) {
                (false, _) => "FAIL",
                (true, true) => "pass (marginal)",
                (true, false) => "pass",
            };
            s.push_str(&format!(
                "{:<28} {:>12.3e} {:>12.3e}  {status}\n",
                r.name, r.measured, r.tolerance
            ));
        }
        s
    }
}

/// `u = (g₁ + ½)·(3g₂ + g₃)` with a line well, an angular term and an axis well in ℝ².
pub fn fixture_elements() -> (AlgebraElement, AlgebraElement) {
    let line = Subspace::span(2, &[vec![1.0, 2.0]]).expect("nonzero vector");
    let g1 = PotentialTerm::new(
        line,
        RadialLimitFunction::GaussianWell {
            depth: -1.0,
            width: 1.5,
        },
    )
    .expect("valid well");
    let g2 = PotentialTerm::new(
        Subspace::zero(2),
        RadialLimitFunction::AngularProfile {
            profile: SphereProfile::Affine {
                constant: 0.2,
                linear: vec![0.4, -0.1],
            },
            cutoff_radius: 1.0,
        },
    )
    .expect("valid profile");
    let g3 = PotentialTerm::new(
        Subspace::span(2, &[vec![0.0, 1.0]]).expect("nonzero vector"),
        RadialLimitFunction::GaussianWell {
            depth: 0.7,
            width: 0.8,
        },
    )
    .expect("valid well");
    let u = &AlgebraElement::generator(g1.clone()) + &AlgebraElement::constant(2, 0.5);
    let w = &(&AlgebraElement::generator(g2).scale(3.0) + &AlgebraElement::generator(g3))
        + &AlgebraElement::generator(g1);
    (u, w)
}

fn fixture_directions() -> Vec<Direction> {
    // On the line of g1, on the axis of g3, and generic.
    [[1.0, 2.0], [0.0, -1.0], [0.3, -0.8], [-1.0, 0.1]]
        .iter()
        .map(|v| Direction::from_slice(v).expect("nonzero"))
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn random_points(rng: &mut ChaCha8Rng, count: usize) -> Vec<DVector<f64>> {
    (0..count)
        .map(|_| DVector::from_fn(2, |_, _| rng.gen_range(-6.0..6.0)))
        .collect()
}

fn idempotency(tau: &Localizer, rng: &mut ChaCha8Rng) -> Result<f64> {
    let (u, w) = fixture_elements();
    let pts = random_points(rng, 100);
    let mut worst = 0.0f64;
    for a in fixture_directions() {
        for e in [&u, &w] {
            let once = tau(e, &a)?;
            let twice = tau(&once, &a)?;
            for x in &pts {
                worst = worst.max(rel(twice.eval(x)?, once.eval(x)?));
            }
        }
    }
    Ok(worst)
}

fn morphism(tau: &Localizer, rng: &mut ChaCha8Rng) -> Result<f64> {
    let (u, w) = fixture_elements();
    let pts = random_points(rng, 100);
    let mut worst = 0.0f64;
    for a in fixture_directions() {
        let (tu, tw) = (tau(&u, &a)?, tau(&w, &a)?);
        let tprod = tau(&(&u * &w), &a)?;
        let tsum = tau(&(&u + &w), &a)?;
        for x in &pts {
            let (p, q) = (tu.eval(x)?, tw.eval(x)?);
            worst = worst.max(rel(tprod.eval(x)?, p * q));
            worst = worst.max(rel(tsum.eval(x)?, p + q));
        }
    }
    Ok(worst)
}

fn adjointness(seed: u64) -> Result<f64> {
    let t = |e: Vec<f64>, depth: f64| {
        PotentialTerm::new(
            Subspace::span(2, &[e]).expect("nonzero"),
            RadialLimitFunction::GaussianWell { depth, width: 1.0 },
        )
    };
    let h = Hamiltonian::new(
        Space::new(2)?,
        Dispersion::Relativistic {
            masses: vec![0.5, 1.0],
            block_dim: 1,
        },
        vec![t(vec![1.0, 0.0], -3.0)?, t(vec![1.0, 1.0], 1.5)?],
    )?;
    let op = discretize(&h, &Grid::new(2, 8.0, 32)?)?;
    let n = op.len();
    let mut worst = 0.0f64;
    for k in 0..20 {
        let x = crate::spectral::seeded_vector(seed.wrapping_add(2 * k), n);
        let y = crate::spectral::seeded_vector(seed.wrapping_add(2 * k + 1), n);
        let (mut ax, mut ay) = (vec![Default::default(); n], vec![Default::default(); n]);
        op.apply(&x, &mut ax);
        op.apply(&y, &mut ay);
        let l: num_complex::Complex64 = ax.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let r: num_complex::Complex64 = x.iter().zip(&ay).map(|(a, b)| a.conj() * b).sum();
        let scale = ax.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            * y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max((l - r).norm() / scale.max(1.0));
    }
    Ok(worst)
}

fn free_exactness() -> Result<f64> {
    let h = Hamiltonian::free(Space::new(1)?, Dispersion::Quadratic)?;
    let report = essential_spectrum_bottom(&h, &Grid::new(1, 16.0, 256)?, 2, &LanczosOptions::default())?;
    Ok(report.infimum.map_or(f64::INFINITY, f64::abs))
}

/// Ratio of the quarter-scale value to the full-scale one, or infinity if the
/// three-term sequence is not strictly decreasing.
fn decay_ratio(seq: [f64; 3]) -> f64 {
    if seq[1] < seq[0] && seq[2] < seq[1] && seq[0] > 0.0 {
        seq[2] / seq[0]
    } else {
        f64::INFINITY
    }
}

/// Decay sequences for `A = φ(Q)ψ(P)` with a Gaussian `φ`, which is periodic on
/// the box up to rounding, and `ψ(k) = (1+|k|²)^{-1}`.
fn pm_decay(seed: u64) -> Result<(f64, f64)> {
    let g = Grid::new(1, 16.0, 256)?;
    let a = QPProduct::new(
        &g,
        |x| (-x[0] * x[0] / 4.0).exp(),
        |k| 1.0 / (1.0 + k[0] * k[0]),
    );
    let comm = [4i64, 2, 1].map(|m| commutator_norm_sp(&a, &[m], seed).unwrap_or(f64::NAN));
    let tr = [4i64, 2, 1].map(|q| translation_defect(&a, &[q], seed).unwrap_or(f64::NAN));
    Ok((decay_ratio(comm), decay_ratio(tr)))
}

/// Runs every suite with the standard localization map.
pub fn run_selfcheck(opts: &SelfcheckOptions) -> SelfcheckReport {
    run_selfcheck_with(opts, &tau_alpha_elem)
}

pub fn run_selfcheck_with(opts: &SelfcheckOptions, tau: &Localizer) -> SelfcheckReport {
    let s = opts.tolerance_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut suites = Vec::new();
    let mut push = |name: &str, tol: f64, r: Result<f64>| {
        suites.push(match r {
            Ok(m) if m.is_finite() => SuiteResult::new(name, m, tol),
            _ => SuiteResult::failed(name, tol),
        });
    };
    push("idempotency", 1e-12 * s, idempotency(tau, &mut rng));
    push("morphism", 1e-12 * s, morphism(tau, &mut rng));
    push("adjointness", 1e-10 * s, adjointness(opts.seed));
    push("free-operator exactness", 1e-10 * s, free_exactness());
    // A linear decay gives 1/4 over two halvings.
    match pm_decay(opts.seed) {
        Ok((c, t)) => {
            push("commutator decay", 0.35 * s, Ok(c));
            push("translation decay", 0.35 * s, Ok(t));
        }
        Err(e) => {
            push("commutator decay", 0.35 * s, Err(e.clone()));
            push("translation decay", 0.35 * s, Err(e));
        }
    }
    let passed = suites.iter().all(|r| r.passed);
    SelfcheckReport { suites, passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let r = run_selfcheck(&SelfcheckOptions::default());
        assert!(r.passed, "{}", r.table());
    }

    #[test]
    fn sign_error_in_localization_is_caught() {
        let flipped = |u: &AlgebraElement, a: &Direction| Ok(tau_alpha_elem(u, a)?.scale(-1.0));
        let r = run_selfcheck_with(&SelfcheckOptions::default(), &flipped);
        let idem = r.suites.iter().find(|s| s.name == "idempotency").unwrap();
        assert!(!idem.passed && !r.passed, "{}", r.table());
    }

    #[test]
    fn tightened_tolerances_show_where_margins_are_thin() {
        let r = run_selfcheck(&SelfcheckOptions {
            tolerance_scale: 1e-3,
            seed: 0,
        });
        // Decay ratios sit near 1/4, far above a thousandth of 0.35.
        let c = r.suites.iter().find(|s| s.name == "commutator decay").unwrap();
        assert!(!c.passed);
        assert!(r.suites.iter().any(|s| s.name == "idempotency" && s.passed));
    }
}
