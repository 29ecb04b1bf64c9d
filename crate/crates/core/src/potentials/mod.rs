//! Potential functions with uniform radial limits at infinity.
//!
//! Every [`RadialLimitFunction`] lives on a realized quotient `Z = Y⊥` and has
//! a closed-form limit along each ray, so localization maps the class into
//! itself (non-surviving terms collapse to constants).

mod algebra;
mod profile;

pub use algebra::{AlgebraElement, GeneratorImage, Monomial};
pub use profile::{SphereProfile, SphereTable};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{Direction, Subspace};

/// Smooth monotone switch `s(t) = (1 + tanh t) / 2`.
pub fn smooth_switch(t: f64) -> f64 {
    0.5 * (1.0 + t.tanh())
}

fn flat_exp(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: 0 for `r ≤ R`, 1 for `r ≥ 2R`, C^∞ in between.
pub fn radial_cutoff(r: f64, cutoff_radius: f64) -> f64 {
    let t = (r - cutoff_radius) / cutoff_radius;
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = flat_exp(t);
    a / (a + flat_exp(1.0 - t))
}

/// Closed-form bounded functions on `ℝ^m` with uniform radial limits.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialLimitFunction {
    Constant(f64),
    /// `depth · exp(−|z|² / width²)`
    GaussianWell { depth: f64, width: f64 },
    /// `amplitude · exp(1 − 1/(1 − ρ²))` for `ρ = |z − center| / radius < 1`, else 0.
    CompactBump {
        center: Vec<f64>,
        radius: f64,
        amplitude: f64,
    },
    /// `low + (high − low) · s(⟨z, direction⟩ / scale)`; one-dimensional domains only.
    SmoothStep {
        direction: Vec<f64>,
        low: f64,
        high: f64,
        scale: f64,
    },
    /// `g(z/|z|) · χ(|z|)` with `χ` the fixed cutoff between `R` and `2R`.
    AngularProfile {
        profile: SphereProfile,
        cutoff_radius: f64,
    },
    Sum(Vec<RadialLimitFunction>),
    Scale(f64, Box<RadialLimitFunction>),
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive and finite, got {x}")))
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite")))
    }
}

impl RadialLimitFunction {
    /// Check parameters and that the function makes sense on `ℝ^m`.
    pub fn validate(&self, m: usize) -> Result<()> {
        use RadialLimitFunction::*;
        match self {
            Constant(c) => finite("constant", *c),
            GaussianWell { depth, width } => {
                finite("depth", *depth)?;
                positive("width", *width)
            }
            CompactBump {
                center,
                radius,
                amplitude,
            } => {
                if center.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: center.len(),
                    });
                }
                if !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidInput("bump center must be finite".into()));
                }
                finite("amplitude", *amplitude)?;
                positive("radius", *radius)
            }
            SmoothStep {
                direction,
                low,
                high,
                scale,
            } => {
                // In m ≥ 2 the ray limit jumps across ⟨z, dir⟩ = 0, so it is not uniform.
                if m != 1 {
                    return Err(Error::InvalidInput(format!(
                        "smooth step needs a one-dimensional quotient, got dimension {m}; \
                         use an angular profile instead"
                    )));
                }
                if direction.len() != 1 || (direction[0].abs() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(
                        "smooth step direction must be +1 or -1".into(),
                    ));
                }
                finite("low", *low)?;
                finite("high", *high)?;
                positive("scale", *scale)
            }
            AngularProfile {
                profile,
                cutoff_radius,
            } => {
                if m == 0 {
                    return Err(Error::DomainIsPoint);
                }
                positive("cutoff radius", *cutoff_radius)?;
                profile.validate(m)
            }
            Sum(parts) => parts.iter().try_for_each(|p| p.validate(m)),
            Scale(c, inner) => {
                finite("scale factor", *c)?;
                inner.validate(m)
            }
        }
    }

    /// Evaluate at a quotient point. Dimensions are assumed validated.
    pub fn eval(&self, z: &[f64]) -> f64 {
        use RadialLimitFunction::*;
        match self {
            Constant(c) => *c,
            GaussianWell { depth, width } => {
                let r2: f64 = z.iter().map(|t| t * t).sum();
                depth * (-r2 / (width * width)).exp()
            }
            CompactBump {
                center,
                radius,
                amplitude,
            } => {
                let d2: f64 = z.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                let rho2 = d2 / (radius * radius);
                if rho2 < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - rho2)).exp()
                } else {
                    0.0
                }
            }
            SmoothStep {
                direction,
                low,
                high,
                scale,
            } => {
                let t: f64 = z.iter().zip(direction).map(|(a, b)| a * b).sum();
                low + (high - low) * smooth_switch(t / scale)
            }
            AngularProfile {
                profile,
                cutoff_radius,
            } => {
                let r = z.iter().map(|t| t * t).sum::<f64>().sqrt();
                let chi = radial_cutoff(r, *cutoff_radius);
                if chi == 0.0 {
                    return 0.0;
                }
                let unit: Vec<f64> = z.iter().map(|t| t / r).collect();
                profile.eval(&unit) * chi
            }
            Sum(parts) => parts.iter().map(|p| p.eval(z)).sum(),
            Scale(c, inner) => c * inner.eval(z),
        }
    }

    /// Closed-form `lim_{r→∞} v(r ẑ)` for a unit vector `ẑ`.
    fn limit_unchecked(&self, zhat: &[f64]) -> f64 {
        use RadialLimitFunction::*;
        match self {
            Constant(c) => *c,
            GaussianWell { .. } | CompactBump { .. } => 0.0,
            SmoothStep {
                direction,
                low,
                high,
                ..
            } => {
                let t: f64 = zhat.iter().zip(direction).map(|(a, b)| a * b).sum();
                if t > 0.0 {
                    *high
                } else if t < 0.0 {
                    *low
                } else {
                    0.5 * (low + high)
                }
            }
            AngularProfile { profile, .. } => profile.eval(zhat),
            Sum(parts) => parts.iter().map(|p| p.limit_unchecked(zhat)).sum(),
            Scale(c, inner) => c * inner.limit_unchecked(zhat),
        }
    }

    /// Upper bound on `sup |v|` from the closed form.
    pub fn sup_bound(&self) -> f64 {
        use RadialLimitFunction::*;
        match self {
            Constant(c) => c.abs(),
            GaussianWell { depth, .. } => depth.abs(),
            CompactBump { amplitude, .. } => amplitude.abs(),
            SmoothStep { low, high, .. } => low.abs().max(high.abs()),
            AngularProfile { profile, .. } => profile.sup_bound(),
            Sum(parts) => parts.iter().map(|p| p.sup_bound()).sum(),
            Scale(c, inner) => c.abs() * inner.sup_bound(),
        }
    }
}

/// Exact radial limit of `v` along `ẑ`, a direction of `v`'s domain.
pub fn radial_limit(v: &RadialLimitFunction, zhat: &Direction) -> Result<f64> {
    if zhat.dim() == 0 {
        return Err(Error::DomainIsPoint);
    }
    v.validate(zhat.dim())?;
    Ok(v.limit_unchecked(zhat.vector().as_slice()))
}

/// Ray-limit estimate `v(r_max ẑ + x)` and its convergence error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEstimate {
    pub estimate: f64,
    /// Largest successive difference among the last three radii.
    pub error_bar: f64,
}

/// Numerical ray limit along `zhat` from `offset`, used as an oracle for
/// [`radial_limit`] and for localization checks.
pub fn numeric_radial_limit(
    v: &RadialLimitFunction,
    zhat: &Direction,
    offset: &DVector<f64>,
    radii: &[f64],
) -> Result<RadialEstimate> {
    if radii.len() < 3 || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "radii must be strictly increasing with at least three entries".into(),
        ));
    }
    if offset.len() != zhat.dim() {
        return Err(Error::DimensionMismatch {
            expected: zhat.dim(),
            got: offset.len(),
        });
    }
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let p = zhat.vector() * r + offset;
            v.eval(p.as_slice())
        })
        .collect();
    let k = values.len();
    let error_bar = (values[k - 1] - values[k - 2])
        .abs()
        .max((values[k - 2] - values[k - 3]).abs());
    Ok(RadialEstimate {
        estimate: values[k - 1],
        error_bar,
    })
}

/// `V_Y = v ∘ π_Y`: a function on the quotient pulled back to `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTerm {
    subspace: Subspace,
    function: RadialLimitFunction,
    bound: f64,
}

impl PotentialTerm {
    pub fn new(subspace: Subspace, function: RadialLimitFunction) -> Result<Self> {
        function.validate(subspace.quotient_dim())?;
        let bound = function.sup_bound();
        Ok(Self {
            subspace,
            function,
            bound,
        })
    }

    /// The constant function `c`, realized on `Y = X`.
    pub fn constant(ambient_dim: usize, c: f64) -> Self {
        Self {
            subspace: Subspace::full(ambient_dim),
            function: RadialLimitFunction::Constant(c),
            bound: c.abs(),
        }
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn function(&self) -> &RadialLimitFunction {
        &self.function
    }

    pub fn ambient_dim(&self) -> usize {
        self.subspace.ambient_dim()
    }

    /// Every class here is bounded.
    pub fn is_bounded(&self) -> bool {
        true
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Value if the term is a constant on a point quotient or a `Constant` class.
    pub fn as_constant(&self) -> Option<f64> {
        match &self.function {
            RadialLimitFunction::Constant(c) => Some(*c),
            f if self.subspace.quotient_dim() == 0 => Some(f.eval(&[])),
            _ => None,
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        let z = self.subspace.project_quotient(x)?;
        Ok(self.function.eval(z.as_slice()))
    }

    /// Radial limit of `v` along a direction of the quotient `X/Y`.
    pub fn radial_limit(&self, zhat: &Direction) -> Result<f64> {
        if self.subspace.quotient_dim() == 0 {
            return Err(Error::DomainIsPoint);
        }
        if zhat.dim() != self.subspace.quotient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.subspace.quotient_dim(),
                got: zhat.dim(),
            });
        }
        Ok(self.function.limit_unchecked(zhat.vector().as_slice()))
    }

    pub(crate) fn eval_slice(&self, x: &[f64]) -> f64 {
        let z = self.subspace.project_quotient_unchecked(x);
        self.function.eval(z.as_slice())
    }
}

/// `V_Y(x) = v(π_Y x)`.
pub fn eval_term(t: &PotentialTerm, x: &DVector<f64>) -> Result<f64> {
    t.eval(x)
}

/// Upper bound on `sup |V_Y|`.
pub fn sup_norm_estimate(t: &PotentialTerm) -> f64 {
    t.bound()
}
