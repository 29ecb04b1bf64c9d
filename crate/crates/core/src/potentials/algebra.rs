use std::ops::{Add, Mul};

use nalgebra::DVector;

use super::PotentialTerm;
use crate::error::{Error, Result};

/// Image of a generator under a localization: the generator itself or a constant.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorImage {
    Term(PotentialTerm),
    Constant(f64),
}

/// `coeff · Π factors`, each factor a generator `v ∘ π_Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub factors: Vec<PotentialTerm>,
}

impl Monomial {
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        let mut acc = self.coeff;
        for f in &self.factors {
            acc *= f.eval(x)?;
        }
        Ok(acc)
    }
}

/// A finite sum of monomials in generators, an element of the algebra
/// generated by the `C(X̄/Y)` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    ambient_dim: usize,
    monomials: Vec<Monomial>,
}

impl AlgebraElement {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            monomials: Vec::new(),
        }
    }

    pub fn constant(ambient_dim: usize, c: f64) -> Self {
        Self {
            ambient_dim,
            monomials: vec![Monomial {
                coeff: c,
                factors: Vec::new(),
            }],
        }
    }

    pub fn generator(term: PotentialTerm) -> Self {
        Self {
            ambient_dim: term.ambient_dim(),
            monomials: vec![Monomial {
                coeff: 1.0,
                factors: vec![term],
            }],
        }
    }

    pub fn from_monomials(ambient_dim: usize, monomials: Vec<Monomial>) -> Result<Self> {
        for m in &monomials {
            for f in &m.factors {
                if f.ambient_dim() != ambient_dim {
                    return Err(Error::DimensionMismatch {
                        expected: ambient_dim,
                        got: f.ambient_dim(),
                    });
                }
            }
        }
        Ok(Self {
            ambient_dim,
            monomials,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: x.len(),
            });
        }
        self.monomials
            .iter()
            .try_fold(0.0, |acc, m| Ok(acc + m.eval(x)?))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial {
                    coeff: m.coeff * c,
                    factors: m.factors.clone(),
                })
                .collect(),
        }
    }

    /// Apply `f` to every generator; constants fold into the coefficient and
    /// zero monomials are dropped.
    pub fn map_generators<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&PotentialTerm) -> GeneratorImage,
    {
        let mut monomials = Vec::with_capacity(self.monomials.len());
        for m in &self.monomials {
            let mut coeff = m.coeff;
            let mut factors = Vec::with_capacity(m.factors.len());
            for g in &m.factors {
                match f(g) {
                    GeneratorImage::Term(t) => factors.push(t),
                    GeneratorImage::Constant(c) => coeff *= c,
                }
            }
            if coeff != 0.0 {
                monomials.push(Monomial { coeff, factors });
            }
        }
        Self {
            ambient_dim: self.ambient_dim,
            monomials,
        }
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;

    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.ambient_dim, rhs.ambient_dim, "ambient dimensions differ");
        let mut monomials = self.monomials.clone();
        monomials.extend(rhs.monomials.iter().cloned());
        AlgebraElement {
            ambient_dim: self.ambient_dim,
            monomials,
        }
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.ambient_dim, rhs.ambient_dim, "ambient dimensions differ");
        let mut monomials = Vec::with_capacity(self.monomials.len() * rhs.monomials.len());
        for a in &self.monomials {
            for b in &rhs.monomials {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                monomials.push(Monomial {
                    coeff: a.coeff * b.coeff,
                    factors,
                });
            }
        }
        AlgebraElement {
            ambient_dim: self.ambient_dim,
            monomials,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Subspace;
    use crate::potentials::{RadialLimitFunction, SphereProfile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_elements() -> (AlgebraElement, AlgebraElement) {
        let line = Subspace::span(2, &[vec![1.0, 2.0]]).unwrap();
        let g1 = PotentialTerm::new(
            line,
            RadialLimitFunction::GaussianWell {
                depth: -1.0,
                width: 1.5,
            },
        )
        .unwrap();
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
        .unwrap();
        let u = &AlgebraElement::generator(g1.clone()) + &AlgebraElement::constant(2, 0.5);
        let w = &AlgebraElement::generator(g2).scale(3.0) + &AlgebraElement::generator(g1);
        (u, w)
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism() {
        let (u, w) = sample_elements();
        let prod = &u * &w;
        let sum = &u + &w;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = DVector::from_vec(vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]);
            let (a, b) = (u.eval(&x).unwrap(), w.eval(&x).unwrap());
            assert!((prod.eval(&x).unwrap() - a * b).abs() <= 1e-12 * (1.0 + (a * b).abs()));
            assert!((sum.eval(&x).unwrap() - (a + b)).abs() <= 1e-12 * (1.0 + (a + b).abs()));
        }
    }

    #[test]
    fn zero_and_constant() {
        let x = DVector::from_vec(vec![0.1, 0.2]);
        assert_eq!(AlgebraElement::zero(2).eval(&x).unwrap(), 0.0);
        assert_eq!(AlgebraElement::constant(2, 4.0).eval(&x).unwrap(), 4.0);
        assert!(AlgebraElement::zero(2).eval(&DVector::zeros(3)).is_err());
    }
}
