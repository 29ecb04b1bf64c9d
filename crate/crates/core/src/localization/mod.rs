//! Localization at infinity.
//!
//! For a direction `α` on the sphere at infinity, `τ_α` keeps every generator
//! `v ∘ π_Y` with `α ⊂ Y` and replaces the others by the constant
//! `v(π_Y(α))`, the radial limit of `v` along the projected direction. On a
//! Hamiltonian this produces
//!
//! ```text
//! τ_α(H) = h(P) + Σ_{Y ⊃ α} V_Y + Σ_{Y ⊅ α} V_Y(π_Y(α)).
//! ```
//!
//! Chains `(α₁, …, α_n)` compose these maps; evaluating the result at a point
//! of `X/[α₁,…,α_n]` gives a character of the algebra.

mod hamiltonian;
mod sampler;

pub use hamiltonian::{
    Dispersion, Hamiltonian, HamiltonianLike, LocalizedHamiltonian, PolynomialSymbol,
};
pub use sampler::{direction_sampler, strata, StratumSignature};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{Direction, DirectionChain};
use crate::potentials::{AlgebraElement, GeneratorImage, PotentialTerm};

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `τ_α(V_Y)`: `V_Y` itself when `α ⊂ Y`, otherwise the constant `v(π_Y(α))`.
pub fn tau_alpha_term(t: &PotentialTerm, alpha: &Direction) -> Result<GeneratorImage> {
    if t.subspace().contains_direction(alpha)? {
        return Ok(GeneratorImage::Term(t.clone()));
    }
    let q = t.subspace().quotient_direction(alpha)?;
    Ok(GeneratorImage::Constant(t.radial_limit(&q)?))
}

/// `τ_α(H)`. Constant images and surviving constant terms go into the offset.
pub fn localize(h: &Hamiltonian, alpha: &Direction) -> Result<LocalizedHamiltonian> {
    check_dim(h.space().dim(), alpha.dim())?;
    let mut terms = Vec::new();
    let mut surviving = Vec::new();
    let mut offset = 0.0;
    for (i, t) in h.terms().iter().enumerate() {
        match tau_alpha_term(t, alpha)? {
            GeneratorImage::Term(t) => match t.as_constant() {
                Some(c) => offset += c,
                None => {
                    terms.push(t);
                    surviving.push(i);
                }
            },
            GeneratorImage::Constant(c) => offset += c,
        }
    }
    Ok(LocalizedHamiltonian {
        space: h.space(),
        dispersion: h.dispersion().clone(),
        terms,
        surviving,
        offset,
    })
}

/// `τ_α(u)`, applied generator by generator.
pub fn tau_alpha_elem(u: &AlgebraElement, alpha: &Direction) -> Result<AlgebraElement> {
    check_dim(u.ambient_dim(), alpha.dim())?;
    // Dimensions agree, so the per-generator map cannot fail.
    Ok(u.map_generators(|g| {
        tau_alpha_term(g, alpha).expect("generator dimensions match the element")
    }))
}

/// `τ_{α_n} ⋯ τ_{α_1}(u)`; the empty chain is the identity.
pub fn tau_chain(u: &AlgebraElement, chain: &DirectionChain) -> Result<AlgebraElement> {
    check_dim(u.ambient_dim(), chain.ambient_dim())?;
    chain
        .directions()
        .iter()
        .try_fold(u.clone(), |acc, a| tau_alpha_elem(&acc, a))
}

/// `κ(u) = (τ_chain u)(a)` for a point `a` of `X/[chain]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    chain: DirectionChain,
    point: DVector<f64>,
}

impl Character {
    pub fn new(chain: DirectionChain, point: DVector<f64>) -> Result<Self> {
        let expected = chain.ambient_dim() - chain.len();
        check_dim(expected, point.len())?;
        if !point.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("character point must be finite".into()));
        }
        Ok(Self { chain, point })
    }

    pub fn chain(&self) -> &DirectionChain {
        &self.chain
    }

    pub fn point(&self) -> &DVector<f64> {
        &self.point
    }

    /// The point lifted to `X` through the orthonormal complement of the chain.
    pub fn lifted_point(&self) -> DVector<f64> {
        self.chain
            .subspace()
            .lift_quotient(&self.point)
            .expect("point dimension checked at construction")
    }
}

pub fn evaluate_character(u: &AlgebraElement, kappa: &Character) -> Result<f64> {
    tau_chain(u, kappa.chain())?.eval(&kappa.lifted_point())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Subspace;
    use crate::potentials::{numeric_radial_limit, RadialLimitFunction, SphereProfile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn dir(xs: &[f64]) -> Direction {
        Direction::from_slice(xs).unwrap()
    }

    fn well(depth: f64) -> RadialLimitFunction {
        RadialLimitFunction::GaussianWell { depth, width: 1.0 }
    }

    fn axis_term(axis: usize, depth: f64) -> PotentialTerm {
        let mut e = vec![0.0; 2];
        e[axis] = 1.0;
        PotentialTerm::new(Subspace::span(2, &[e]).unwrap(), well(depth)).unwrap()
    }

    fn cos_profile(amp: f64) -> RadialLimitFunction {
        RadialLimitFunction::AngularProfile {
            profile: SphereProfile::Affine {
                constant: 0.0,
                linear: vec![amp, 0.0],
            },
            cutoff_radius: 2.0,
        }
    }

    #[test]
    fn tau_alpha_term_examples() {
        let t = axis_term(0, -1.0);
        assert_eq!(
            tau_alpha_term(&t, &dir(&[1.0, 0.0])).unwrap(),
            GeneratorImage::Term(t.clone())
        );
        assert_eq!(
            tau_alpha_term(&t, &dir(&[0.0, 1.0])).unwrap(),
            GeneratorImage::Constant(0.0)
        );

        let ang = PotentialTerm::new(Subspace::zero(2), cos_profile(1.0)).unwrap();
        let th = PI / 3.0;
        let a = dir(&[th.cos(), th.sin()]);
        let GeneratorImage::Constant(c) = tau_alpha_term(&ang, &a).unwrap() else {
            panic!("angular term should localize to a constant");
        };
        assert!((c - 0.5).abs() < 1e-15);
        let est = numeric_radial_limit(ang.function(), &a, &v(&[0.0, 0.0]), &[20.0, 40.0, 80.0])
            .unwrap();
        assert!((est.estimate - c).abs() < 1e-12);
    }

    #[test]
    fn localize_examples() {
        let space = Space2::space();
        let h = Hamiltonian::new(
            space,
            Dispersion::Quadratic,
            vec![axis_term(0, -3.0), axis_term(1, -1.5)],
        )
        .unwrap();

        let lx = localize(&h, &dir(&[1.0, 0.0])).unwrap();
        assert_eq!(lx.surviving(), &[0]);
        assert_eq!(lx.offset(), 0.0);

        let diag = localize(&h, &dir(&[1.0, 1.0])).unwrap();
        assert!(diag.is_free());
        assert_eq!(diag.offset(), 0.0);

        let c = Hamiltonian::new(
            space,
            Dispersion::Quadratic,
            vec![PotentialTerm::constant(2, 0.7)],
        )
        .unwrap();
        let lc = localize(&c, &dir(&[0.3, -0.2])).unwrap();
        assert!(lc.is_free());
        assert_eq!(lc.offset(), 0.7);
    }

    struct Space2;
    impl Space2 {
        fn space() -> crate::geometry::Space {
            crate::geometry::Space::new(2).unwrap()
        }
    }

    fn three_generator_element() -> (AlgebraElement, [PotentialTerm; 3]) {
        let y1 = PotentialTerm::new(
            Subspace::span(2, &[vec![1.0, 0.0]]).unwrap(),
            RadialLimitFunction::Sum(vec![well(-1.0), RadialLimitFunction::Constant(0.25)]),
        )
        .unwrap();
        let y2 = PotentialTerm::new(Subspace::zero(2), cos_profile(0.8)).unwrap();
        let y3 = PotentialTerm::new(
            Subspace::span(2, &[vec![1.0, -1.0]]).unwrap(),
            RadialLimitFunction::Sum(vec![
                RadialLimitFunction::CompactBump {
                    center: vec![0.0],
                    radius: 2.0,
                    amplitude: 1.0,
                },
                RadialLimitFunction::SmoothStep {
                    direction: vec![1.0],
                    low: -0.4,
                    high: 0.6,
                    scale: 1.0,
                },
            ]),
        )
        .unwrap();
        let u = &(&AlgebraElement::generator(y1.clone()) * &AlgebraElement::generator(y2.clone()))
            + &AlgebraElement::generator(y3.clone());
        (u, [y1, y2, y3])
    }

    #[test]
    fn tau_alpha_elem_examples() {
        let c = AlgebraElement::constant(2, 2.0);
        assert_eq!(tau_alpha_elem(&c, &dir(&[0.0, 1.0])).unwrap(), c);

        // One generator survives, the other has limit 0: product annihilated.
        let p = &AlgebraElement::generator(axis_term(0, -1.0))
            * &AlgebraElement::generator(axis_term(1, -1.0));
        assert!(tau_alpha_elem(&p, &dir(&[1.0, 0.0])).unwrap().is_zero());

        // Generic direction: every generator collapses; compare with ray limits.
        let (u, _) = three_generator_element();
        let a = dir(&[0.8, 0.35]);
        let t = tau_alpha_elem(&u, &a).unwrap();
        assert!(t.monomials().iter().all(|m| m.factors.is_empty()));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let x = v(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
            let far = a.vector() * 1e7 + &x;
            let ray = u.eval(&far).unwrap();
            assert!((t.eval(&x).unwrap() - ray).abs() < 1e-6);
        }
    }

    #[test]
    fn tau_chain_examples() {
        let (u, _) = three_generator_element();
        let empty = DirectionChain::empty(2);
        assert_eq!(tau_chain(&u, &empty).unwrap(), u);

        let a = dir(&[1.0, 0.0]);
        let single = DirectionChain::new(2, vec![a.clone()]).unwrap();
        assert_eq!(
            tau_chain(&u, &single).unwrap(),
            tau_alpha_elem(&u, &a).unwrap()
        );
    }

    #[test]
    fn chain_limit_matches_iterated_ray_limits_in_3d() {
        // Generator on a plane containing [α, β] survives both steps.
        let plane = Subspace::span(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let g1 = PotentialTerm::new(plane, well(-2.0)).unwrap();
        let line = Subspace::span(3, &[vec![1.0, 0.0, 0.0]]).unwrap();
        let g2 = PotentialTerm::new(
            line,
            RadialLimitFunction::AngularProfile {
                profile: SphereProfile::Affine {
                    constant: 0.1,
                    linear: vec![0.5, 0.2],
                },
                cutoff_radius: 1.0,
            },
        )
        .unwrap();
        let u = &AlgebraElement::generator(g1) + &AlgebraElement::generator(g2);
        let a = dir(&[1.0, 0.0, 0.0]);
        let b = dir(&[0.0, 1.0, 0.0]);
        let chain = DirectionChain::new(3, vec![a.clone(), b.clone()]).unwrap();
        let t = tau_chain(&u, &chain).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3 {
            let x = v(&[
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            // lim_s lim_r u(r a + s b + x), with r ≫ s.
            let (r, s) = (1e12, 1e6);
            let far = a.vector() * r + b.vector() * s + &x;
            assert!((t.eval(&x).unwrap() - u.eval(&far).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn character_examples() {
        let (u, _) = three_generator_element();
        let kappa = Character::new(DirectionChain::empty(2), v(&[0.4, -1.1])).unwrap();
        assert_eq!(
            evaluate_character(&u, &kappa).unwrap(),
            u.eval(&v(&[0.4, -1.1])).unwrap()
        );

        // Chain (α) with α outside Y: value independent of the point.
        let g = AlgebraElement::generator(axis_term(0, -1.0).clone());
        let chain = DirectionChain::new(2, vec![dir(&[0.0, 1.0])]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let first = evaluate_character(&g, &Character::new(chain.clone(), v(&[0.0])).unwrap())
            .unwrap();
        for _ in 0..10 {
            let p = v(&[rng.gen_range(-5.0..5.0)]);
            let val = evaluate_character(&g, &Character::new(chain.clone(), p).unwrap()).unwrap();
            assert_eq!(val, first);
        }

        assert!(Character::new(chain, v(&[0.0, 1.0])).is_err());
    }
}
