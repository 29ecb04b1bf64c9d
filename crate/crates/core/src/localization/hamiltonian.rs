use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Space;
use crate::potentials::PotentialTerm;

/// A multivariate polynomial `Σ c_j p^{α_j}` used as a kinetic symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSymbol {
    dim: usize,
    terms: Vec<(f64, Vec<u32>)>,
    degree: u32,
}

impl PolynomialSymbol {
    /// Requires even degree and a leading form that is positive on the sphere.
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        let bad = |m: String| Error::InvalidDispersion(m);
        for (c, e) in &terms {
            if e.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.len(),
                });
            }
            if !c.is_finite() {
                return Err(bad("polynomial coefficient is not finite".into()));
            }
        }
        let degree = terms
            .iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(_, e)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        if degree == 0 || degree % 2 != 0 {
            return Err(bad(format!("polynomial degree must be even and positive, got {degree}")));
        }
        let sym = Self { dim, terms, degree };
        // Axes and pairwise diagonals catch forms that vanish on coordinate
        // directions, random points the rest.
        let mut probes: Vec<Vec<f64>> = Vec::new();
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            probes.push(e.clone());
            for j in i + 1..dim {
                for s in [1.0, -1.0] {
                    let mut f = e.clone();
                    f[j] = s;
                    probes.push(f);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        probes.extend((0..2000).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()));
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for mut p in probes {
            let n = p.iter().map(|t| t * t).sum::<f64>().sqrt();
            if n < 1e-6 {
                continue;
            }
            p.iter_mut().for_each(|t| *t /= n);
            let f = sym.leading_form(&p);
            lo = lo.min(f);
            hi = hi.max(f.abs());
        }
        if !(lo > 1e-9 * hi) {
            return Err(bad("leading form is not positive on the unit sphere".into()));
        }
        Ok(sym)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }

    fn monomial(p: &[f64], e: &[u32]) -> f64 {
        p.iter().zip(e).map(|(x, k)| x.powi(*k as i32)).product()
    }

    fn leading_form(&self, p: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|(_, e)| e.iter().sum::<u32>() == self.degree)
            .map(|(c, e)| c * Self::monomial(p, e))
            .sum()
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * Self::monomial(p, e)).sum()
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                self.terms
                    .iter()
                    .filter(|(_, e)| e[i] > 0)
                    .map(|(c, e)| {
                        let mut d = e.clone();
                        d[i] -= 1;
                        c * e[i] as f64 * Self::monomial(p, &d)
                    })
                    .sum()
            })
            .collect()
    }
}

/// The kinetic symbol `h` of `h(P)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Dispersion {
    /// `h(ξ) = |ξ|²`
    Quadratic,
    /// `h(p) = Σ_k (|p_k|² + m_k²)^{1/2}` over blocks of `block_dim` coordinates.
    Relativistic { masses: Vec<f64>, block_dim: usize },
    Polynomial(PolynomialSymbol),
}

impl Dispersion {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Dispersion::Quadratic => Ok(()),
            Dispersion::Relativistic { masses, block_dim } => {
                if *block_dim == 0 || masses.len() * block_dim != dim {
                    return Err(Error::InvalidDispersion(format!(
                        "{} particles of dimension {block_dim} do not fill a space of dimension {dim}",
                        masses.len()
                    )));
                }
                if !masses.iter().all(|m| m.is_finite()) {
                    return Err(Error::InvalidDispersion("masses must be finite".into()));
                }
                Ok(())
            }
            Dispersion::Polynomial(p) => {
                if p.dim != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: p.dim,
                    });
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Dispersion::Quadratic => p.iter().map(|t| t * t).sum(),
            Dispersion::Relativistic { masses, block_dim } => p
                .chunks(*block_dim)
                .zip(masses)
                .map(|(b, m)| (b.iter().map(|t| t * t).sum::<f64>() + m * m).sqrt())
                .sum(),
            Dispersion::Polynomial(poly) => poly.eval(p),
        }
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Dispersion::Quadratic => p.iter().map(|t| 2.0 * t).collect(),
            Dispersion::Relativistic { masses, block_dim } => p
                .chunks(*block_dim)
                .zip(masses)
                .flat_map(|(b, m)| {
                    let e = (b.iter().map(|t| t * t).sum::<f64>() + m * m).sqrt();
                    b.iter()
                        .map(move |t| if e > 0.0 { t / e } else { 0.0 })
                        .collect::<Vec<_>>()
                })
                .collect(),
            Dispersion::Polynomial(poly) => poly.gradient(p),
        }
    }
}

/// Shared view of a Hamiltonian before or after localization.
pub trait HamiltonianLike {
    fn space(&self) -> Space;
    fn dispersion(&self) -> &Dispersion;
    fn terms(&self) -> &[PotentialTerm];
    fn offset(&self) -> f64;
}

/// `H = h(P) + Σ_Y V_Y` with finitely many terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    space: Space,
    dispersion: Dispersion,
    terms: Vec<PotentialTerm>,
}

impl Hamiltonian {
    pub fn new(space: Space, dispersion: Dispersion, terms: Vec<PotentialTerm>) -> Result<Self> {
        dispersion.validate(space.dim())?;
        for t in &terms {
            if t.ambient_dim() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    got: t.ambient_dim(),
                });
            }
        }
        Ok(Self {
            space,
            dispersion,
            terms,
        })
    }

    pub fn free(space: Space, dispersion: Dispersion) -> Result<Self> {
        Self::new(space, dispersion, Vec::new())
    }

    pub fn with_term(&self, term: PotentialTerm) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.push(term);
        Self::new(self.space, self.dispersion.clone(), terms)
    }
}

impl HamiltonianLike for Hamiltonian {
    fn space(&self) -> Space {
        self.space
    }
    fn dispersion(&self) -> &Dispersion {
        &self.dispersion
    }
    fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }
    fn offset(&self) -> f64 {
        0.0
    }
}

/// `τ_α(H) = h(P) + Σ_{Y ⊃ α} V_Y + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedHamiltonian {
    pub(crate) space: Space,
    pub(crate) dispersion: Dispersion,
    pub(crate) terms: Vec<PotentialTerm>,
    /// Indices of the surviving terms in the parent Hamiltonian.
    pub(crate) surviving: Vec<usize>,
    pub(crate) offset: f64,
}

impl LocalizedHamiltonian {
    pub fn surviving(&self) -> &[usize] {
        &self.surviving
    }

    /// True if nothing but a constant remains, so the operator is a Fourier multiplier.
    pub fn is_free(&self) -> bool {
        self.terms.is_empty()
    }

    /// Key identifying the localized operator among localizations of one parent.
    pub fn structure_key(&self) -> (Vec<usize>, u64) {
        (self.surviving.clone(), self.offset.to_bits())
    }
}

impl HamiltonianLike for LocalizedHamiltonian {
    fn space(&self) -> Space {
        self.space
    }
    fn dispersion(&self) -> &Dispersion {
        &self.dispersion
    }
    fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }
    fn offset(&self) -> f64 {
        self.offset
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relativistic_gradient_matches_finite_differences() {
        let h = Dispersion::Relativistic {
            masses: vec![1.0, 0.5],
            block_dim: 2,
        };
        h.validate(4).unwrap();
        let p = [0.3, -1.2, 2.0, 0.1];
        let g = h.gradient(&p);
        for i in 0..4 {
            let mut a = p;
            let mut b = p;
            a[i] += 1e-6;
            b[i] -= 1e-6;
            let fd = (h.eval(&a) - h.eval(&b)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn polynomial_symbol_checks() {
        // p₁⁴ + p₂² is not positive-leading: its top form p₁⁴ vanishes at (0, 1).
        assert!(PolynomialSymbol::new(2, vec![(1.0, vec![4, 0]), (1.0, vec![0, 2])]).is_err());
        assert!(PolynomialSymbol::new(1, vec![(1.0, vec![3])]).is_err());
        let p = PolynomialSymbol::new(
            2,
            vec![(1.0, vec![4, 0]), (1.0, vec![0, 4]), (-1.0, vec![1, 1])],
        )
        .unwrap();
        assert_eq!(p.degree(), 4);
        let g = p.gradient(&[1.0, 2.0]);
        assert!((g[0] - (4.0 - 2.0)).abs() < 1e-12);
        assert!((g[1] - (32.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn relativistic_block_mismatch() {
        let h = Dispersion::Relativistic {
            masses: vec![1.0],
            block_dim: 3,
        };
        assert!(h.validate(2).is_err());
    }
}
