//! Euclidean realization of `X = ℝ^d`, its subspaces and quotients.
//!
//! A quotient `X/Y` is realized on the orthogonal complement `Y⊥`, with a
//! fixed orthonormal basis produced by Gram–Schmidt on the standard basis in
//! index order. Coordinates in that basis are what every other module calls
//! "quotient coordinates".

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Tolerance for subspace membership and orthonormality checks.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Relative residual below which a spanning vector counts as dependent.
pub const DEPENDENCE_TOL: f64 = 1e-10;

/// The ambient space `ℝ^d` with the standard inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Space {
    dim: usize,
}

impl Space {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("space dimension must be at least 1".into()));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn check_finite(v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("vector has non-finite entries".into()))
    }
}

/// Subtract the projection onto `basis` twice (classical Gram–Schmidt with
/// one reorthogonalization pass).
fn orthogonalize_against(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
}

/// A linear subspace `Y ⊂ ℝ^d` with an orthonormal basis and a cached
/// orthonormal basis of `Y⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<DVector<f64>>,
    complement: Vec<DVector<f64>>,
}

/// Orthonormalize `vectors` (stabilized Gram–Schmidt) into the subspace they span.
pub fn orthonormalize(ambient_dim: usize, vectors: &[DVector<f64>]) -> Result<Subspace> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        if v.len() != ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                got: v.len(),
            });
        }
        check_finite(v)?;
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        orthogonalize_against(&mut w, &basis);
        let r = w.norm();
        if r < DEPENDENCE_TOL * scale {
            continue;
        }
        basis.push(w / r);
    }
    Ok(Subspace::from_orthonormal(ambient_dim, basis))
}

impl Subspace {
    /// Build from an already orthonormal basis and compute the complement.
    fn from_orthonormal(ambient_dim: usize, basis: Vec<DVector<f64>>) -> Self {
        let target = ambient_dim - basis.len();
        let mut complement: Vec<DVector<f64>> = Vec::with_capacity(target);
        let mut all = basis.clone();
        for i in 0..ambient_dim {
            if complement.len() == target {
                break;
            }
            let mut e = DVector::zeros(ambient_dim);
            e[i] = 1.0;
            orthogonalize_against(&mut e, &all);
            let r = e.norm();
            if r > 1e-8 {
                let w = e / r;
                all.push(w.clone());
                complement.push(w);
            }
        }
        Self {
            ambient_dim,
            basis,
            complement,
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self::from_orthonormal(ambient_dim, Vec::new())
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut e = DVector::zeros(ambient_dim);
                e[i] = 1.0;
                e
            })
            .collect();
        Self::from_orthonormal(ambient_dim, basis)
    }

    /// Subspace spanned by `vectors` given as plain slices.
    pub fn span(ambient_dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let vs: Vec<DVector<f64>> = vectors
            .iter()
            .map(|v| DVector::from_column_slice(v))
            .collect();
        orthonormalize(ambient_dim, &vs)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Dimension of the realized quotient `X/Y ≅ Y⊥`.
    pub fn quotient_dim(&self) -> usize {
        self.complement.len()
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    pub fn complement_basis(&self) -> &[DVector<f64>] {
        &self.complement
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: len,
            });
        }
        Ok(())
    }

    /// Orthogonal projection of `x` onto `Y`, in ambient coordinates.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        let mut p = DVector::zeros(self.ambient_dim);
        for b in &self.basis {
            p.axpy(b.dot(x), b, 1.0);
        }
        Ok(p)
    }

    /// `π_Y(x)` in coordinates of the cached `Y⊥` basis.
    pub fn project_quotient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        Ok(self.project_quotient_unchecked(x.as_slice()))
    }

    /// Hot-path variant of [`Subspace::project_quotient`] for grid evaluation.
    pub(crate) fn project_quotient_unchecked(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.complement.len(),
            self.complement
                .iter()
                .map(|w| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()),
        )
    }

    /// Canonical isometric section `X/Y → Y⊥ ⊂ X`.
    pub fn lift_quotient(&self, coords: &DVector<f64>) -> Result<DVector<f64>> {
        if coords.len() != self.quotient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.quotient_dim(),
                got: coords.len(),
            });
        }
        let mut x = DVector::zeros(self.ambient_dim);
        for (w, c) in self.complement.iter().zip(coords.iter()) {
            x.axpy(*c, w, 1.0);
        }
        Ok(x)
    }

    /// Distance from `x` to `Y`.
    pub fn residual(&self, x: &DVector<f64>) -> Result<f64> {
        let p = self.project(x)?;
        Ok((x - p).norm())
    }

    /// Whether the half-line `α` lies in `Y` (strict threshold on the residual).
    pub fn contains_direction(&self, alpha: &Direction) -> Result<bool> {
        Ok(self.residual(alpha.vector())? < MEMBERSHIP_TOL)
    }

    /// `π_Y(α)` as a direction of the realized quotient.
    pub fn quotient_direction(&self, alpha: &Direction) -> Result<Direction> {
        if self.contains_direction(alpha)? {
            return Err(Error::UndefinedQuotientDirection);
        }
        Direction::new(self.project_quotient(alpha.vector())?)
    }

    /// `Y ∩ Z`, computed as the complement of `Y⊥ + Z⊥`.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        self.check_dim(other.ambient_dim)?;
        let mut perp: Vec<DVector<f64>> = self.complement.clone();
        perp.extend(other.complement.iter().cloned());
        let sum = orthonormalize(self.ambient_dim, &perp)?;
        Ok(Subspace::from_orthonormal(
            self.ambient_dim,
            sum.complement.clone(),
        ))
    }

    /// Set equality of subspaces, up to the membership tolerance.
    pub fn same_as(&self, other: &Subspace) -> bool {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return false;
        }
        self.basis
            .iter()
            .all(|b| other.residual(b).map(|r| r < 1e-10).unwrap_or(false))
    }

    /// Whether `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Subspace) -> bool {
        self.ambient_dim == other.ambient_dim
            && self
                .basis
                .iter()
                .all(|b| other.residual(b).map(|r| r < 1e-10).unwrap_or(false))
    }
}

/// A point `â = ℝ₊a` of the sphere at infinity, stored as a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    vector: DVector<f64>,
}

impl Direction {
    /// Normalizes `v`; the zero vector has no direction.
    pub fn new(v: DVector<f64>) -> Result<Self> {
        check_finite(&v)?;
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidInput("the zero vector has no direction".into()));
        }
        Ok(Self { vector: v / n })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn angle_2d(&self) -> Option<f64> {
        (self.dim() == 2).then(|| self.vector[1].atan2(self.vector[0]))
    }
}

/// A chain `(α₁, …, α_n)` with each `α_{i+1}` in the orthogonal complement of
/// `[α₁, …, α_i]`. Directions are stored as ambient unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionChain {
    ambient_dim: usize,
    directions: Vec<Direction>,
    subspace: Subspace,
}

impl DirectionChain {
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            directions: Vec::new(),
            subspace: Subspace::zero(ambient_dim),
        }
    }

    /// Chain from ambient directions, which must be pairwise orthogonal.
    pub fn new(ambient_dim: usize, directions: Vec<Direction>) -> Result<Self> {
        let mut chain = Self::empty(ambient_dim);
        for d in directions {
            chain.push(d)?;
        }
        Ok(chain)
    }

    /// Append a direction given in ambient coordinates.
    pub fn push(&mut self, alpha: Direction) -> Result<()> {
        if alpha.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: alpha.dim(),
            });
        }
        for prev in &self.directions {
            let c = prev.vector().dot(alpha.vector());
            if c.abs() >= MEMBERSHIP_TOL {
                return Err(Error::InvalidInput(format!(
                    "chain direction is not orthogonal to earlier ones (inner product {c:e})"
                )));
            }
        }
        self.directions.push(alpha);
        self.subspace = chain_subspace_of(self.ambient_dim, &self.directions);
        Ok(())
    }

    /// Append a direction of `X/[α₁,…,α_n]` given in quotient coordinates.
    pub fn push_quotient(&mut self, coords: &DVector<f64>) -> Result<()> {
        let lifted = self.subspace.lift_quotient(coords)?;
        let alpha = Direction::new(lifted)?;
        self.directions.push(alpha);
        self.subspace = chain_subspace_of(self.ambient_dim, &self.directions);
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// `[α₁, …, α_n]`.
    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }
}

fn chain_subspace_of(ambient_dim: usize, dirs: &[Direction]) -> Subspace {
    let vs: Vec<DVector<f64>> = dirs.iter().map(|d| d.vector().clone()).collect();
    // Directions are orthonormal, nothing is dropped.
    orthonormalize(ambient_dim, &vs).expect("chain directions are finite and of matching size")
}

/// `[α₁, …, α_n]` for a chain.
pub fn chain_subspace(chain: &DirectionChain) -> Subspace {
    chain.subspace().clone()
}
