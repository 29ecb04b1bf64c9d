use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{Grid, GridFft};
use crate::error::{Error, Result};
use crate::localization::HamiltonianLike;
use crate::potentials::RadialLimitFunction;

/// A bounded-or-not linear map on grid functions, applied matrix-free.
pub trait LinearOperator: Sync {
    fn len(&self) -> usize;
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]);
    fn apply_adjoint(&self, x: &[Complex64], out: &mut [Complex64]);
}

/// An operator acting on functions of a fixed grid.
pub trait GridOperator: LinearOperator {
    fn grid(&self) -> &Grid;
    fn fft(&self) -> &GridFft;
}

/// `h(P) + offset + V(Q)` on a periodic grid.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    grid: Grid,
    fft: Arc<GridFft>,
    multiplier: Vec<f64>,
    potential: Vec<f64>,
}

impl DiscretizedOperator {
    /// Multiplier values in FFT order.
    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// If `V` is constant the operator is diagonal in the Fourier basis.
    pub fn constant_potential(&self) -> Option<f64> {
        let v0 = self.potential[0];
        self.potential.iter().all(|v| *v == v0).then_some(v0)
    }

    pub fn sup_potential(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl LinearOperator for DiscretizedOperator {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.fft.apply_multiplier(&self.multiplier, x, out);
        for ((o, xi), v) in out.iter_mut().zip(x).zip(&self.potential) {
            *o += xi * *v;
        }
    }

    fn apply_adjoint(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.apply(x, out);
    }
}

impl GridOperator for DiscretizedOperator {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn fft(&self) -> &GridFft {
        &self.fft
    }
}

pub fn discretize<H: HamiltonianLike + ?Sized>(h: &H, grid: &Grid) -> Result<DiscretizedOperator> {
    discretize_with(h, grid, Arc::new(GridFft::new(*grid)))
}

/// As [`discretize`], reusing an FFT plan for the same grid.
pub fn discretize_with<H: HamiltonianLike + ?Sized>(
    h: &H,
    grid: &Grid,
    fft: Arc<GridFft>,
) -> Result<DiscretizedOperator> {
    if h.space().dim() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: h.space().dim(),
            got: grid.dim,
        });
    }
    assert_eq!(fft.grid(), grid, "FFT plan built for a different grid");
    let offset = h.offset();
    let mut multiplier = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let k = grid.momentum(i);
        let v = h.dispersion().eval(&k) + offset;
        if !v.is_finite() {
            return Err(Error::InvalidDispersion(format!(
                "dispersion is not finite at momentum {k:?}"
            )));
        }
        multiplier.push(v);
    }
    let mut potential = vec![0.0; grid.len()];
    if !h.terms().is_empty() {
        for (i, p) in potential.iter_mut().enumerate() {
            let x = grid.position(i);
            *p = h.terms().iter().map(|t| t.eval_slice(&x)).sum();
        }
    }
    Ok(DiscretizedOperator {
        grid: *grid,
        fft,
        multiplier,
        potential,
    })
}

/// `φ(Q) ψ(P)` for real `φ`, `ψ`.
#[derive(Debug, Clone)]
pub struct QPProduct {
    grid: Grid,
    fft: Arc<GridFft>,
    position: Vec<f64>,
    momentum: Vec<f64>,
}

impl QPProduct {
    pub fn new(
        grid: &Grid,
        phi: impl Fn(&[f64]) -> f64,
        psi: impl Fn(&[f64]) -> f64,
    ) -> Self {
        Self {
            grid: *grid,
            fft: Arc::new(GridFft::new(*grid)),
            position: (0..grid.len()).map(|i| phi(&grid.position(i))).collect(),
            momentum: (0..grid.len()).map(|i| psi(&grid.momentum(i))).collect(),
        }
    }

    pub fn from_function(
        grid: &Grid,
        phi: &RadialLimitFunction,
        psi: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        phi.validate(grid.dim)?;
        Ok(Self::new(grid, |x| phi.eval(x), psi))
    }

    pub fn position_values(&self) -> &[f64] {
        &self.position
    }

    pub fn momentum_values(&self) -> &[f64] {
        &self.momentum
    }
}

impl LinearOperator for QPProduct {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.fft.apply_multiplier(&self.momentum, x, out);
        for (o, p) in out.iter_mut().zip(&self.position) {
            *o *= *p;
        }
    }

    fn apply_adjoint(&self, x: &[Complex64], out: &mut [Complex64]) {
        let tmp: Vec<Complex64> = x.iter().zip(&self.position).map(|(z, p)| z * *p).collect();
        self.fft.apply_multiplier(&self.momentum, &tmp, out);
    }
}

impl GridOperator for QPProduct {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn fft(&self) -> &GridFft {
        &self.fft
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let s = norm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    v
}

/// Seeded complex vector with unit norm.
pub fn seeded_vector(seed: u64, n: usize) -> Vec<Complex64> {
    random_vector(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

/// Power iteration on `C*C`, returning the estimate of `‖C‖`.
pub fn operator_norm_estimate(
    n: usize,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    apply_adjoint: impl Fn(&[Complex64]) -> Vec<Complex64>,
    iterations: usize,
    seed: u64,
) -> f64 {
    let mut v = seeded_vector(seed, n);
    let mut est = 0.0;
    for _ in 0..iterations {
        let cv = apply(&v);
        est = norm(&cv);
        let w = apply_adjoint(&cv);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|z| z / nw).collect();
    }
    est.max(norm(&apply(&v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Space, Subspace};
    use crate::localization::{Dispersion, Hamiltonian};
    use crate::potentials::PotentialTerm;

    fn well_1d(depth: f64) -> Hamiltonian {
        Hamiltonian::new(
            Space::new(1).unwrap(),
            Dispersion::Quadratic,
            vec![PotentialTerm::new(
                Subspace::full(1),
                RadialLimitFunction::GaussianWell { depth, width: 1.0 },
            )
            .unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn free_operator_has_zero_potential() {
        let h = Hamiltonian::free(Space::new(2).unwrap(), Dispersion::Quadratic).unwrap();
        let g = Grid::new(2, 5.0, 16).unwrap();
        let op = discretize(&h, &g).unwrap();
        assert!(op.potential().iter().all(|v| *v == 0.0));
        let (imin, min) = op
            .multiplier()
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |a, (i, v)| if *v < a.1 { (i, *v) } else { a });
        assert_eq!(min, 0.0);
        assert_eq!(imin, 0);
    }

    #[test]
    fn dimension_mismatch() {
        let g = Grid::new(2, 5.0, 16).unwrap();
        assert!(discretize(&well_1d(-1.0), &g).is_err());
    }

    #[test]
    fn self_adjoint_on_random_pairs() {
        let g = Grid::new(1, 16.0, 256).unwrap();
        let op = discretize(&well_1d(-1.0), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut a = vec![Complex64::default(); g.len()];
        let mut b = vec![Complex64::default(); g.len()];
        for _ in 0..20 {
            let x = random_vector(&mut rng, g.len());
            let y = random_vector(&mut rng, g.len());
            op.apply(&x, &mut a);
            op.apply(&y, &mut b);
            assert!((inner(&a, &y) - inner(&x, &b)).norm() < 1e-10);
        }
    }

    #[test]
    fn qp_adjoint_is_consistent() {
        let g = Grid::new(1, 8.0, 64).unwrap();
        let a = QPProduct::new(&g, |x| (x[0] * 0.3).tanh(), |k| 1.0 / (1.0 + k[0] * k[0]));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_vector(&mut rng, g.len());
        let y = random_vector(&mut rng, g.len());
        let mut ax = vec![Complex64::default(); g.len()];
        let mut ay = vec![Complex64::default(); g.len()];
        a.apply(&x, &mut ax);
        a.apply_adjoint(&y, &mut ay);
        assert!((inner(&ax, &y) - inner(&x, &ay)).norm() < 1e-12);
    }

    #[test]
    fn norm_estimate_of_diagonal() {
        let d = [0.5, -3.0, 2.0, 1.0];
        let f = |x: &[Complex64]| x.iter().zip(&d).map(|(z, s)| z * *s).collect::<Vec<_>>();
        let est = operator_norm_estimate(4, f, f, 50, 1);
        assert!((est - 3.0).abs() < 1e-6);
    }
}
