use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator::{inner, norm, random_vector, DiscretizedOperator, LinearOperator};
use crate::error::{Error, Result};

/// Vectors at least this long are processed in parallel, in fixed chunks so
/// that reductions do not depend on the thread count.
const PAR_CHUNK: usize = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanczosOptions {
    pub tol: f64,
    /// Budget of operator applications.
    pub max_iter: usize,
    pub seed: u64,
    pub basis_size: usize,
    /// Ritz vectors kept at a restart.
    pub keep: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
            seed: 0,
            basis_size: 64,
            keep: 20,
        }
    }
}

impl LanczosOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if self.basis_size < 2 || self.keep == 0 || self.keep >= self.basis_size {
            return Err(Error::InvalidInput(format!(
                "need 0 < keep < basis_size and basis_size ≥ 2, got keep {} and basis_size {}",
                self.keep, self.basis_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    pub residual: f64,
    /// Operator applications used.
    pub iterations: usize,
}

/// `c_i = ⟨v_i, w⟩`.
fn project(basis: &[Vec<Complex64>], w: &[Complex64]) -> Vec<Complex64> {
    let k = basis.len();
    if w.len() < 2 * PAR_CHUNK {
        return basis.iter().map(|v| inner(v, w)).collect();
    }
    let partial: Vec<Vec<Complex64>> = w
        .par_chunks(PAR_CHUNK)
        .enumerate()
        .map(|(ci, wc)| {
            let off = ci * PAR_CHUNK;
            basis
                .iter()
                .map(|v| inner(&v[off..off + wc.len()], wc))
                .collect()
        })
        .collect();
    let mut c = vec![Complex64::default(); k];
    for p in partial {
        for (a, b) in c.iter_mut().zip(p) {
            *a += b;
        }
    }
    c
}

/// `w ← w − Σ c_i v_i`.
fn subtract(basis: &[Vec<Complex64>], c: &[Complex64], w: &mut [Complex64]) {
    let body = |off: usize, wc: &mut [Complex64]| {
        let len = wc.len();
        for (v, ci) in basis.iter().zip(c) {
            for (x, y) in wc.iter_mut().zip(&v[off..off + len]) {
                *x -= ci * y;
            }
        }
    };
    if w.len() < 2 * PAR_CHUNK {
        body(0, w);
    } else {
        w.par_chunks_mut(PAR_CHUNK)
            .enumerate()
            .for_each(|(ci, wc)| body(ci * PAR_CHUNK, wc));
    }
}

/// `Σ y_i v_i`.
fn combine(basis: &[Vec<Complex64>], y: &[Complex64]) -> Vec<Complex64> {
    let n = basis[0].len();
    let mut out = vec![Complex64::default(); n];
    let neg: Vec<Complex64> = y.iter().map(|z| -z).collect();
    subtract(&basis[..y.len()], &neg, &mut out);
    out
}

/// Eigen-decomposition of the Hermitian part of the leading `size × size`
/// block, eigenvalues ascending.
fn ritz(h: &DMatrix<Complex64>, size: usize) -> (Vec<f64>, DMatrix<Complex64>) {
    let herm = faer::Mat::<Complex64>::from_fn(size, size, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let eig = herm
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver converges on finite input");
    let (s, u) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let vals = order.iter().map(|&i| s[i].re).collect();
    let vecs = DMatrix::from_fn(size, size, |r, c| u[(r, order[c])]);
    (vals, vecs)
}

/// Smallest eigenvalue of a self-adjoint operator by thick-restart Lanczos
/// with full reorthogonalization.
///
/// Convergence is declared only after the explicit residual
/// `‖Ax − λx‖ ≤ tol·(1 + |λ|)` of the normalized Ritz vector is confirmed.
pub fn lanczos_smallest<A: LinearOperator + ?Sized>(
    a: &A,
    opts: &LanczosOptions,
) -> Result<GroundState> {
    opts.validate()?;
    let n = a.len();
    let m = opts.basis_size.min(n);
    let keep = opts.keep.min(m.saturating_sub(1)).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis = vec![random_vector(&mut rng, n)];
    let mut h = DMatrix::<Complex64>::zeros(m + 1, m + 1);
    let mut w = vec![Complex64::default(); n];
    let mut ax = vec![Complex64::default(); n];
    let mut matvecs = 0usize;
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut scale = 0.0f64;

    loop {
        let j = basis.len() - 1;
        a.apply(&basis[j], &mut w);
        matvecs += 1;
        let before = norm(&w);
        scale = scale.max(before);
        let mut c = project(&basis, &w);
        subtract(&basis, &c, &mut w);
        let mut beta = norm(&w);
        if beta < std::f64::consts::FRAC_1_SQRT_2 * before {
            let c2 = project(&basis, &w);
            subtract(&basis, &c2, &mut w);
            c.iter_mut().zip(c2).for_each(|(x, y)| *x += y);
            beta = norm(&w);
        }
        for (i, ci) in c.iter().enumerate() {
            h[(i, j)] = *ci;
        }

        let size = j + 1;
        let (vals, vecs) = ritz(&h, size);
        let theta = vals[0];
        let y: Vec<Complex64> = vecs.column(0).iter().copied().collect();
        let est = beta * y[j].norm();
        if est < best.1 {
            best = (theta, est);
        }
        let breakdown = beta <= 1e-14 * scale.max(f64::MIN_POSITIVE);
        if est <= opts.tol * (1.0 + theta.abs()) || breakdown {
            let mut x = combine(&basis, &y);
            let nx = norm(&x);
            x.iter_mut().for_each(|z| *z /= nx);
            a.apply(&x, &mut ax);
            matvecs += 1;
            let rq = inner(&x, &ax).re;
            let r = ax
                .iter()
                .zip(&x)
                .map(|(p, q)| (p - q * rq).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if r <= opts.tol * (1.0 + rq.abs()) {
                return Ok(GroundState {
                    energy: rq,
                    residual: r,
                    iterations: matvecs,
                });
            }
            if r < best.1 {
                best = (rq, r);
            }
        }
        if matvecs >= opts.max_iter || (breakdown && basis.len() >= n) {
            return Err(Error::ConvergenceFailure {
                energy: best.0,
                residual: best.1,
                iterations: matvecs,
            });
        }

        if breakdown {
            // Invariant subspace found: continue from a fresh orthogonal direction.
            w = random_vector(&mut rng, n);
            for _ in 0..2 {
                let c = project(&basis, &w);
                subtract(&basis, &c, &mut w);
            }
            let nw = norm(&w);
            w.iter_mut().for_each(|z| *z /= nw);
            h[(j + 1, j)] = Complex64::default();
        } else {
            w.iter_mut().for_each(|z| *z /= beta);
            h[(j + 1, j)] = Complex64::new(beta, 0.0);
        }
        basis.push(w.clone());

        if basis.len() == m + 1 {
            let (vals, vecs) = ritz(&h, m);
            let coupling = h[(m, m - 1)];
            let last = basis.pop().expect("basis holds m + 1 vectors");
            let mut next: Vec<Vec<Complex64>> = (0..keep)
                .map(|i| {
                    let yi: Vec<Complex64> = vecs.column(i).iter().copied().collect();
                    combine(&basis, &yi)
                })
                .collect();
            next.push(last);
            basis = next;
            h.fill(Complex64::default());
            for i in 0..keep {
                h[(i, i)] = Complex64::new(vals[i], 0.0);
                let s = coupling * vecs[(m - 1, i)];
                h[(keep, i)] = s;
                h[(i, keep)] = s.conj();
            }
        }
    }
}

/// Ground energy of a discretized operator. A constant potential makes the
/// operator diagonal in the Fourier basis, and the minimum is read off exactly.
pub fn ground_energy(op: &DiscretizedOperator, opts: &LanczosOptions) -> Result<GroundState> {
    opts.validate()?;
    if let Some(v0) = op.constant_potential() {
        let min = op.multiplier().iter().fold(f64::INFINITY, |m, v| m.min(*v));
        return Ok(GroundState {
            energy: min + v0,
            residual: 0.0,
            iterations: 0,
        });
    }
    lanczos_smallest(op, opts)
}
