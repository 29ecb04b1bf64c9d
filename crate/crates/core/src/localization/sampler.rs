use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::hamiltonian::{Hamiltonian, HamiltonianLike};
use super::tau_alpha_term;
use crate::error::{Error, Result};
use crate::geometry::{Direction, Subspace};
use crate::potentials::GeneratorImage;

/// Which terms contain `α`, and the constants the others collapse to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumSignature {
    pub containing: Vec<usize>,
    pub constants: Vec<(usize, f64)>,
}

impl StratumSignature {
    /// Hex SHA-256 of the signature's exact bit pattern.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        for i in &self.containing {
            h.update(b"c");
            h.update((*i as u64).to_le_bytes());
        }
        for (i, c) in &self.constants {
            h.update(b"k");
            h.update((*i as u64).to_le_bytes());
            h.update(c.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Same containment pattern, ignoring the constants.
    pub fn same_stratum(&self, other: &StratumSignature) -> bool {
        self.containing == other.containing
    }
}

pub fn strata(h: &Hamiltonian, alpha: &Direction) -> Result<StratumSignature> {
    let mut containing = Vec::new();
    let mut constants = Vec::new();
    for (i, t) in h.terms().iter().enumerate() {
        match tau_alpha_term(t, alpha)? {
            GeneratorImage::Term(_) => containing.push(i),
            GeneratorImage::Constant(c) => constants.push((i, c)),
        }
    }
    Ok(StratumSignature {
        containing,
        constants,
    })
}

/// Proper nonzero subspaces closed under intersection, smallest first.
fn arrangement(h: &Hamiltonian) -> Vec<Subspace> {
    let d = h.space().dim();
    let mut subs: Vec<Subspace> = Vec::new();
    let push = |s: Subspace, subs: &mut Vec<Subspace>| {
        if s.dim() > 0 && s.dim() < d && !subs.iter().any(|t| t.same_as(&s)) {
            subs.push(s);
            true
        } else {
            false
        }
    };
    for t in h.terms() {
        push(t.subspace().clone(), &mut subs);
    }
    loop {
        let mut added = false;
        let n = subs.len();
        for i in 0..n {
            for j in i + 1..n {
                let s = subs[i].intersection(&subs[j]).expect("same ambient dimension");
                added |= push(s, &mut subs);
            }
        }
        if !added {
            break;
        }
    }
    // Stable sort keeps first-appearance order within a dimension.
    subs.sort_by_key(|s| s.dim());
    subs
}

/// A vector of `w` lying in no arrangement member that does not contain `w`.
fn generic_point(w: &Subspace, arr: &[Subspace]) -> DVector<f64> {
    let ambient = w.ambient_dim();
    for attempt in 0..64u32 {
        let mut x = DVector::zeros(ambient);
        for (i, b) in w.basis().iter().enumerate() {
            let c = ((i as f64 + 1.0) * (2f64.sqrt() + attempt as f64 * 0.318_309_886)).fract();
            x += b * (0.25 + c);
        }
        let dir = Direction::new(x.clone()).expect("nonzero combination");
        let ok = arr.iter().all(|z| {
            let contains = z.contains_direction(&dir).expect("dimensions match");
            contains == w.is_subset_of(z)
        });
        if ok {
            return dir.vector().clone();
        }
    }
    unreachable!("a finite arrangement cannot cover every tried combination")
}

/// Quasi-uniform points on `S^{k-1}`, at most `count` of them.
fn sphere_mesh(k: usize, count: usize) -> Vec<Vec<f64>> {
    if count == 0 {
        return Vec::new();
    }
    match k {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|j| {
                    let z = 1.0 - (2.0 * j as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * j as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let q = ((count as f64).powf(1.0 / (k - 1) as f64).floor() as usize).max(1);
            let total = q.pow((k - 1) as u32);
            (0..total)
                .map(|flat| {
                    let mut idx = flat;
                    let mut angles = Vec::with_capacity(k - 1);
                    for a in 0..k - 1 {
                        let j = idx % q;
                        idx /= q;
                        angles.push(if a + 1 < k - 1 {
                            (j as f64 + 0.5) * PI / q as f64
                        } else {
                            2.0 * PI * j as f64 / q as f64
                        });
                    }
                    let mut x = vec![0.0; k];
                    let mut s = 1.0;
                    for a in 0..k - 1 {
                        x[a] = s * angles[a].cos();
                        s *= angles[a].sin();
                    }
                    x[k - 1] = s;
                    x
                })
                .collect()
        }
    }
}

/// Deterministic directions for sampling `inf_α c_α`.
///
/// First come the stratum representatives: `±b` for every line of the
/// intersection-closed arrangement, `±g` for a generic `g` of every larger
/// member. The rest of the budget is split evenly between a mesh of the
/// whole sphere and meshes of the spheres of the members of dimension at
/// least two, since an ambient mesh almost never lands exactly in a proper
/// subspace. If no mesh point lies off every member, a generic direction of
/// the whole space is added.
pub fn direction_sampler(h: &Hamiltonian, budget: usize) -> Result<Vec<Direction>> {
    let d = h.space().dim();
    if d == 1 {
        return Ok(vec![
            Direction::from_slice(&[1.0])?,
            Direction::from_slice(&[-1.0])?,
        ]);
    }
    let arr = arrangement(h);
    let mut reps: Vec<DVector<f64>> = Vec::new();
    for w in &arr {
        let g = if w.dim() == 1 {
            w.basis()[0].clone()
        } else {
            generic_point(w, &arr)
        };
        reps.push(g.clone());
        reps.push(-g);
    }
    // One more slot for the open stratum, lying in no proper member.
    let required = reps.len() + 1;
    if budget < required {
        return Err(Error::InsufficientBudget { required, budget });
    }

    let sub: Vec<&Subspace> = arr.iter().filter(|w| w.dim() >= 2).collect();
    let remaining = budget - required + 1;
    let share = remaining / (sub.len() + 1);
    let ambient = remaining - share * sub.len();

    let mut out: Vec<DVector<f64>> = reps;
    out.extend(sphere_mesh(d, ambient).into_iter().map(DVector::from_vec));
    for w in sub {
        for c in sphere_mesh(w.dim(), share) {
            let mut x = DVector::zeros(d);
            for (ci, b) in c.iter().zip(w.basis()) {
                x += b * *ci;
            }
            out.push(x);
        }
    }

    let open = |x: &DVector<f64>| {
        let dir = Direction::new(x.clone()).expect("mesh points are nonzero");
        arr.iter().all(|w| !w.contains_direction(&dir).expect("dimensions match"))
    };
    if !out.iter().any(|x| open(x)) {
        out.push(generic_point(&Subspace::full(d), &arr));
    }

    let mut dirs: Vec<Direction> = Vec::with_capacity(out.len());
    for x in out {
        let dir = Direction::new(x)?;
        let dup = dirs
            .iter()
            .any(|e| (e.vector() - dir.vector()).amax() < crate::geometry::MEMBERSHIP_TOL);
        if !dup {
            dirs.push(dir);
        }
    }
    Ok(dirs)
}
