//! Functions on the unit sphere of a quotient, used by angular profiles.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// A continuous function `g` on the unit sphere `S^{m−1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereProfile {
    /// `g(ẑ) = constant + ⟨linear, ẑ⟩`.
    Affine { constant: f64, linear: Vec<f64> },
    /// Circle only: `g(θ) = constant + Σ_k cos[k−1]·cos kθ + sin[k−1]·sin kθ`.
    Fourier {
        constant: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    /// Piecewise-linear interpolation of sampled values.
    Table(SphereTable),
}

impl SphereProfile {
    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            SphereProfile::Affine { constant, linear } => {
                if linear.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: linear.len(),
                    });
                }
                if !constant.is_finite() || !linear.iter().all(|w| w.is_finite()) {
                    return Err(Error::InvalidInput("affine profile must be finite".into()));
                }
                Ok(())
            }
            SphereProfile::Fourier { constant, cos, sin } => {
                if m != 2 {
                    return Err(Error::InvalidInput(format!(
                        "Fourier profiles live on the circle, quotient has dimension {m}"
                    )));
                }
                if !constant.is_finite() || !cos.iter().chain(sin).all(|w| w.is_finite()) {
                    return Err(Error::InvalidInput("Fourier profile must be finite".into()));
                }
                Ok(())
            }
            SphereProfile::Table(t) => {
                if t.dim() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: t.dim(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Evaluate at a unit vector.
    pub fn eval(&self, zhat: &[f64]) -> f64 {
        match self {
            SphereProfile::Affine { constant, linear } => {
                constant + linear.iter().zip(zhat).map(|(a, b)| a * b).sum::<f64>()
            }
            SphereProfile::Fourier { constant, cos, sin } => {
                let th = zhat[1].atan2(zhat[0]);
                let mut g = *constant;
                for (k, a) in cos.iter().enumerate() {
                    g += a * (((k + 1) as f64) * th).cos();
                }
                for (k, b) in sin.iter().enumerate() {
                    g += b * (((k + 1) as f64) * th).sin();
                }
                g
            }
            SphereProfile::Table(t) => t.eval(zhat),
        }
    }

    pub fn sup_bound(&self) -> f64 {
        match self {
            SphereProfile::Affine { constant, linear } => {
                constant.abs() + linear.iter().map(|w| w * w).sum::<f64>().sqrt()
            }
            SphereProfile::Fourier { constant, cos, sin } => {
                let n = cos.len().max(sin.len());
                let mut s = constant.abs();
                for k in 0..n {
                    let a = cos.get(k).copied().unwrap_or(0.0);
                    let b = sin.get(k).copied().unwrap_or(0.0);
                    s += a.hypot(b);
                }
                s
            }
            SphereProfile::Table(t) => t.values().iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// Sampled values on `S^{m−1}` for `m ∈ {1, 2, 3}`.
///
/// `m = 1` is a lookup on `{+1, −1}`; `m = 2` interpolates linearly in angle;
/// `m = 3` triangulates the samples by their convex hull and interpolates
/// barycentrically along the ray.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereTable {
    dim: usize,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    kind: TableKind,
}

#[derive(Debug, Clone, PartialEq)]
enum TableKind {
    Signs { plus: f64, minus: f64 },
    // Sorted (angle, value) pairs.
    Circle(Vec<(f64, f64)>),
    // Triangles with the inverse of [a b c] for barycentric solves.
    Sphere(Vec<([usize; 3], Matrix3<f64>)>),
}

impl SphereTable {
    /// Build from `(direction, value)` samples; directions are normalized.
    pub fn new(dim: usize, samples: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let mut points = Vec::with_capacity(samples.len());
        let mut values = Vec::with_capacity(samples.len());
        for (p, v) in samples {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            let n = p.iter().map(|t| t * t).sum::<f64>().sqrt();
            if !(n > 0.0 && n.is_finite() && v.is_finite()) {
                return Err(Error::InvalidInput(
                    "table rows need a nonzero finite direction and a finite value".into(),
                ));
            }
            points.push(p.iter().map(|t| t / n).collect::<Vec<f64>>());
            values.push(v);
        }
        let kind = match dim {
            1 => {
                let find = |s: f64| {
                    points
                        .iter()
                        .zip(&values)
                        .find(|(p, _)| p[0] * s > 0.0)
                        .map(|(_, v)| *v)
                };
                match (find(1.0), find(-1.0)) {
                    (Some(plus), Some(minus)) => TableKind::Signs { plus, minus },
                    _ => {
                        return Err(Error::InvalidInput(
                            "a table on S⁰ needs values at both +1 and -1".into(),
                        ))
                    }
                }
            }
            2 => {
                if points.len() < 2 {
                    return Err(Error::InvalidInput(
                        "a circle table needs at least two samples".into(),
                    ));
                }
                let mut pairs: Vec<(f64, f64)> = points
                    .iter()
                    .zip(&values)
                    .map(|(p, v)| (p[1].atan2(p[0]), *v))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                if pairs.windows(2).any(|w| w[1].0 - w[0].0 < 1e-12) {
                    return Err(Error::InvalidInput("duplicate circle sample".into()));
                }
                TableKind::Circle(pairs)
            }
            3 => TableKind::Sphere(triangulate(&points)?),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "sample tables are supported on spheres of quotients of dimension 1-3, got {dim}"
                )))
            }
        };
        Ok(Self {
            dim,
            points,
            values,
            kind,
        })
    }

    /// Parse rows of `m` direction components followed by a value.
    /// Separators may be commas or whitespace; `#` starts a comment.
    pub fn parse(dim: usize, text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: std::result::Result<Vec<f64>, _> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(str::parse::<f64>)
                .collect();
            let nums = nums.map_err(|e| {
                Error::InvalidInput(format!("table line {}: {e}", lineno + 1))
            })?;
            if nums.len() != dim + 1 {
                return Err(Error::InvalidInput(format!(
                    "table line {}: expected {} numbers, found {}",
                    lineno + 1,
                    dim + 1,
                    nums.len()
                )));
            }
            samples.push((nums[..dim].to_vec(), nums[dim]));
        }
        Self::new(dim, samples)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, zhat: &[f64]) -> f64 {
        match &self.kind {
            TableKind::Signs { plus, minus } => {
                if zhat[0] >= 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            TableKind::Circle(pairs) => {
                let th = zhat[1].atan2(zhat[0]);
                let k = pairs.len();
                // First sample with angle > th, cyclically.
                let hi = pairs.partition_point(|p| p.0 <= th);
                let (a, b) = if hi == 0 || hi == k {
                    (pairs[k - 1], (pairs[0].0 + 2.0 * PI, pairs[0].1))
                } else {
                    (pairs[hi - 1], pairs[hi])
                };
                let mut t = th;
                if t < a.0 {
                    t += 2.0 * PI;
                }
                let w = (t - a.0) / (b.0 - a.0);
                a.1 + w * (b.1 - a.1)
            }
            TableKind::Sphere(tris) => {
                let z = Vector3::new(zhat[0], zhat[1], zhat[2]);
                let mut best: Option<(f64, f64)> = None;
                for (idx, inv) in tris {
                    let lam = inv * z;
                    let min = lam.min();
                    let s = lam.sum();
                    let val = (lam[0] * self.values[idx[0]]
                        + lam[1] * self.values[idx[1]]
                        + lam[2] * self.values[idx[2]])
                        / s;
                    if min >= -1e-12 && s > 0.0 {
                        return val;
                    }
                    // Fall back to the least-violating face on rounding trouble.
                    if s > 0.0 && best.map_or(true, |(m, _)| min > m) {
                        best = Some((min, val));
                    }
                }
                best.map(|b| b.1).unwrap_or(0.0)
            }
        }
    }
}

/// Triangulate unit vectors by their convex hull (incremental algorithm).
fn triangulate(points: &[Vec<f64>]) -> Result<Vec<([usize; 3], Matrix3<f64>)>> {
    let pts: Vec<Vector3<f64>> = points
        .iter()
        .map(|p| Vector3::new(p[0], p[1], p[2]))
        .collect();
    let faces = convex_hull(&pts)?;
    let mut out = Vec::with_capacity(faces.len());
    for f in faces {
        // Origin must be strictly inside, otherwise some rays miss the hull.
        if f.offset <= 1e-9 {
            return Err(Error::InvalidInput(
                "sphere samples do not surround the origin".into(),
            ));
        }
        let m = Matrix3::from_columns(&[pts[f.v[0]], pts[f.v[1]], pts[f.v[2]]]);
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("degenerate sphere triangle".into()))?;
        out.push((f.v, inv));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct Face {
    v: [usize; 3],
    normal: Vector3<f64>,
    offset: f64,
}

fn make_face(pts: &[Vector3<f64>], a: usize, b: usize, c: usize) -> Face {
    let n = (pts[b] - pts[a]).cross(&(pts[c] - pts[a]));
    let normal = n / n.norm();
    Face {
        v: [a, b, c],
        offset: normal.dot(&pts[a]),
        normal,
    }
}

fn oriented_face(pts: &[Vector3<f64>], a: usize, b: usize, c: usize, inside: &Vector3<f64>) -> Face {
    let f = make_face(pts, a, b, c);
    if f.normal.dot(inside) - f.offset > 0.0 {
        make_face(pts, a, c, b)
    } else {
        f
    }
}

fn convex_hull(pts: &[Vector3<f64>]) -> Result<Vec<Face>> {
    const EPS: f64 = 1e-12;
    let degenerate = || Error::InvalidInput("sphere samples are coplanar or too few".into());
    if pts.len() < 4 {
        return Err(degenerate());
    }
    let i0 = 0;
    let i1 = (1..pts.len())
        .max_by(|&a, &b| (pts[a] - pts[i0]).norm().total_cmp(&(pts[b] - pts[i0]).norm()))
        .ok_or_else(degenerate)?;
    let line = (pts[i1] - pts[i0]).normalize();
    let dist_line = |k: usize| {
        let w = pts[k] - pts[i0];
        (w - line * line.dot(&w)).norm()
    };
    let i2 = (0..pts.len())
        .max_by(|&a, &b| dist_line(a).total_cmp(&dist_line(b)))
        .ok_or_else(degenerate)?;
    if dist_line(i2) < 1e-9 {
        return Err(degenerate());
    }
    let plane = (pts[i1] - pts[i0]).cross(&(pts[i2] - pts[i0])).normalize();
    let dist_plane = |k: usize| plane.dot(&(pts[k] - pts[i0])).abs();
    let i3 = (0..pts.len())
        .max_by(|&a, &b| dist_plane(a).total_cmp(&dist_plane(b)))
        .ok_or_else(degenerate)?;
    if dist_plane(i3) < 1e-9 {
        return Err(degenerate());
    }
    let centroid = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
    let mut faces = vec![
        oriented_face(pts, i0, i1, i2, &centroid),
        oriented_face(pts, i0, i1, i3, &centroid),
        oriented_face(pts, i0, i2, i3, &centroid),
        oriented_face(pts, i1, i2, i3, &centroid),
    ];
    for k in 0..pts.len() {
        if [i0, i1, i2, i3].contains(&k) {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| f.normal.dot(&pts[k]) - f.offset > EPS)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for e in 0..3 {
                edges.push((f.v[e], f.v[(e + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| !edges.contains(&(*b, *a)))
            .copied()
            .collect();
        let mut kept: Vec<Face> = faces
            .into_iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| f)
            .collect();
        for (a, b) in horizon {
            kept.push(make_face(pts, a, b, k));
        }
        faces = kept;
    }
    Ok(faces)
}
