//! Run configuration: a TOML file, validated before any computation.

use std::fs;
use std::path::{Path, PathBuf};

use hvz_core::geometry::{Direction, DirectionChain, Space, Subspace};
use hvz_core::localization::{Character, Dispersion, Hamiltonian, PolynomialSymbol};
use hvz_core::potentials::{
    AlgebraElement, Monomial, PotentialTerm, RadialLimitFunction, SphereProfile, SphereTable,
};
use hvz_core::spectral::{EdgeOptions, Grid, LanczosOptions};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub space: SpaceSpec,
    pub dispersion: DispersionSpec,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
    pub grid: GridSpec,
    #[serde(default)]
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localize: Option<LocalizeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub character: Option<CharacterSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DispersionSpec {
    Quadratic,
    Relativistic { masses: Vec<f64>, block_dim: usize },
    Polynomial { terms: Vec<PolynomialTermSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialTermSpec {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default)]
    pub subspace: SubspaceSpec,
    pub function: FunctionSpec,
}

/// `Y` for a term. `zero` makes the function depend on all of `x`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubspaceSpec {
    #[default]
    Zero,
    Full,
    Span { vectors: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    GaussianWell {
        depth: f64,
        width: f64,
    },
    CompactBump {
        center: Vec<f64>,
        radius: f64,
        amplitude: f64,
    },
    SmoothStep {
        direction: Vec<f64>,
        low: f64,
        high: f64,
        scale: f64,
    },
    AngularProfile {
        profile: ProfileSpec,
        cutoff_radius: f64,
    },
    Sum {
        parts: Vec<FunctionSpec>,
    },
    Scale {
        factor: f64,
        inner: Box<FunctionSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Affine {
        constant: f64,
        linear: Vec<f64>,
    },
    Fourier {
        constant: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// Inline samples `{ point, value }` on the quotient sphere.
    Table {
        samples: Vec<TableSample>,
    },
    /// Rows of direction components and a value, path relative to the config file.
    TableFile {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSample {
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_length: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub budget: usize,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self { budget: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSpec {
    /// Relative residual at which a Lanczos solve counts as converged.
    pub lanczos: f64,
    pub max_iter: usize,
    pub basis_size: usize,
    pub keep: usize,
    /// Allowed `|inf c_α − E*|` in `verify-hvz`.
    pub hvz_gap: f64,
    /// Allowed change of `c_α` when the grid is refined.
    pub refinement: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        let l = LanczosOptions::default();
        Self {
            lanczos: l.tol,
            max_iter: l.max_iter,
            basis_size: l.basis_size,
            keep: l.keep,
            hvz_gap: 0.05,
            refinement: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Boxes for the counting-function oracle; the base box defaults to `[grid]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    pub box_factors: Vec<usize>,
    #[serde(default = "default_energy_step")]
    pub energy_step: f64,
    #[serde(default = "default_growth")]
    pub growth_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_max: Option<f64>,
}

fn default_energy_step() -> f64 {
    EdgeOptions::default().energy_step
}

fn default_growth() -> f64 {
    EdgeOptions::default().growth_threshold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizeSpec {
    pub direction: Vec<f64>,
}

/// `κ(u)` with `u = Σ coeff · Π terms[factors]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterSpec {
    /// Chain directions in ambient coordinates, pairwise orthogonal.
    #[serde(default)]
    pub chain: Vec<Vec<f64>>,
    pub point: Vec<f64>,
    pub element: Vec<MonomialSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub coeff: f64,
    #[serde(default)]
    pub factors: Vec<usize>,
}

/// A parsed config and the directory relative paths resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let config = Self::parse(&text)
            .map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig { config, base_dir })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config types serialize to TOML")
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.space.dim, self.grid.half_length, self.grid.points).map_err(field("grid"))
    }

    pub fn lanczos(&self) -> Result<LanczosOptions, ConfigError> {
        let t = &self.tolerances;
        let opts = LanczosOptions {
            tol: t.lanczos,
            max_iter: t.max_iter,
            seed: self.seed,
            basis_size: t.basis_size,
            keep: t.keep,
        };
        opts.validate().map_err(field("tolerances"))?;
        Ok(opts)
    }

    pub fn edge(&self) -> Result<(Grid, Vec<usize>, EdgeOptions), ConfigError> {
        let e = self
            .edge
            .as_ref()
            .ok_or_else(|| ConfigError("missing section `edge` (needed by verify-hvz)".into()))?;
        let grid = Grid::new(
            self.space.dim,
            e.half_length.unwrap_or(self.grid.half_length),
            e.points.unwrap_or(self.grid.points),
        )
        .map_err(field("edge"))?;
        let opts = EdgeOptions {
            energy_step: e.energy_step,
            growth_threshold: e.growth_threshold,
            energy_max: e.energy_max,
        };
        Ok((grid, e.box_factors.clone(), opts))
    }
}

fn field(name: &str) -> impl Fn(hvz_core::Error) -> ConfigError + '_ {
    move |e| ConfigError(format!("{name}: {e}"))
}

impl LoadedConfig {
    pub fn hamiltonian(&self) -> Result<Hamiltonian, ConfigError> {
        let c = &self.config;
        let space = Space::new(c.space.dim).map_err(field("space"))?;
        let dispersion = build_dispersion(&c.dispersion, c.space.dim)?;
        let terms = self.potential_terms()?;
        Hamiltonian::new(space, dispersion, terms).map_err(field("terms"))
    }

    pub fn potential_terms(&self) -> Result<Vec<PotentialTerm>, ConfigError> {
        let d = self.config.space.dim;
        self.config
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let name = format!("terms[{i}]");
                let sub = build_subspace(&t.subspace, d).map_err(field(&name))?;
                let f = build_function(&t.function, sub.quotient_dim(), &self.base_dir)
                    .map_err(|e| ConfigError(format!("{name}: {}", e.0)))?;
                PotentialTerm::new(sub, f).map_err(field(&name))
            })
            .collect()
    }

    pub fn direction(&self, flag: Option<&[f64]>) -> Result<Direction, ConfigError> {
        let v = match (flag, &self.config.localize) {
            (Some(v), _) => v.to_vec(),
            (None, Some(l)) => l.direction.clone(),
            (None, None) => {
                return Err(ConfigError(
                    "no direction: pass --direction or add a `localize` section".into(),
                ))
            }
        };
        check_len("localize.direction", self.config.space.dim, v.len())?;
        Direction::from_slice(&v).map_err(field("localize.direction"))
    }

    /// The element, the character and the generator list its factors index into.
    pub fn character(&self) -> Result<(AlgebraElement, Character, Vec<PotentialTerm>), ConfigError> {
        let spec = self
            .config
            .character
            .as_ref()
            .ok_or_else(|| ConfigError("missing section `character`".into()))?;
        let d = self.config.space.dim;
        let terms = self.potential_terms()?;
        let mut monomials = Vec::new();
        for (i, m) in spec.element.iter().enumerate() {
            let mut factors = Vec::new();
            for &k in &m.factors {
                let t = terms.get(k).ok_or_else(|| {
                    ConfigError(format!(
                        "character.element[{i}]: factor {k} is not a term index (have {})",
                        terms.len()
                    ))
                })?;
                factors.push(t.clone());
            }
            monomials.push(Monomial {
                coeff: m.coeff,
                factors,
            });
        }
        let u = AlgebraElement::from_monomials(d, monomials).map_err(field("character.element"))?;
        let mut dirs = Vec::new();
        for (i, v) in spec.chain.iter().enumerate() {
            let name = format!("character.chain[{i}]");
            check_len(&name, d, v.len())?;
            dirs.push(Direction::from_slice(v).map_err(field(&name))?);
        }
        let chain = DirectionChain::new(d, dirs).map_err(field("character.chain"))?;
        let kappa = Character::new(chain, DVector::from_vec(spec.point.clone()))
            .map_err(field("character.point"))?;
        Ok((u, kappa, terms))
    }
}

fn check_len(name: &str, expected: usize, got: usize) -> Result<(), ConfigError> {
    if expected != got {
        return Err(ConfigError(format!(
            "{name}: expected {expected} components, got {got}"
        )));
    }
    Ok(())
}

fn build_dispersion(spec: &DispersionSpec, dim: usize) -> Result<Dispersion, ConfigError> {
    let d = match spec {
        DispersionSpec::Quadratic => Dispersion::Quadratic,
        DispersionSpec::Relativistic { masses, block_dim } => Dispersion::Relativistic {
            masses: masses.clone(),
            block_dim: *block_dim,
        },
        DispersionSpec::Polynomial { terms } => Dispersion::Polynomial(
            PolynomialSymbol::new(dim, terms.iter().map(|t| (t.coeff, t.powers.clone())).collect())
                .map_err(field("dispersion"))?,
        ),
    };
    d.validate(dim).map_err(field("dispersion"))?;
    Ok(d)
}

fn build_subspace(spec: &SubspaceSpec, dim: usize) -> hvz_core::Result<Subspace> {
    match spec {
        SubspaceSpec::Zero => Ok(Subspace::zero(dim)),
        SubspaceSpec::Full => Ok(Subspace::full(dim)),
        SubspaceSpec::Span { vectors } => Subspace::span(dim, vectors),
    }
}

fn build_function(spec: &FunctionSpec, m: usize, base: &Path) -> Result<RadialLimitFunction, ConfigError> {
    use RadialLimitFunction as F;
    Ok(match spec {
        FunctionSpec::Constant { value } => F::Constant(*value),
        FunctionSpec::GaussianWell { depth, width } => F::GaussianWell {
            depth: *depth,
            width: *width,
        },
        FunctionSpec::CompactBump {
            center,
            radius,
            amplitude,
        } => F::CompactBump {
            center: center.clone(),
            radius: *radius,
            amplitude: *amplitude,
        },
        FunctionSpec::SmoothStep {
            direction,
            low,
            high,
            scale,
        } => F::SmoothStep {
            direction: direction.clone(),
            low: *low,
            high: *high,
            scale: *scale,
        },
        FunctionSpec::AngularProfile {
            profile,
            cutoff_radius,
        } => F::AngularProfile {
            profile: build_profile(profile, m, base)?,
            cutoff_radius: *cutoff_radius,
        },
        FunctionSpec::Sum { parts } => F::Sum(
            parts
                .iter()
                .map(|p| build_function(p, m, base))
                .collect::<Result<_, _>>()?,
        ),
        FunctionSpec::Scale { factor, inner } => {
            F::Scale(*factor, Box::new(build_function(inner, m, base)?))
        }
    })
}

fn build_profile(spec: &ProfileSpec, m: usize, base: &Path) -> Result<SphereProfile, ConfigError> {
    let table_err = |e: hvz_core::Error| ConfigError(format!("profile table: {e}"));
    Ok(match spec {
        ProfileSpec::Affine { constant, linear } => SphereProfile::Affine {
            constant: *constant,
            linear: linear.clone(),
        },
        ProfileSpec::Fourier { constant, cos, sin } => SphereProfile::Fourier {
            constant: *constant,
            cos: cos.clone(),
            sin: sin.clone(),
        },
        ProfileSpec::Table { samples } => SphereProfile::Table(
            SphereTable::new(m, samples.iter().map(|s| (s.point.clone(), s.value)).collect())
                .map_err(table_err)?,
        ),
        ProfileSpec::TableFile { path } => {
            let p = base.join(path);
            let text = fs::read_to_string(&p)
                .map_err(|e| ConfigError(format!("cannot read table {}: {e}", p.display())))?;
            SphereProfile::Table(SphereTable::parse(m, &text).map_err(table_err)?)
        }
    })
}
