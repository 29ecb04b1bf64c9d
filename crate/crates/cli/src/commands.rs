use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hvz_core::localization::{localize, strata, tau_chain, HamiltonianLike};
use hvz_core::potentials::{AlgebraElement, PotentialTerm};
use hvz_core::selfcheck::{run_selfcheck, SelfcheckOptions};
use hvz_core::spectral::{brute_force_edge, essential_spectrum_bottom, refinement_check};
use serde::Serialize;

use crate::config::{LoadedConfig, RunConfig, TermSpec};
use crate::report::{RunReport, Verification};
use crate::{ConfigError, Failure, Outcome, EXIT_OK, EXIT_PARTIAL};

#[derive(Debug, Parser)]
#[command(name = "hvz", version, about = "Essential spectra of N-body type Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for the per-direction solves.
    #[arg(long, global = true, env = "HVZ_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, env = "HVZ_OUT_DIR")]
    pub out: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `sampler.budget`.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// inf over sampled directions of the localized ground energies.
    Spectrum(Common),
    /// Compare `spectrum` with the counting-function edge on growing boxes.
    VerifyHvz(Common),
    /// Print the localized Hamiltonian at one direction.
    Localize {
        #[command(flatten)]
        common: Common,
        /// Comma-separated components; overrides `localize.direction`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
    },
    /// Evaluate a character on an algebra element from the config.
    Character(Common),
    /// Run the built-in property suites.
    Selfcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Multiplies every suite tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Also write `selfcheck.json` here.
        #[arg(long, env = "HVZ_OUT_DIR")]
        out: Option<PathBuf>,
    },
}

/// Runs a parsed command line on a pool of `jobs` threads.
pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(ConfigError("--jobs must be positive".into()).into());
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| ConfigError(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Spectrum(c) => cmd_spectrum(c),
        Command::VerifyHvz(c) => cmd_verify_hvz(c),
        Command::Localize { common, direction } => cmd_localize(common, direction.as_deref()),
        Command::Character(c) => cmd_character(c),
        Command::Selfcheck {
            seed,
            tolerance_scale,
            out,
        } => cmd_selfcheck(*seed, *tolerance_scale, out.as_deref()),
    })
}

/// Loads the config and applies the command-line overrides.
pub fn load(common: &Common) -> Result<LoadedConfig, ConfigError> {
    let mut l = RunConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        l.config.seed = s;
    }
    if let Some(b) = common.budget {
        l.config.sampler.budget = b;
    }
    Ok(l)
}

fn out_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("hvz-out"))
}

fn write(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let p = dir.join(name);
    fs::write(&p, contents)?;
    files.push(p);
    Ok(())
}

pub fn cmd_spectrum(common: &Common) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let l = load(common)?;
    let cfg = &l.config;
    let h = l.hamiltonian()?;
    let grid = cfg.grid()?;
    let opts = cfg.lanczos()?;
    let spectral = essential_spectrum_bottom(&h, &grid, cfg.sampler.budget, &opts)?;

    let code = if spectral.incomplete { EXIT_PARTIAL } else { EXIT_OK };
    let mut files = Vec::new();
    let dir = out_dir(common, cfg);
    write(&dir, "spectrum.csv", &spectral.to_csv(), &mut files)?;
    if let Some(a) = spectral.angle_csv() {
        write(&dir, "angles.csv", &a, &mut files)?;
    }
    let text = match spectral.infimum {
        Some(inf) => format!(
            "inf c_alpha = {inf:.12} over {} directions ({} distinct operators){}\n",
            spectral.rows.len(),
            spectral.distinct_operators,
            if spectral.incomplete { "; some rows did not converge" } else { "" }
        ),
        None => "no direction converged\n".into(),
    };
    let mut report = RunReport::new("spectrum", cfg);
    report.spectral = Some(spectral);
    report.exit_code = code;
    report.timing_seconds = start.elapsed().as_secs_f64();
    write(&dir, "report.json", &report.to_json(), &mut files)?;
    Ok(Outcome { code, text, files })
}

pub fn cmd_verify_hvz(common: &Common) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let l = load(common)?;
    let cfg = &l.config;
    let h = l.hamiltonian()?;
    let grid = cfg.grid()?;
    let opts = cfg.lanczos()?;
    let (edge_grid, factors, edge_opts) = cfg.edge()?;

    let spectral = essential_spectrum_bottom(&h, &grid, cfg.sampler.budget, &opts)?;
    let refinement = refinement_check(&h, &spectral, cfg.sampler.budget, &opts, cfg.tolerances.refinement)?;
    let edge = brute_force_edge(&h, &edge_grid, &factors, &edge_opts)?;

    let bottom = spectral.infimum.unwrap_or(f64::NAN);
    let gap = (bottom - edge.edge).abs();
    let verification = Verification {
        essential_bottom: bottom,
        edge: edge.edge,
        gap,
        tolerance: cfg.tolerances.hvz_gap,
        passed: gap <= cfg.tolerances.hvz_gap,
        reliable: refinement.reliable,
    };
    let ok = verification.passed && verification.reliable && !spectral.incomplete;
    let code = if ok { EXIT_OK } else { EXIT_PARTIAL };
    let text = format!(
        "inf c_alpha = {bottom:.9}\nE* = {:.9}\ngap = {gap:.3e} (tolerance {:.3e}): {}\nrefinement: max change {:.3e} ({})\n",
        edge.edge,
        verification.tolerance,
        if verification.passed { "pass" } else { "FAIL" },
        refinement.max_change,
        if refinement.reliable { "reliable" } else { "UNRELIABLE" },
    );

    let mut files = Vec::new();
    let dir = out_dir(common, cfg);
    write(&dir, "spectrum.csv", &spectral.to_csv(), &mut files)?;
    write(&dir, "edge.csv", &edge.to_csv(), &mut files)?;
    let mut report = RunReport::new("verify-hvz", cfg);
    report.spectral = Some(spectral);
    report.refinement = Some(refinement);
    report.edge = Some(edge);
    report.verification = Some(verification);
    report.exit_code = code;
    report.timing_seconds = start.elapsed().as_secs_f64();
    write(&dir, "report.json", &report.to_json(), &mut files)?;
    Ok(Outcome { code, text, files })
}

#[derive(Debug, Serialize)]
struct SurvivingTerm<'a> {
    index: usize,
    #[serde(flatten)]
    term: &'a TermSpec,
}

#[derive(Debug, Serialize)]
struct LocalizeOutput<'a> {
    direction: Vec<f64>,
    dispersion: &'a crate::config::DispersionSpec,
    surviving: Vec<SurvivingTerm<'a>>,
    offset: f64,
    free: bool,
    signature_hash: String,
}

pub fn cmd_localize(common: &Common, direction: Option<&[f64]>) -> Result<Outcome, Failure> {
    let l = load(common)?;
    let h = l.hamiltonian()?;
    let alpha = l.direction(direction)?;
    let loc = localize(&h, &alpha)?;
    let sig = strata(&h, &alpha)?;
    let out = LocalizeOutput {
        direction: alpha.vector().iter().copied().collect(),
        dispersion: &l.config.dispersion,
        surviving: loc
            .surviving()
            .iter()
            .map(|&i| SurvivingTerm {
                index: i,
                term: &l.config.terms[i],
            })
            .collect(),
        offset: loc.offset(),
        free: loc.is_free(),
        signature_hash: sig.hash_hex(),
    };
    let text = serde_json::to_string_pretty(&out).expect("serializable") + "\n";
    let mut files = Vec::new();
    if let Some(dir) = &common.out {
        write(dir, "localize.json", &text, &mut files)?;
    }
    Ok(Outcome {
        code: EXIT_OK,
        text,
        files,
    })
}

#[derive(Debug, Serialize)]
struct SymbolicMonomial {
    coeff: f64,
    factors: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct CharacterOutput {
    value: f64,
    /// `τ_chain(u)` with factors given as term indices.
    localized: Vec<SymbolicMonomial>,
    rendered: String,
}

fn symbolic(u: &AlgebraElement, terms: &[PotentialTerm]) -> Vec<SymbolicMonomial> {
    u.monomials()
        .iter()
        .map(|m| SymbolicMonomial {
            coeff: m.coeff,
            factors: m
                .factors
                .iter()
                .map(|f| {
                    terms
                        .iter()
                        .position(|t| t == f)
                        .expect("localization keeps generators unchanged")
                })
                .collect(),
        })
        .collect()
}

fn render(ms: &[SymbolicMonomial]) -> String {
    let mut s = String::new();
    for (i, m) in ms.iter().enumerate() {
        let c = match (i, m.coeff < 0.0) {
            (0, _) => format!("{}", m.coeff),
            (_, true) => format!(" - {}", -m.coeff),
            (_, false) => format!(" + {}", m.coeff),
        };
        s.push_str(&c);
        for f in &m.factors {
            s.push_str(&format!("·t{f}"));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

pub fn cmd_character(common: &Common) -> Result<Outcome, Failure> {
    let l = load(common)?;
    let (u, kappa, terms) = l.character()?;
    let localized = tau_chain(&u, kappa.chain())?;
    let value = localized.eval(&kappa.lifted_point())?;
    let ms = symbolic(&localized, &terms);
    let out = CharacterOutput {
        value,
        rendered: render(&ms),
        localized: ms,
    };
    let text = serde_json::to_string_pretty(&out).expect("serializable") + "\n";
    let mut files = Vec::new();
    if let Some(dir) = &common.out {
        write(dir, "character.json", &text, &mut files)?;
    }
    Ok(Outcome {
        code: EXIT_OK,
        text,
        files,
    })
}

pub fn cmd_selfcheck(seed: u64, tolerance_scale: f64, out: Option<&Path>) -> Result<Outcome, Failure> {
    if !(tolerance_scale.is_finite() && tolerance_scale > 0.0) {
        return Err(ConfigError(format!("--tolerance-scale must be positive, got {tolerance_scale}")).into());
    }
    let report = run_selfcheck(&SelfcheckOptions {
        tolerance_scale,
        seed,
    });
    let mut files = Vec::new();
    if let Some(dir) = out {
        let json = serde_json::to_string_pretty(&report).expect("serializable");
        write(dir, "selfcheck.json", &json, &mut files)?;
    }
    Ok(Outcome {
        code: if report.passed { EXIT_OK } else { EXIT_PARTIAL },
        text: report.table(),
        files,
    })
}
