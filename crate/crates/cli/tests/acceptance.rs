//! End-to-end acceptance criteria. Each test writes one `criterion N [PASS|FAIL]`
//! line straight to stderr, so the lines show up even when output is captured.

use std::f64::consts::PI;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::{Mat, Side};
use hvz_cli::commands::{cmd_spectrum, Common};
use hvz_core::geometry::{Direction, DirectionChain, Space, Subspace};
use hvz_core::localization::{
    direction_sampler, evaluate_character, localize, strata, tau_alpha_elem, tau_chain, Character, Dispersion,
    Hamiltonian,
};
use hvz_core::potentials::{
    radial_limit, AlgebraElement, Monomial, PotentialTerm, RadialLimitFunction, SphereProfile,
};
use hvz_core::spectral::{
    brute_force_edge, commutator_norm_sp, discretize, essential_spectrum_bottom, ground_energy,
    interval_structure_check, translation_defect, two_body_quotient_check, EdgeOptions, Grid,
    LanczosOptions, QPProduct,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seq(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")
}

fn report(n: u8, name: &str, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n} [{status}] {name}: {detail}");
}

fn well(depth: f64, width: f64) -> RadialLimitFunction {
    RadialLimitFunction::GaussianWell { depth, width }
}

fn step() -> RadialLimitFunction {
    RadialLimitFunction::SmoothStep {
        direction: vec![1.0],
        low: -0.5,
        high: 0.3,
        scale: 1.0,
    }
}

fn lorentzian(k: &[f64]) -> f64 {
    1.0 / (1.0 + k.iter().map(|t| t * t).sum::<f64>())
}

fn axis(d: usize, i: usize) -> Subspace {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    Subspace::span(d, &[v]).unwrap()
}

fn two_limits() -> Hamiltonian {
    Hamiltonian::new(
        Space::new(1).unwrap(),
        Dispersion::Quadratic,
        vec![
            PotentialTerm::new(Subspace::zero(1), step()).unwrap(),
            PotentialTerm::new(Subspace::zero(1), well(-2.0, 1.0)).unwrap(),
        ],
    )
    .unwrap()
}

fn hvz_axes() -> Hamiltonian {
    Hamiltonian::new(
        Space::new(2).unwrap(),
        Dispersion::Quadratic,
        vec![
            PotentialTerm::new(axis(2, 0), well(-3.0, 1.0)).unwrap(),
            PotentialTerm::new(axis(2, 1), well(-1.5, 1.0)).unwrap(),
        ],
    )
    .unwrap()
}

/// `g(θ) = 0.5·cos θ` away from the origin.
fn angular_limit() -> RadialLimitFunction {
    RadialLimitFunction::AngularProfile {
        profile: SphereProfile::Fourier {
            constant: 0.0,
            cos: vec![0.5],
            sin: vec![],
        },
        cutoff_radius: 2.0,
    }
}

fn angular() -> Hamiltonian {
    Hamiltonian::new(
        Space::new(2).unwrap(),
        Dispersion::Quadratic,
        vec![PotentialTerm::new(Subspace::zero(2), angular_limit()).unwrap()],
    )
    .unwrap()
}

/// Lowest eigenvalue of `−d²/dx² − depth·e^{−x²}` on the periodic box `[−L, L)`
/// with `n` points, from the position-space matrix of the trigonometric
/// interpolant's second derivative.
fn dense_1d_ground(depth: f64, half_length: f64, n: usize) -> f64 {
    let dx = 2.0 * half_length / n as f64;
    let dk = PI / half_length;
    let x = |j: usize| -half_length + j as f64 * dx;
    let half = n as i64 / 2;
    let kinetic = |j: usize, l: usize| {
        let d = (j as f64 - l as f64) * dx;
        (-half..half)
            .map(|m| {
                let k = m as f64 * dk;
                k * k * (k * d).cos()
            })
            .sum::<f64>()
            / n as f64
    };
    let h = Mat::<f64>::from_fn(n, n, |j, l| {
        let v = if j == l { depth * (-x(j) * x(j)).exp() } else { 0.0 };
        kinetic(j, l) + v
    });
    let eig = h.self_adjoint_eigenvalues(Side::Lower).unwrap();
    eig.into_iter().fold(f64::INFINITY, f64::min)
}

fn opts() -> LanczosOptions {
    LanczosOptions::default()
}

#[test]
fn criterion_1_free_operator_exactness() {
    let start = Instant::now();
    let h = Hamiltonian::free(Space::new(1).unwrap(), Dispersion::Quadratic).unwrap();
    let r = essential_spectrum_bottom(&h, &Grid::new(1, 16.0, 256).unwrap(), 2, &opts()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let inf = r.infimum.unwrap_or(f64::NAN);
    let passed = inf.abs() <= 1e-10 && secs < 1.0;
    report(
        1,
        "free-operator exactness",
        passed,
        &format!("inf = {inf:.3e} (tol 1e-10), {secs:.3} s (limit 1 s)"),
    );
    assert!(passed);
}

#[test]
fn criterion_2_two_body_with_distinct_limits() {
    let start = Instant::now();
    let h = two_limits();
    let r = essential_spectrum_bottom(&h, &Grid::new(1, 32.0, 256).unwrap(), 2, &opts()).unwrap();
    let inf = r.infimum.unwrap_or(f64::NAN);
    // Each localization is the free operator shifted by one limit of the step.
    let rows_exact = r.rows.iter().all(|row| {
        let limit = if row.direction[0] < 0.0 { -0.5 } else { 0.3 };
        (row.c_alpha - limit).abs() <= 1e-10
    });
    let e = brute_force_edge(&h, &Grid::new(1, 32.0, 256).unwrap(), &[1, 2], &EdgeOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let passed = (inf + 0.5).abs() <= 1e-10 && rows_exact && (e.edge + 0.5).abs() <= 0.05 && secs < 120.0;
    report(
        2,
        "two-body with distinct limits",
        passed,
        &format!(
            "inf = {inf:.12} (−0.5 ± 1e-10), rows exact: {rows_exact}, E* = {:.3} at L = {:?} (−0.5 ± 0.05), {secs:.1} s (limit 120 s)",
            e.edge, e.half_lengths
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_3_hvz_toy() {
    let start = Instant::now();
    let (l, n) = (16.0, 256);
    let e1 = dense_1d_ground(-3.0, l, n);
    let e2 = dense_1d_ground(-1.5, l, n);
    let h = hvz_axes();
    let r = essential_spectrum_bottom(&h, &Grid::new(2, l, n).unwrap(), 64, &opts()).unwrap();
    // Along ±e₁ only the x-axis term survives and the operator splits as
    // free ⊗ 1D well, so its bottom is e₁ + 0; likewise for ±e₂.
    let mut worst = 0.0f64;
    for row in &r.rows {
        let [a, b] = [row.direction[0], row.direction[1]];
        let oracle = if b.abs() < 1e-12 {
            e1
        } else if a.abs() < 1e-12 {
            e2
        } else {
            0.0
        };
        worst = worst.max((row.c_alpha - oracle).abs());
    }
    let predicted = e1.min(e2).min(0.0);
    let inf = r.infimum.unwrap_or(f64::NAN);
    let (base, factors, edge_opts) = (Grid::new(2, 8.0, 32).unwrap(), [1, 2], EdgeOptions::default());
    let e = brute_force_edge(&h, &base, &factors, &edge_opts).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let tensor = worst <= 1e-6 && (inf - predicted).abs() <= 1e-6;
    let edge_ok = (e.edge - e1.min(e2)).abs() <= 0.05;
    let passed = tensor && edge_ok && secs < 600.0;
    report(
        3,
        "HVZ toy",
        passed,
        &format!(
            "e1 = {e1:.9}, e2 = {e2:.9}; (a) max |c_α − oracle| = {worst:.2e} over {} rows (tol 1e-6), inf = {inf:.9}; \
             (b) E* = {:.3} at L = {:?} (min(e1, e2) ± 0.05); {secs:.1} s (limit 600 s)",
            r.rows.len(),
            e.edge,
            e.half_lengths
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_4_nonzero_angular_limits() {
    let h = angular();
    let r = essential_spectrum_bottom(&h, &Grid::new(2, 8.0, 32).unwrap(), 720, &opts()).unwrap();
    let inf = r.infimum.unwrap_or(f64::NAN);
    let theta = |d: &[f64]| d[1].atan2(d[0]).rem_euclid(2.0 * PI);
    let mesh = 2.0 * PI / 720.0;
    let sampled = theta(r.argmin.as_deref().unwrap_or(&[0.0, 0.0]));

    // Every direction lies in the single stratum of Y = {0}, so c_α is the free
    // bottom plus the exact angular limit; minimize that over the same rows.
    let g = angular_limit();
    let sig0 = strata(&h, &Direction::from_slice(&[1.0, 0.0]).unwrap()).unwrap();
    let mut one_stratum = true;
    let mut exact_min = (f64::INFINITY, 0.0);
    let mut row_err = 0.0f64;
    for row in &r.rows {
        let a = Direction::from_slice(&row.direction).unwrap();
        one_stratum &= strata(&h, &a).unwrap().same_stratum(&sig0);
        let c = radial_limit(&g, &a).unwrap();
        row_err = row_err.max((row.c_alpha - c).abs());
        if c < exact_min.0 {
            exact_min = (c, theta(&row.direction));
        }
    }
    let dist = |t: f64| (t - PI).abs();
    let passed = r.rows.len() == 720
        && (inf + 0.5).abs() <= 1e-3
        && dist(sampled) <= mesh + 1e-12
        && one_stratum
        && row_err <= 1e-10
        && dist(exact_min.1) <= mesh + 1e-12;
    report(
        4,
        "nonzero angular limits",
        passed,
        &format!(
            "min c_α = {inf:.6} over {} directions (−0.5 ± 1e-3), sampled argmin θ = {sampled:.5}, \
             stratum argmin θ = {:.5} (π ± {mesh:.5}), single stratum: {one_stratum}, \
             max |c_α − g(θ)| = {row_err:.1e} (tol 1e-10)",
            r.rows.len(),
            exact_min.1
        ),
    );
    assert!(passed);
}

fn line(v: Vec<f64>) -> Subspace {
    let d = v.len();
    Subspace::span(d, &[v]).unwrap()
}

fn pool_2d() -> Vec<PotentialTerm> {
    vec![
        PotentialTerm::new(line(vec![1.0, 0.0]), well(-1.0, 1.0)).unwrap(),
        PotentialTerm::new(line(vec![1.0, 2.0]), well(0.6, 1.5)).unwrap(),
        PotentialTerm::new(
            Subspace::zero(2),
            RadialLimitFunction::AngularProfile {
                profile: SphereProfile::Fourier {
                    constant: 0.1,
                    cos: vec![0.5],
                    sin: vec![0.0, -0.3],
                },
                cutoff_radius: 1.5,
            },
        )
        .unwrap(),
        PotentialTerm::new(line(vec![1.0, -1.0]), step()).unwrap(),
        PotentialTerm::new(
            line(vec![0.0, 1.0]),
            RadialLimitFunction::CompactBump {
                center: vec![0.5],
                radius: 2.0,
                amplitude: 1.2,
            },
        )
        .unwrap(),
    ]
}

fn random_element(rng: &mut ChaCha8Rng) -> AlgebraElement {
    let pool = pool_2d();
    let monomials = (0..rng.gen_range(1..=4))
        .map(|_| Monomial {
            coeff: rng.gen_range(-2.0..2.0),
            factors: (0..rng.gen_range(0..=3))
                .map(|_| pool[rng.gen_range(0..pool.len())].clone())
                .collect(),
        })
        .collect();
    AlgebraElement::from_monomials(2, monomials).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

#[test]
fn criterion_5_algebraic_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // Directions on the pool's lines, then generic ones.
    let mut dirs: Vec<Direction> = [[1.0, 0.0], [-1.0, -2.0], [1.0, -1.0], [0.0, -1.0]]
        .iter()
        .map(|v| Direction::from_slice(v).unwrap())
        .collect();
    dirs.extend((0..4).map(|_| {
        let t: f64 = rng.gen_range(0.0..2.0 * PI);
        Direction::from_slice(&[t.cos(), t.sin()]).unwrap()
    }));

    let (mut idem, mut morph) = (0.0f64, 0.0f64);
    for a in &dirs {
        let (u, w) = (random_element(&mut rng), random_element(&mut rng));
        let (tu, tw) = (tau_alpha_elem(&u, a).unwrap(), tau_alpha_elem(&w, a).unwrap());
        let ttu = tau_alpha_elem(&tu, a).unwrap();
        let tprod = tau_alpha_elem(&(&u * &w), a).unwrap();
        let tsum = tau_alpha_elem(&(&u + &w), a).unwrap();
        for _ in 0..100 {
            let x = DVector::from_fn(2, |_, _| rng.gen_range(-6.0..6.0));
            let (p, q) = (tu.eval(&x).unwrap(), tw.eval(&x).unwrap());
            idem = idem.max(rel(ttu.eval(&x).unwrap(), p));
            morph = morph.max(rel(tprod.eval(&x).unwrap(), p * q));
            morph = morph.max(rel(tsum.eval(&x).unwrap(), p + q));
        }
    }

    // τ along (α, β) against lim_s lim_r u(rα + sβ + x), taken at r ≫ s ≫ |x|.
    let plane = Subspace::span(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
    let g = |s: Subspace, f| AlgebraElement::generator(PotentialTerm::new(s, f).unwrap());
    let u3 = &(&g(plane.clone(), well(-2.0, 1.0)) * &g(line(vec![1.0, 0.0, 0.0]), RadialLimitFunction::AngularProfile {
        profile: SphereProfile::Affine {
            constant: 0.1,
            linear: vec![0.5, -0.2],
        },
        cutoff_radius: 1.0,
    })) + &g(plane, step());
    let mut chain_err = 0.0f64;
    let mut pairs = vec![(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0])];
    for _ in 0..6 {
        let a = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)).normalize();
        let mut b = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        b -= &a * a.dot(&b);
        pairs.push((a.iter().copied().collect(), b.normalize().iter().copied().collect()));
    }
    for (a, b) in &pairs {
        let (a, b) = (Direction::from_slice(a).unwrap(), Direction::from_slice(b).unwrap());
        let chain = DirectionChain::new(3, vec![a.clone(), b.clone()]).unwrap();
        let t = tau_chain(&u3, &chain).unwrap();
        for _ in 0..3 {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let far = a.vector() * 1e12 + b.vector() * 1e6 + &x;
            chain_err = chain_err.max((t.eval(&x).unwrap() - u3.eval(&far).unwrap()).abs());
        }
    }

    let mut mult = 0.0f64;
    for i in 0..50 {
        let a = &dirs[i % dirs.len()];
        let chain = DirectionChain::new(2, vec![a.clone()]).unwrap();
        let kappa = Character::new(chain, DVector::from_element(1, rng.gen_range(-3.0..3.0))).unwrap();
        let (u, w) = (random_element(&mut rng), random_element(&mut rng));
        let lhs = evaluate_character(&(&u * &w), &kappa).unwrap();
        let rhs = evaluate_character(&u, &kappa).unwrap() * evaluate_character(&w, &kappa).unwrap();
        mult = mult.max(rel(lhs, rhs));
    }

    let passed = idem <= 1e-12 && morph <= 1e-12 && chain_err <= 1e-6 && mult <= 1e-12;
    report(
        5,
        "algebraic suite",
        passed,
        &format!(
            "idempotency {idem:.1e}, morphism {morph:.1e} (100 points × {} directions, tol 1e-12); \
             chain vs double ray limit {chain_err:.1e} (tol 1e-6); multiplicativity {mult:.1e} (50 pairs, tol 1e-12)",
            dirs.len()
        ),
    );
    assert!(passed);
}

fn decays(seq: &[f64; 3]) -> bool {
    seq[1] < seq[0] && seq[2] < seq[1] && seq[2] < 0.35 * seq[0]
}

#[test]
fn criterion_6_position_momentum_limits() {
    let grid = Grid::new(1, 16.0, 256).unwrap();
    let a = QPProduct::from_function(&grid, &step(), lorentzian).unwrap();
    // p₀ = 4·(π/L) and q₀ = 4·Δx, both halved twice along the lattice.
    let comm = [4i64, 2, 1].map(|m| commutator_norm_sp(&a, &[m], 0).unwrap());
    let tr = [4i64, 2, 1].map(|q| translation_defect(&a, &[q], 0).unwrap());
    let passed = decays(&comm) && decays(&tr);
    report(
        6,
        "position-momentum limit property",
        passed,
        &format!(
            "‖[S_p, A]‖ = [{}], ratio {:.3}; ‖(T_q − 1)A^(*)‖ = [{}], ratio {:.3} (strictly decreasing, ratio < 0.35)",
            seq(&comm),
            comm[2] / comm[0],
            seq(&tr),
            tr[2] / tr[0]
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_7_two_body_quotient_check() {
    let grid = Grid::new(1, 64.0, 1024).unwrap();
    let alpha = Direction::from_slice(&[1.0]).unwrap();
    let q = two_body_quotient_check(&step(), lorentzian, &alpha, &[4.0, 8.0, 16.0], &grid, &[]).unwrap();
    let passed = q.strictly_decreasing() && q.final_defect() < 1e-3;
    report(
        7,
        "two-body quotient check",
        passed,
        &format!(
            "defects [{}] at r = {:?}, limit {} (strictly decreasing, final < 1e-3)",
            seq(&q.defects),
            q.radii,
            q.limit
        ),
    );
    assert!(passed);
}

/// Distinct localized operators over the case's sampled directions, with the
/// direction that produced each.
fn localized_cases(h: &Hamiltonian, budget: usize) -> Vec<(Vec<f64>, hvz_core::localization::LocalizedHamiltonian)> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for a in direction_sampler(h, budget).unwrap() {
        let loc = localize(h, &a).unwrap();
        if !seen.contains(&loc.structure_key()) {
            seen.push(loc.structure_key());
            out.push((a.vector().iter().copied().collect(), loc));
        }
    }
    out
}

#[test]
fn criterion_8_interval_structure() {
    let window = 5.0;
    // The HVZ case runs on a coarser 64² grid so the dense solve stays within
    // reach; the others use their own grids.
    let cases = [
        ("free", Hamiltonian::free(Space::new(1).unwrap(), Dispersion::Quadratic).unwrap(), 2, Grid::new(1, 16.0, 256).unwrap()),
        ("two limits", two_limits(), 2, Grid::new(1, 32.0, 256).unwrap()),
        ("HVZ toy", hvz_axes(), 64, Grid::new(2, 16.0, 64).unwrap()),
        ("angular", angular(), 720, Grid::new(2, 8.0, 32).unwrap()),
    ];
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (name, h, budget, grid) in &cases {
        for (dir, loc) in localized_cases(h, *budget) {
            let op = discretize(&loc, grid).unwrap();
            let c = ground_energy(&op, &opts()).unwrap().energy;
            let chk = interval_structure_check(&op, c, window).unwrap();
            checked += 1;
            worst = worst.max(chk.max_gap / chk.free_gap);
            if !chk.passed {
                failures.push(format!("{name} at {dir:?}: gap {:.3e} vs free {:.3e}", chk.max_gap, chk.free_gap));
            }
        }
    }
    let passed = failures.is_empty();
    report(
        8,
        "interval structure of localized spectra",
        passed,
        &format!(
            "{checked} localized operators, largest gap / free gap = {worst:.3} (limit 5, window {window}){}",
            if passed { String::new() } else { format!("; failing: {}", failures.join("; ")) }
        ),
    );
    assert!(passed);
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn spectrum_csv(config: &Path) -> Vec<u8> {
    let out = tempfile::tempdir().unwrap();
    let common = Common {
        config: config.to_path_buf(),
        out: Some(out.path().to_path_buf()),
        seed: None,
        budget: None,
    };
    let outcome = cmd_spectrum(&common).unwrap_or_else(|f| panic!("{config:?}: {}", f.message));
    assert_eq!(outcome.code, 0, "{config:?}: {}", outcome.text);
    std::fs::read(out.path().join("spectrum.csv")).unwrap()
}

#[test]
fn criterion_9_determinism() {
    let names = ["free_1d.toml", "two_limits_1d.toml", "angular_2d.toml", "hvz_axes_2d.toml"];
    let mut identical = Vec::new();
    for name in names {
        let path = configs().join(name);
        identical.push(spectrum_csv(&path) == spectrum_csv(&path));
    }
    let passed = identical.iter().all(|b| *b);
    report(
        9,
        "determinism",
        passed,
        &format!(
            "spectrum.csv byte-identical across two runs: {}",
            names.iter().zip(&identical).map(|(n, b)| format!("{n} {b}")).collect::<Vec<_>>().join(", ")
        ),
    );
    assert!(passed);
}
