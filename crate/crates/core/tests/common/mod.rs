#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use maslov_core::assembly::{BcKind, FormAssembler};
use maslov_core::coeff::{CoefficientSet, MatrixField, ScalarField, VectorField};
use maslov_core::flow::{
    crossing_form_boundary_dirichlet, crossing_form_volume, locate_crossing, maslov_index, run_flow, signature, Crossing,
    CrossingPosition, Problem,
};
use maslov_core::linalg::dense::cholesky;
use maslov_core::mesh::{build_disk_mesh, build_interval_mesh, DiffeoFamily, Point};
use maslov_core::oracle::{interval_spectrum, prufer_conjugate_times, IntervalBc, PRUFER_STEPS};
use maslov_core::spectral::{morse_index, Pencil};
use nalgebra::{DMatrix, Matrix2};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub fn c35() -> f64 {
    (3.5 * PI).powi(2)
}

pub fn origin() -> Point {
    Point::new(0.0, 0.0)
}

/// `−u″ − (3.5π)² u` on `(0, t)`, `t ∈ [0.1, 1]`.
pub fn interval_problem(n: usize, bc: BcKind) -> Problem {
    let family = DiffeoFamily::star(origin(), 1, (0.1, 1.0)).unwrap();
    Problem::schrodinger(build_interval_mesh(n).unwrap(), ScalarField::Constant(-c35()), family, bc, 0.0).unwrap()
}

/// `−Δ − 30` on disks of radius `t ∈ [0.5, 1]`.
pub fn disk_dirichlet(h: f64) -> Problem {
    let family = DiffeoFamily::star(origin(), 2, (0.5, 1.0)).unwrap();
    Problem::schrodinger(build_disk_mesh(1.0, h).unwrap(), ScalarField::zero(), family, BcKind::Dirichlet, 30.0).unwrap()
}

/// `−Δ − 5 + r² − 10` on disks of radius `t ∈ [0.3, 1]`, Neumann.
pub fn disk_neumann(h: f64) -> Problem {
    let family = DiffeoFamily::star(origin(), 2, (0.3, 1.0)).unwrap();
    let v = ScalarField::RadialPolynomial(vec![-5.0, 0.0, 1.0]);
    Problem::schrodinger(build_disk_mesh(1.0, h).unwrap(), v, family, BcKind::Neumann, 10.0).unwrap()
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn suite_result(name: &str, r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>) -> Result<(), String> {
    r.map_err(|e| format!("{name}: {e}"))
}

#[derive(Debug, Clone)]
pub struct FormConfig {
    pub dim: usize,
    pub size: usize,
    pub t: f64,
    pub center: (f64, f64),
    pub d0: f64,
    pub d2: f64,
    pub a: (f64, f64, f64),
    pub bc: usize,
    pub beta: f64,
}

fn form_config() -> impl Strategy<Value = FormConfig> {
    (
        1usize..=2,
        0usize..4,
        0.4f64..1.6,
        (-0.3f64..0.3, -0.3f64..0.3),
        1.0f64..10.0,
        0.0f64..5.0,
        (0.5f64..3.0, 0.5f64..3.0, -0.4f64..0.4),
        0usize..5,
        0.0f64..2.0,
    )
        .prop_map(|(dim, size, t, center, d0, d2, a, bc, beta)| FormConfig { dim, size, t, center, d0, d2, a, bc, beta })
}

fn check_form_config(cfg: &FormConfig) -> Result<(), TestCaseError> {
    let mesh = if cfg.dim == 1 {
        build_interval_mesh(8 + 10 * cfg.size).unwrap()
    } else {
        build_disk_mesh(1.0, 0.35 - 0.05 * cfg.size as f64).unwrap()
    };
    let center = if cfg.dim == 1 { Point::new(cfg.center.0, 0.0) } else { Point::new(cfg.center.0, cfg.center.1) };
    let family = DiffeoFamily::star(center, cfg.dim, (0.3, 2.0)).unwrap();
    let (a11, a22, a12) = cfg.a;
    let a = if cfg.dim == 1 { Matrix2::new(a11, 0.0, 0.0, 1.0) } else { Matrix2::new(a11, a12, a12, a22) };
    let coeffs = CoefficientSet::new(
        MatrixField::Constant(a),
        VectorField::Zero,
        VectorField::Zero,
        ScalarField::RadialPolynomial(vec![cfg.d0, 0.0, cfg.d2]),
    )
    .unwrap();
    let bc = match cfg.bc {
        0 => BcKind::Dirichlet,
        1 => BcKind::Neumann,
        2 => BcKind::Robin(ScalarField::Constant(cfg.beta)),
        3 => BcKind::LocallyConstant,
        _ => BcKind::MeanZero,
    };
    let asm = FormAssembler::new(mesh.clone(), coeffs, family, &bc).unwrap();
    let sys = asm.system(cfg.t).unwrap();
    prop_assert!(sys.check_invariants().is_ok());
    for m in [&sys.stiffness, &sys.mass, &sys.stiffness_dt] {
        prop_assert!(m.asymmetry() <= 1e-12 * m.max_abs().max(1.0), "asymmetry {}", m.asymmetry());
    }
    prop_assert!(cholesky(&sys.mass.to_dense()).is_ok());
    let space = maslov_core::assembly::constraint_space(&mesh, &bc, Default::default(), None).unwrap();
    let sol = Pencil::new(&sys.stiffness, &sys.mass, &space).solve_dense(cfg.t, 0.0).unwrap();
    if let Some(&lowest) = sol.eigenvalues().first() {
        prop_assert!(lowest > 0.0, "lowest eigenvalue {lowest}");
    }
    Ok(())
}

/// Symmetry of every assembled matrix, definiteness of the mass matrix and of the
/// form with a potential bounded below by one.
pub fn symmetry_suite(cases: u32) -> Result<(), String> {
    suite_result("symmetry", runner(cases).run(&form_config(), |cfg| check_form_config(&cfg)))
}

struct RotationFixture {
    problem: Problem,
    crossing: Crossing,
    others: Vec<Crossing>,
}

fn rotation_fixture() -> &'static RotationFixture {
    static FIXTURE: OnceLock<RotationFixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let problem = disk_dirichlet(0.08);
        let sol = locate_crossing(&problem, 0.66, 0.74, 1, None).unwrap();
        let crossing = problem.crossing_at(&sol, problem.cluster_tol(&sol), CrossingPosition::Interior).unwrap();
        let sol = locate_crossing(&problem, 0.9, 0.98, 3, None).unwrap();
        let other = problem.crossing_at(&sol, problem.cluster_tol(&sol), CrossingPosition::Interior).unwrap();
        RotationFixture { problem, crossing, others: vec![other] }
    })
}

fn rotate(kernel: &[Vec<f64>], r: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..kernel.len())
        .map(|j| {
            let mut v = vec![0.0; kernel[0].len()];
            for (i, u) in kernel.iter().enumerate() {
                for (x, y) in v.iter_mut().zip(u) {
                    *x += r[(i, j)] * y;
                }
            }
            v
        })
        .collect()
}

/// Crossing signatures, and so the Maslov index, do not depend on the choice of
/// M-orthonormal kernel basis.
pub fn rotation_suite(cases: u32) -> Result<(), String> {
    let fx = rotation_fixture();
    let t = fx.crossing.t_star;
    let d_dt = fx.problem.assembler().stiffness_dt(t).unwrap();
    let zero_tol = 1e-8 * d_dt.max_abs();
    let (base, _) = maslov_index(&[vec![fx.crossing.clone()], fx.others.clone()].concat(), false).unwrap();
    let strategy = (0.0f64..2.0 * PI, any::<bool>());
    suite_result(
        "rotation",
        runner(cases).run(&strategy, |(theta, reflect)| {
            let s = if reflect { -1.0 } else { 1.0 };
            let r = DMatrix::from_row_slice(2, 2, &[theta.cos(), -s * theta.sin(), theta.sin(), s * theta.cos()]);
            let kernel = rotate(&fx.crossing.kernel, &r);
            let q = crossing_form_volume(&d_dt, &kernel);
            let expected = r.transpose() * &fx.crossing.q_volume * &r;
            prop_assert!((&q - expected).abs().max() <= 1e-9 * fx.crossing.q_volume.abs().max());
            prop_assert_eq!(signature(&q, zero_tol), fx.crossing.signature);
            let (qb, _) = crossing_form_boundary_dirichlet(
                fx.problem.mesh(),
                fx.problem.family(),
                fx.problem.bc(),
                t,
                &kernel,
            )
            .unwrap();
            prop_assert_eq!(signature(&qb, zero_tol), signature(fx.crossing.q_boundary.as_ref().unwrap(), zero_tol));
            let mut rotated = fx.crossing.clone();
            rotated.kernel = kernel;
            rotated.q_volume = q;
            rotated.signature = signature(&rotated.q_volume, zero_tol);
            let (m, _) = maslov_index(&[vec![rotated], fx.others.clone()].concat(), false).unwrap();
            prop_assert_eq!(m, base);
            Ok(())
        }),
    )
}

/// Shifting by `λ` moves every eigenvalue of `(D_t, M_t)` by exactly `−λ`, with
/// `d(λ_i − λ)/dλ = −1` for unit-mass eigenvectors, and the Morse index grows with `λ`.
pub fn shift_suite(cases: u32) -> Result<(), String> {
    let strategy = (1usize..=2, -60.0f64..60.0, 0.0f64..40.0, 0.5f64..1.5, 0.0f64..30.0);
    suite_result(
        "shift",
        runner(cases).run(&strategy, |(dim, lambda, extra, t, c)| {
            let mesh = if dim == 1 { build_interval_mesh(40).unwrap() } else { build_disk_mesh(1.0, 0.2).unwrap() };
            let family = DiffeoFamily::star(origin(), dim, (0.3, 2.0)).unwrap();
            let v = ScalarField::RadialPolynomial(vec![-c, 0.0, 2.0]);
            let solve = |shift: f64| {
                let asm =
                    FormAssembler::new(mesh.clone(), CoefficientSet::schrodinger(v.clone()).shifted(shift), family.clone(), &BcKind::Dirichlet)
                        .unwrap();
                let space = maslov_core::assembly::constraint_space(&mesh, &BcKind::Dirichlet, Default::default(), None).unwrap();
                let stiffness = asm.stiffness(t).unwrap();
                let mass = asm.physical_mass(t).unwrap();
                let sol = Pencil::new(&stiffness, &mass, &space).solve_dense(t, 0.0).unwrap();
                (sol, mass)
            };
            let (base, _) = solve(0.0);
            let (shifted, mass) = solve(lambda);
            let (further, _) = solve(lambda + extra);
            for (x, y) in base.eigenvalues().iter().zip(shifted.eigenvalues()) {
                prop_assert!((x - lambda - y).abs() <= 1e-9 * x.abs().max(lambda.abs()).max(1.0), "{x} {y}");
            }
            for v in shifted.eigenvectors() {
                prop_assert!((-mass.bilinear(v, v) + 1.0).abs() <= 1e-10);
            }
            let tol = 1e-6 * shifted.stiffness_norm();
            prop_assert!(morse_index(&shifted, 0.0, tol).count <= morse_index(&further, 0.0, tol).count);
            Ok(())
        }),
    )
}

/// The Prüfer shooting oracle matches the closed-form conjugate times `kπ/√c`
/// and the closed-form eigenvalue counts at the endpoints.
pub fn prufer_suite(cases: u32) -> Result<(), String> {
    let strategy = (4.0f64..600.0, any::<bool>());
    suite_result(
        "prufer",
        runner(cases).run(&strategy, |(c, neumann)| {
            let (a, b) = (0.1, 1.0);
            let root = c.sqrt();
            let exact: Vec<f64> = (1..).map(|k| k as f64 * PI / root).take_while(|&t| t <= b).filter(|&t| t > a).collect();
            prop_assume!((1..40).all(|k| {
                let t = k as f64 * PI / root;
                (t - a).abs() > 1e-4 && (t - b).abs() > 1e-4
            }));
            let bc = if neumann { IntervalBc::Neumann } else { IntervalBc::Dirichlet };
            let times = prufer_conjugate_times(&ScalarField::Constant(-c), &bc, (a, b), PRUFER_STEPS).unwrap();
            prop_assert_eq!(times.len(), exact.len());
            for (x, y) in times.iter().zip(&exact) {
                prop_assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
            }
            let count = |t: f64| interval_spectrum(c, t, &bc, 64).unwrap().count_below(0.0);
            prop_assert_eq!(times.len(), count(b) - count(a));
            Ok(())
        }),
    )
}

/// Doubling the grid keeps the crossings and moves each `t_star` by less than the
/// bisection tolerance.
pub fn grid_doubling(problem: &Problem, n: usize) -> Result<(), String> {
    let coarse = run_flow(problem, n).map_err(|e| e.to_string())?;
    let fine = run_flow(problem, 2 * n).map_err(|e| e.to_string())?;
    if coarse.crossings.len() != fine.crossings.len() {
        return Err(format!("{} vs {} crossings", coarse.crossings.len(), fine.crossings.len()));
    }
    let tol = problem.bisect_tol();
    for (x, y) in coarse.crossings.iter().zip(&fine.crossings) {
        if x.kernel_dim != y.kernel_dim || (x.t_star - y.t_star).abs() >= tol {
            return Err(format!("t* {} vs {} (tolerance {tol:e})", x.t_star, y.t_star));
        }
    }
    Ok(())
}
