use std::f64::consts::PI;

use super::*;
use crate::assembly::{constraint_space, BcKind, BoundaryMeasure, FormAssembler};
use crate::coeff::{CoefficientSet, ScalarField};
use crate::mesh::{build_disk_mesh, build_interval_mesh, DiffeoFamily, Geometry, Mesh, Point};

fn space(mesh: &Mesh, kind: BcKind) -> ConstraintSpace {
    constraint_space(mesh, &kind, BoundaryMeasure::Reference, None).unwrap()
}

fn interval_assembler(n: usize, potential: f64, bc: &BcKind) -> FormAssembler {
    let mesh = build_interval_mesh(n).unwrap();
    let family = DiffeoFamily::star(Point::zeros(), 1, (0.1, 1.0)).unwrap();
    FormAssembler::new(mesh, CoefficientSet::schrodinger(ScalarField::Constant(potential)), family, bc).unwrap()
}

fn diagonal(values: &[f64]) -> CsrMatrix {
    let trip: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
    CsrMatrix::from_triplets(values.len(), values.len(), &trip)
}

#[test]
fn diagonal_pencil_and_counts() {
    let mesh = build_interval_mesh(2).unwrap();
    let full = space(&mesh, BcKind::Neumann);
    let pencil = Pencil::new(&diagonal(&[-2.0, -0.1, 0.3]), &CsrMatrix::identity(3), &full);
    let sol = pencil.solve_dense(0.0, 0.0).unwrap();
    assert_eq!(sol.eigenvalues(), &[-2.0, -0.1, 0.3]);
    assert_eq!(morse_index(&sol, 0.0, 1e-8).count, 2);

    let pencil = Pencil::new(&diagonal(&[-1e-12, 5.0, 7.0]), &CsrMatrix::identity(3), &full);
    let sol = pencil.solve_dense(0.0, 0.0).unwrap();
    let m = morse_index(&sol, 0.0, 1e-8);
    assert_eq!(m.count, 0);
    assert_eq!(m.borderline, vec![-1e-12]);

    let pencil = Pencil::new(&diagonal(&[-3.0, 1e-9, 4.0]), &CsrMatrix::identity(3), &full);
    let sol = pencil.solve_dense(0.0, 0.0).unwrap();
    assert_eq!(kernel_basis(&sol, 1e-6).len(), 1);
    assert!(kernel_basis(&sol, 1e-10).is_empty());
}

#[test]
fn two_by_two_pencil() {
    let mesh = Mesh::from_cells(1, vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)], vec![vec![0, 1]], Geometry::Unspecified)
        .unwrap();
    let full = space(&mesh, BcKind::Neumann);
    let pencil = Pencil::new(&diagonal(&[2.0, -1.0]), &CsrMatrix::identity(2), &full);
    assert_eq!(pencil.solve_dense(0.0, 0.0).unwrap().eigenvalues(), &[-1.0, 2.0]);

    let empty = space(&mesh, BcKind::Dirichlet);
    assert_eq!(empty.dimension(), 0);
    let pencil = Pencil::new(&diagonal(&[2.0, -1.0]), &CsrMatrix::identity(2), &empty);
    let sol = pencil.solve_dense(0.0, 0.0).unwrap();
    assert!(sol.eigenvalues().is_empty());
    assert_eq!(morse_index(&sol, 0.0, 1e-8).count, 0);
}

#[test]
fn dirichlet_ground_state_on_unit_interval() {
    let asm = interval_assembler(200, 0.0, &BcKind::Dirichlet);
    let sys = asm.system(1.0).unwrap();
    let sol = solve_pencil(&sys, &space(asm.mesh(), BcKind::Dirichlet)).unwrap();
    assert!((sol.eigenvalues()[0] / (PI * PI) - 1.0).abs() < 0.005);
    assert!(sol.max_relative_residual() <= RESIDUAL_TOL);
}

#[test]
fn morse_index_of_deep_well() {
    let c = (3.5 * PI).powi(2);
    let asm = interval_assembler(200, -c, &BcKind::Dirichlet);
    let sp = space(asm.mesh(), BcKind::Dirichlet);
    let pencil = Pencil::new(&asm.stiffness(1.0).unwrap(), asm.mass(), &sp);
    let sol = pencil.solve_dense(1.0, 0.0).unwrap();
    assert_eq!(morse_index(&sol, 0.0, sol.default_kernel_tol()).count, 3);
    assert_eq!(pencil.count_below(0.0), Some(3));
    let window = pencil.solve_window(1.0, 0.0, &WindowOptions::default(), None).unwrap();
    assert_eq!(morse_index(&window, 0.0, window.default_kernel_tol()).count, 3);
}

#[test]
fn shift_linearity_is_exact() {
    let asm = interval_assembler(60, -50.0, &BcKind::Neumann);
    let sp = space(asm.mesh(), BcKind::Neumann);
    let pencil = Pencil::new(&asm.stiffness(0.7).unwrap(), asm.mass(), &sp);
    let base = pencil.solve_dense(0.7, 0.0).unwrap();
    let mut previous = 0;
    for lambda in [-5.0, 0.0, 12.5, 40.0, 200.0, 900.0] {
        let shifted = pencil.solve_dense(0.7, lambda).unwrap();
        for (a, b) in base.eigenvalues().iter().zip(shifted.eigenvalues()) {
            assert!((a - lambda - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
        let count = morse_index(&base, lambda, 1e-8).count;
        assert!(count >= previous);
        assert_eq!(count, morse_index(&shifted, 0.0, 1e-8).count);
        previous = count;
    }
    // dμ/dλ = −vᵀMv = −1 for M-normalized eigenvectors
    let mass = pencil.mass();
    for v in base.subspace_vectors().iter().take(5) {
        assert!((mass.bilinear(v, v) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn interval_eigenvalues_converge_quadratically() {
    let mut constants = Vec::new();
    for n in [50usize, 100] {
        let asm = interval_assembler(n, 0.0, &BcKind::Dirichlet);
        let sp = space(asm.mesh(), BcKind::Dirichlet);
        let sol = Pencil::new(&asm.stiffness(1.0).unwrap(), asm.mass(), &sp).solve_dense(1.0, 0.0).unwrap();
        let h = 1.0 / n as f64;
        let c: Vec<f64> = (1..=5)
            .map(|k| {
                let exact = (k as f64 * PI).powi(2);
                ((sol.eigenvalues()[k - 1] - exact) / exact).abs() / (k as f64 * h).powi(2)
            })
            .collect();
        constants.push(c);
    }
    for k in 0..5 {
        assert!(constants[0][k] < 1.0 && constants[1][k] < 1.0);
        assert!((constants[0][k] / constants[1][k] - 1.0).abs() < 0.05, "{constants:?}");
    }
}

#[test]
fn window_matches_dense_solution() {
    let mesh = build_disk_mesh(1.0, 0.12).unwrap();
    let family = DiffeoFamily::star(Point::zeros(), 2, (0.5, 1.0)).unwrap();
    let coeffs = CoefficientSet::schrodinger(ScalarField::Constant(-30.0));
    for bc in [BcKind::Dirichlet, BcKind::Neumann, BcKind::MeanZero] {
        let asm = FormAssembler::new(mesh.clone(), coeffs.clone(), family.clone(), &bc).unwrap();
        let sp = space(&mesh, bc);
        let pencil = Pencil::new(&asm.stiffness(0.8).unwrap(), asm.mass(), &sp);
        let dense = pencil.solve_dense(0.8, 0.0).unwrap();
        let opts = WindowOptions { dense_threshold: 0, ..WindowOptions::default() };
        let window = pencil.solve_window(0.8, 0.0, &opts, None).unwrap();
        assert!(!window.is_complete());
        for (i, lam) in window.eigenvalues().iter().enumerate() {
            let reference = dense.eigenvalues()[window.first_index() + i];
            assert!((lam - reference).abs() <= 1e-8 * reference.abs().max(1.0), "{lam} vs {reference}");
        }
        assert!(window.max_relative_residual() <= RESIDUAL_TOL);
        assert!(window.orthonormality_defect(&pencil) <= 1e-10);
        assert!(dense.orthonormality_defect(&pencil) <= 1e-10);
        let tol = window.default_kernel_tol();
        assert_eq!(morse_index(&window, 0.0, tol).count, morse_index(&dense, 0.0, tol).count);

        let warm = pencil.solve_window(0.8, 0.0, &opts, Some(window.subspace_vectors())).unwrap();
        assert_eq!(warm.first_index(), window.first_index());
    }
}
