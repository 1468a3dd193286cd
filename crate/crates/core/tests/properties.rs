mod common;

use common::*;
use maslov_core::assembly::BcKind;

#[test]
fn assembled_matrices_are_symmetric_and_definite() {
    symmetry_suite(50).unwrap();
}

#[test]
fn maslov_index_is_basis_invariant() {
    rotation_suite(20).unwrap();
}

#[test]
fn spectral_shift_is_linear() {
    shift_suite(20).unwrap();
}

#[test]
fn prufer_matches_closed_form() {
    prufer_suite(10).unwrap();
}

#[test]
fn interval_crossings_survive_grid_doubling() {
    grid_doubling(&interval_problem(400, BcKind::Dirichlet), 64).unwrap();
    grid_doubling(&interval_problem(400, BcKind::Neumann), 64).unwrap();
}

#[test]
fn disk_crossings_survive_grid_doubling() {
    grid_doubling(&disk_dirichlet(0.03), 64).unwrap();
}
