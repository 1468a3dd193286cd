//! Constrained symmetric-definite pencils `D u = λ M u`: eigenpairs, Morse counts
//! and kernels.

mod window;

use nalgebra::DMatrix;

use crate::assembly::{ConstraintSpace, FormSystem};
use crate::error::Result;
use crate::linalg::dense::generalized_symmetric_eigen;
use crate::linalg::{CsrMatrix, SkylineLdl};

pub use window::WindowOptions;

/// Relative residual accepted for every returned eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Default kernel tolerance relative to `‖D_t‖_max`.
pub const KERNEL_REL_TOL: f64 = 1e-6;
/// Multiplicity clustering tolerance as a multiple of the kernel tolerance.
pub const CLUSTER_FACTOR: f64 = 50.0;

/// The pencil restricted to an admissible subspace: `(BᵀDB, BᵀMB)`.
#[derive(Debug, Clone)]
pub struct Pencil<'a> {
    stiffness: CsrMatrix,
    mass: CsrMatrix,
    space: &'a ConstraintSpace,
    stiffness_norm: f64,
    mass_norm: f64,
}

impl<'a> Pencil<'a> {
    pub fn new(stiffness: &CsrMatrix, mass: &CsrMatrix, space: &'a ConstraintSpace) -> Self {
        let (stiffness, mass) = project(stiffness, mass, space);
        let stiffness_norm = stiffness.max_abs();
        let mass_norm = mass.max_abs();
        Self { stiffness, mass, space, stiffness_norm, mass_norm }
    }

    pub fn from_system(system: &FormSystem, space: &'a ConstraintSpace) -> Self {
        Self::new(&system.stiffness, &system.mass, space)
    }

    pub fn dimension(&self) -> usize {
        self.stiffness.nrows()
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn space(&self) -> &ConstraintSpace {
        self.space
    }

    /// Every eigenpair of `(A − shift·B, B)` by a dense factorization.
    pub fn solve_dense(&self, t: f64, shift: f64) -> Result<EigenSolution> {
        let m = self.dimension();
        let a = self.stiffness.to_dense() - self.mass.to_dense() * shift;
        let b = self.mass.to_dense();
        let (vals, vecs) = generalized_symmetric_eigen(&a, &b)?;
        let coords: Vec<Vec<f64>> = (0..m).map(|k| vecs.column(k).iter().copied().collect()).collect();
        Ok(self.finish(t, shift, vals.iter().copied().collect(), coords, 0, true))
    }

    /// Eigenvalues of `(A − shift·B, B)` nearest zero, with their global indices.
    /// Small pencils are solved completely.
    pub fn solve_window(&self, t: f64, shift: f64, opts: &WindowOptions, warm: Option<&[Vec<f64>]>) -> Result<EigenSolution> {
        if self.dimension() <= opts.dense_threshold || self.dimension() < 4 * (opts.wanted + opts.guard) {
            return self.solve_dense(t, shift);
        }
        let (vals, coords, first) = window::shift_invert(self, shift, opts, warm)?;
        Ok(self.finish(t, shift, vals, coords, first, false))
    }

    /// Number of eigenvalues of the pencil strictly below `level`, from the inertia
    /// of `A − level·B`. `None` when the factorization breaks down at that level.
    pub fn count_below(&self, level: f64) -> Option<usize> {
        let shifted = self.stiffness.linear_combination(1.0, &self.mass, -level);
        let ldl = SkylineLdl::factor(&shifted, &SkylineLdl::ordering(&shifted)).ok()?;
        Some(ldl.negative_count())
    }

    fn finish(
        &self,
        t: f64,
        shift: f64,
        eigenvalues: Vec<f64>,
        coords: Vec<Vec<f64>>,
        first_index: usize,
        complete: bool,
    ) -> EigenSolution {
        let residuals = coords
            .iter()
            .zip(&eigenvalues)
            .map(|(x, &lam)| {
                let ax = self.stiffness.mul_vec(x);
                let bx = self.mass.mul_vec(x);
                let r = ax
                    .iter()
                    .zip(&bx)
                    .map(|(a, b)| (a - (lam + shift) * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                r / ((self.stiffness_norm + (lam + shift).abs() * self.mass_norm) * xn).max(f64::MIN_POSITIVE)
            })
            .collect();
        let vectors = coords.iter().map(|c| self.space.lift(c)).collect();
        EigenSolution {
            t,
            shift,
            eigenvalues,
            vectors,
            coords,
            first_index,
            dimension: self.dimension(),
            complete,
            residuals,
            stiffness_norm: self.stiffness_norm,
        }
    }
}

fn project(stiffness: &CsrMatrix, mass: &CsrMatrix, space: &ConstraintSpace) -> (CsrMatrix, CsrMatrix) {
    let basis = space.basis();
    if basis.nrows() == basis.ncols() && basis.nnz() == basis.nrows() && (0..basis.nrows()).all(|i| basis.get(i, i) == 1.0) {
        return (stiffness.clone(), mass.clone());
    }
    let sym = |m: CsrMatrix| {
        let t = m.transpose();
        m.linear_combination(0.5, &t, 0.5)
    };
    (sym(stiffness.congruence(basis)), sym(mass.congruence(basis)))
}

/// Eigenpairs of a constrained pencil, either complete or a contiguous window of
/// the spectrum with known global indices.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub t: f64,
    /// `λ` subtracted from every eigenvalue (`D − λM`).
    pub shift: f64,
    eigenvalues: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    coords: Vec<Vec<f64>>,
    first_index: usize,
    dimension: usize,
    complete: bool,
    residuals: Vec<f64>,
    stiffness_norm: f64,
}

impl EigenSolution {
    /// Ascending eigenvalues of the shifted pencil.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// M-orthonormal eigenvectors in full finite-element coordinates.
    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// The same vectors in subspace coordinates.
    pub fn subspace_vectors(&self) -> &[Vec<f64>] {
        &self.coords
    }

    /// Global (ascending, zero-based) index of `eigenvalues()[0]`.
    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Dimension of the admissible subspace.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn relative_residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m: f64, r| m.max(*r))
    }

    /// `‖BᵀDB‖_max` of the unshifted pencil.
    pub fn stiffness_norm(&self) -> f64 {
        self.stiffness_norm
    }

    /// Default kernel tolerance `1e−6·‖D_t‖_max`.
    pub fn default_kernel_tol(&self) -> f64 {
        KERNEL_REL_TOL * self.stiffness_norm
    }

    /// Eigenvalue with global index `k`, if it lies in the computed window.
    pub fn by_global_index(&self, k: usize) -> Option<f64> {
        k.checked_sub(self.first_index).and_then(|i| self.eigenvalues.get(i).copied())
    }

    /// Whether counts at `level` are exact: the window reaches past `level` on both
    /// sides, or the spectrum is complete.
    pub fn covers(&self, level: f64) -> bool {
        if self.complete {
            return true;
        }
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(&lo), Some(&hi)) => lo < level && level < hi,
            _ => false,
        }
    }

    /// Largest deviation of `VᵀMV` from the identity.
    pub fn orthonormality_defect(&self, pencil: &Pencil<'_>) -> f64 {
        let mv: Vec<Vec<f64>> = self.coords.iter().map(|x| pencil.mass.mul_vec(x)).collect();
        let mut worst: f64 = 0.0;
        for (i, x) in self.coords.iter().enumerate() {
            for (j, y) in mv.iter().enumerate() {
                let g: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// Dense matrix whose columns are the full-coordinate eigenvectors.
    pub fn vector_matrix(&self) -> DMatrix<f64> {
        let n = self.vectors.first().map_or(0, Vec::len);
        DMatrix::from_fn(n, self.vectors.len(), |r, c| self.vectors[c][r])
    }
}

/// Morse count with the eigenvalues too close to the level to classify.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseCount {
    pub count: usize,
    pub borderline: Vec<f64>,
}

/// Number of eigenvalues below `level − tol`; those within `tol` of `level` are
/// reported as borderline and not counted.
pub fn morse_index(solution: &EigenSolution, level: f64, tol: f64) -> MorseCount {
    let below = solution.eigenvalues.iter().filter(|&&l| l < level - tol).count();
    let borderline = solution.eigenvalues.iter().copied().filter(|l| (l - level).abs() <= tol).collect();
    MorseCount { count: solution.first_index + below, borderline }
}

/// M-orthonormal eigenvectors with `|λ| ≤ tol`.
pub fn kernel_basis(solution: &EigenSolution, tol: f64) -> Vec<Vec<f64>> {
    solution
        .eigenvalues
        .iter()
        .zip(&solution.vectors)
        .filter(|(l, _)| l.abs() <= tol)
        .map(|(_, v)| v.clone())
        .collect()
}

/// Dense complete solve of a system restricted to `space`.
pub fn solve_pencil(system: &FormSystem, space: &ConstraintSpace) -> Result<EigenSolution> {
    Pencil::from_system(system, space).solve_dense(system.t, 0.0)
}

#[cfg(test)]
mod tests;
