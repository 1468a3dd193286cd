//! Eigenvalue trajectories in `t`, conjugate times, crossing forms, and the index
//! bookkeeping `Mas = Mor_a − Mor_b`.

mod crossing;
mod report;

use std::borrow::Cow;

use crate::assembly::{constraint_space, BcKind, BoundaryMeasure, ConstraintSpace, FormAssembler};
use crate::coeff::{CoefficientSet, ScalarField};
use crate::error::{Error, Result};
use crate::mesh::{DiffeoFamily, Mesh};
use crate::spectral::{morse_index, EigenSolution, MorseCount, Pencil, WindowOptions, CLUSTER_FACTOR, KERNEL_REL_TOL};

pub use crossing::{
    crossing_form_boundary_dirichlet, crossing_form_boundary_robin, crossing_form_volume, maslov_index, signature,
    Crossing, CrossingPosition, Signature,
};
pub use report::{run_flow, verify_identities, Audit, FlowReport, JumpCheck};

/// Smallest admissible number of grid samples.
pub const MIN_SAMPLES: usize = 8;
/// Default root-finding tolerance relative to `b − a`.
pub const BISECT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Kernel tolerance relative to `‖D_t‖_max`.
    pub kernel_rel: f64,
    /// Multiplicity clustering tolerance as a multiple of the kernel tolerance.
    pub cluster_factor: f64,
    /// Crossing localization tolerance relative to `b − a`.
    pub bisect_rel: f64,
    /// Grid doublings attempted when a double crossing is suspected.
    pub grid_refine_max: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { kernel_rel: KERNEL_REL_TOL, cluster_factor: CLUSTER_FACTOR, bisect_rel: BISECT_REL_TOL, grid_refine_max: 2 }
    }
}

/// A deforming-domain eigenvalue problem: the form of `L − λ` on `Ω_t = φ_t(Ω)`
/// under a boundary condition, pulled back to the reference mesh.
#[derive(Debug, Clone)]
pub struct Problem {
    assembler: FormAssembler,
    bc: BcKind,
    measure: BoundaryMeasure,
    space: ConstraintSpace,
    potential: ScalarField,
    lambda: f64,
    laplacian: bool,
    pub tolerances: Tolerances,
    pub window: WindowOptions,
    pub allow_degenerate: bool,
}

impl Problem {
    /// `−Δ + V − λ`.
    pub fn schrodinger(mesh: Mesh, potential: ScalarField, family: DiffeoFamily, bc: BcKind, lambda: f64) -> Result<Self> {
        Self::new(mesh, CoefficientSet::schrodinger(potential), family, bc, lambda)
    }

    pub fn new(mesh: Mesh, coeffs: CoefficientSet, family: DiffeoFamily, bc: BcKind, lambda: f64) -> Result<Self> {
        family.validate_on(&mesh)?;
        let space = constraint_space(&mesh, &bc, BoundaryMeasure::Reference, None)?;
        let potential = coeffs.d().clone();
        let laplacian = coeffs.is_laplacian_type();
        let assembler = FormAssembler::new(mesh, coeffs.shifted(lambda), family, &bc)?;
        Ok(Self {
            assembler,
            bc,
            measure: BoundaryMeasure::Reference,
            space,
            potential,
            lambda,
            laplacian,
            tolerances: Tolerances::default(),
            window: WindowOptions::default(),
            allow_degenerate: false,
        })
    }

    /// Boundary measure of the mean-zero condition; the induced measure makes the
    /// admissible subspace depend on `t`.
    pub fn with_measure(mut self, measure: BoundaryMeasure) -> Self {
        self.measure = measure;
        self
    }

    pub fn assembler(&self) -> &FormAssembler {
        &self.assembler
    }

    pub fn mesh(&self) -> &Mesh {
        self.assembler.mesh()
    }

    pub fn family(&self) -> &DiffeoFamily {
        self.assembler.family()
    }

    pub fn bc(&self) -> &BcKind {
        &self.bc
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    pub fn is_laplacian_type(&self) -> bool {
        self.laplacian
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn t_range(&self) -> (f64, f64) {
        self.family().t_range()
    }

    pub fn bisect_tol(&self) -> f64 {
        let (a, b) = self.t_range();
        self.tolerances.bisect_rel * (b - a)
    }

    pub fn space_at(&self, t: f64) -> Result<Cow<'_, ConstraintSpace>> {
        if self.measure == BoundaryMeasure::Induced && self.bc == BcKind::MeanZero {
            let family = self.family();
            Ok(Cow::Owned(constraint_space(self.mesh(), &self.bc, self.measure, Some((family, t)))?))
        } else {
            Ok(Cow::Borrowed(&self.space))
        }
    }

    /// Eigenvalues of the pencil `(D_t, M)` nearest zero, warm-started from `warm`.
    pub fn solve(&self, t: f64, warm: Option<&[Vec<f64>]>) -> Result<EigenSolution> {
        let space = self.space_at(t)?;
        let stiffness = self.assembler.stiffness(t)?;
        let pencil = Pencil::new(&stiffness, self.assembler.mass(), &space);
        pencil.solve_window(t, 0.0, &self.window, warm)
    }

    pub fn kernel_tol(&self, solution: &EigenSolution) -> f64 {
        self.tolerances.kernel_rel * solution.stiffness_norm()
    }

    pub fn cluster_tol(&self, solution: &EigenSolution) -> f64 {
        self.tolerances.cluster_factor * self.kernel_tol(solution)
    }

    /// Morse index of `L_{X,t} − λ` with borderline eigenvalues reported.
    pub fn morse_index(&self, t: f64) -> Result<MorseCount> {
        let sol = self.solve(t, None)?;
        Ok(morse_index(&sol, 0.0, self.kernel_tol(&sol)))
    }

    /// Builds the crossing at `t_star` from the eigenvectors with `|λ| ≤ tol`.
    pub fn crossing_at(&self, solution: &EigenSolution, tol: f64, position: CrossingPosition) -> Result<Crossing> {
        let t = solution.t;
        let mut kernel = Vec::new();
        let mut kernel_eigenvalues = Vec::new();
        for (lam, v) in solution.eigenvalues().iter().zip(solution.eigenvectors()) {
            if lam.abs() <= tol {
                kernel.push(v.clone());
                kernel_eigenvalues.push(*lam);
            }
        }
        let d_dt = self.assembler.stiffness_dt(t)?;
        let q_volume = crossing_form_volume(&d_dt, &kernel);
        let zero_tol = 1e-8 * d_dt.max_abs().max(solution.stiffness_norm());
        let sig = signature(&q_volume, zero_tol);
        let mut warnings = Vec::new();
        let q_boundary = if !self.laplacian {
            None
        } else {
            match &self.bc {
                BcKind::Dirichlet => {
                    let (q, silent) = crossing_form_boundary_dirichlet(self.mesh(), self.family(), &self.bc, t, &kernel)?;
                    for i in silent {
                        warnings.push(format!("kernel vector {i} at t = {t:.9} has vanishing boundary flux"));
                    }
                    Some(q)
                }
                BcKind::Neumann | BcKind::Robin(_) => {
                    match crossing_form_boundary_robin(
                        self.mesh(),
                        self.family(),
                        &self.bc,
                        t,
                        &kernel,
                        &self.potential,
                        self.lambda,
                    ) {
                        Ok(q) => Some(q),
                        Err(Error::UnsupportedGeometry(msg)) => {
                            warnings.push(format!("no boundary crossing form at t = {t:.9}: {msg}"));
                            None
                        }
                        Err(e) => return Err(e),
                    }
                }
                BcKind::LocallyConstant | BcKind::MeanZero => None,
            }
        };
        if sig.z > 0 {
            warnings.push(format!("degenerate crossing at t = {t:.9}: {} zero direction(s)", sig.z));
        }
        Ok(Crossing {
            t_star: t,
            kernel_dim: kernel.len(),
            kernel_eigenvalues,
            kernel,
            q_volume,
            q_boundary,
            signature: sig,
            position,
            warnings,
        })
    }
}

/// Eigenvalues near zero at one grid point.
#[derive(Debug, Clone)]
pub struct GridSample {
    pub t: f64,
    /// Global index of `eigenvalues[0]`.
    pub first_index: usize,
    pub eigenvalues: Vec<f64>,
    /// `dλ/dt = vᵀ D_t′ v` for each eigenvalue.
    pub slopes: Vec<f64>,
    /// Number of negative eigenvalues.
    pub negative: usize,
    pub kernel_tol: f64,
}

impl GridSample {
    fn value(&self, k: usize) -> Option<f64> {
        k.checked_sub(self.first_index).and_then(|i| self.eigenvalues.get(i).copied())
    }

    fn slope(&self, k: usize) -> Option<f64> {
        k.checked_sub(self.first_index).and_then(|i| self.slopes.get(i).copied())
    }

    /// Global indices with `|λ| ≤ kernel_tol`.
    pub fn borderline(&self) -> Vec<usize> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| l.abs() <= self.kernel_tol)
            .map(|(i, _)| self.first_index + i)
            .collect()
    }

    /// Negative eigenvalues beyond the kernel tolerance.
    pub fn morse_index(&self) -> usize {
        self.first_index + self.eigenvalues.iter().filter(|&&l| l < -self.kernel_tol).count()
    }
}

/// An interval of the grid in which the listed eigenvalues change sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub t_lo: f64,
    pub t_hi: f64,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Scan {
    pub samples: Vec<GridSample>,
    pub brackets: Vec<Bracket>,
    /// Solutions at `a` and `b`.
    pub endpoints: (EigenSolution, EigenSolution),
}

fn sample_from(problem: &Problem, sol: &EigenSolution) -> Result<GridSample> {
    let d_dt = problem.assembler.stiffness_dt(sol.t)?;
    let slopes = sol.eigenvectors().iter().map(|v| d_dt.bilinear(v, v)).collect();
    Ok(GridSample {
        t: sol.t,
        first_index: sol.first_index(),
        eigenvalues: sol.eigenvalues().to_vec(),
        slopes,
        negative: sol.first_index() + sol.eigenvalues().iter().filter(|&&l| l < 0.0).count(),
        kernel_tol: problem.kernel_tol(sol),
    })
}

/// Solves on `n_samples` equispaced parameters and brackets every sign change.
///
/// Eigenvalues are tracked by global index, so eigenvalue `k` is negative at a
/// sample exactly when `k` is below that sample's negative count. Eigenvalues within
/// the kernel tolerance at `a` or `b` are endpoint crossings and take the sign of
/// their neighbor. A same-sign pair whose cubic Hermite interpolant (values and
/// Hellmann–Feynman slopes) changes sign is re-solved at the suspicious parameter;
/// a confirmed opposite sign is a refine-grid error.
pub fn scan_trajectories(problem: &Problem, n_samples: usize) -> Result<Scan> {
    let (a, b) = problem.t_range();
    if n_samples < MIN_SAMPLES {
        return Err(Error::RefineGrid { t_lo: a, t_hi: b });
    }
    let mut samples = Vec::with_capacity(n_samples);
    let mut warm: Option<Vec<Vec<f64>>> = None;
    let mut first = None;
    let mut last = None;
    for i in 0..n_samples {
        let t = if i + 1 == n_samples { b } else { a + (b - a) * i as f64 / (n_samples - 1) as f64 };
        let sol = problem.solve(t, warm.as_deref())?;
        samples.push(sample_from(problem, &sol)?);
        warm = Some(sol.subspace_vectors().to_vec());
        if i == 0 {
            first = Some(sol);
        } else if i + 1 == n_samples {
            last = Some(sol);
        }
    }
    let n = samples.len();
    let start_border = samples[0].borderline();
    let end_border = samples[n - 1].borderline();
    let negative = |i: usize, k: usize| -> bool {
        if i == 0 && start_border.contains(&k) {
            return k < samples[1].negative;
        }
        if i == n - 1 && end_border.contains(&k) {
            return k < samples[n - 2].negative;
        }
        k < samples[i].negative
    };

    let mut brackets = Vec::new();
    for i in 0..n - 1 {
        let (s0, s1) = (&samples[i], &samples[i + 1]);
        let lo = s0.negative.min(s1.negative).saturating_sub(2);
        let hi = s0.negative.max(s1.negative) + 2;
        let indices: Vec<usize> = (lo..hi).filter(|&k| negative(i, k) != negative(i + 1, k)).collect();
        if !indices.is_empty() {
            brackets.push(Bracket { t_lo: s0.t, t_hi: s1.t, indices: indices.clone() });
        }
        check_double_crossing(problem, s0, s1, &indices)?;
    }
    Ok(Scan { samples, brackets, endpoints: (first.expect("grid has a first point"), last.expect("grid has a last point")) })
}

fn check_double_crossing(problem: &Problem, s0: &GridSample, s1: &GridSample, changing: &[usize]) -> Result<()> {
    let h = s1.t - s0.t;
    let common_lo = s0.first_index.max(s1.first_index);
    let common_hi = (s0.first_index + s0.eigenvalues.len()).min(s1.first_index + s1.eigenvalues.len());
    for k in common_lo..common_hi {
        if changing.contains(&k) {
            continue;
        }
        let (y0, y1) = (s0.value(k).unwrap(), s1.value(k).unwrap());
        if (y0 < 0.0) != (y1 < 0.0) || y0.abs() <= s0.kernel_tol || y1.abs() <= s1.kernel_tol {
            continue;
        }
        let (m0, m1) = (s0.slope(k).unwrap() * h, s1.slope(k).unwrap() * h);
        let hermite = |s: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
        };
        let threshold = 10.0 * s0.kernel_tol.max(s1.kernel_tol);
        let suspicious = (1..32).map(|j| j as f64 / 32.0).find(|&s| {
            let v = hermite(s);
            (v < 0.0) != (y0 < 0.0) && v.abs() > threshold
        });
        if let Some(s) = suspicious {
            let sol = problem.solve(s0.t + s * h, None)?;
            if let Some(v) = sol.by_global_index(k) {
                if (v < 0.0) != (y0 < 0.0) && v.abs() > threshold {
                    return Err(Error::RefineGrid { t_lo: s0.t, t_hi: s1.t });
                }
            }
        }
    }
    Ok(())
}

/// Refines a sign change of eigenvalue `k` inside `[t_lo, t_hi]`.
///
/// Uses the Illinois variant of regula falsi, with a bisection step whenever the
/// bracket fails to halve twice in a row, until the bracket is narrower than a
/// quarter of the bisection tolerance. Returns the solution at the endpoint of the
/// final bracket with the smaller `|λ_k|`.
pub fn locate_crossing(problem: &Problem, t_lo: f64, t_hi: f64, k: usize, warm: Option<&[Vec<f64>]>) -> Result<EigenSolution> {
    let eval = |t: f64, warm: Option<&[Vec<f64>]>| -> Result<(f64, EigenSolution)> {
        let sol = problem.solve(t, warm)?;
        let v = sol.by_global_index(k).ok_or_else(|| Error::NumericalBreakdown {
            pivot: 0,
            detail: format!("eigenvalue {k} left the computed window at t = {t}"),
        })?;
        Ok((v, sol))
    };
    let (mut lo, mut hi) = (t_lo, t_hi);
    let (mut f_lo, mut sol_lo) = eval(lo, warm)?;
    let (mut f_hi, mut sol_hi) = eval(hi, Some(sol_lo.subspace_vectors()))?;
    if f_lo == 0.0 {
        return Ok(sol_lo);
    }
    if f_hi == 0.0 {
        return Ok(sol_hi);
    }
    if (f_lo < 0.0) == (f_hi < 0.0) {
        return Err(Error::InvalidBracket { t_lo, t_hi });
    }
    let target = 0.25 * problem.bisect_tol();
    let mut side = 0i32;
    let mut slow = 0;
    let (mut g_lo, mut g_hi) = (f_lo, f_hi);
    for _ in 0..200 {
        let width = hi - lo;
        if width <= target {
            break;
        }
        let mut t = if slow >= 2 { 0.5 * (lo + hi) } else { (lo * g_hi - hi * g_lo) / (g_hi - g_lo) };
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let warm_from = if (t - lo) < (hi - t) { &sol_lo } else { &sol_hi };
        let (f, sol) = eval(t, Some(warm_from.subspace_vectors()))?;
        if f == 0.0 {
            return Ok(sol);
        }
        if (f < 0.0) == (f_lo < 0.0) {
            lo = t;
            f_lo = f;
            g_lo = f;
            sol_lo = sol;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            f_hi = f;
            g_hi = f;
            sol_hi = sol;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
        if hi - lo > 0.5 * width {
            slow += 1;
        } else {
            slow = 0;
        }
    }
    Ok(if f_lo.abs() <= f_hi.abs() { sol_lo } else { sol_hi })
}
