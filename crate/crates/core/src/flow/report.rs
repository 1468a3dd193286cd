use std::fmt::Write as _;

use crate::assembly::BcKind;
use crate::coeff::neumann_condition_margin;
use crate::error::{Error, Result};
use crate::mesh::FamilyKind;

use super::{locate_crossing, maslov_index, scan_trajectories, Crossing, CrossingPosition, GridSample, Problem};

/// Offset on either side of a crossing for the Morse-jump check.
pub const JUMP_DELTA: f64 = 1e-2;

/// Result of a full flow run over `[a, b]`.
#[derive(Debug, Clone)]
pub struct FlowReport {
    pub lambda: f64,
    pub t_range: (f64, f64),
    /// Grid size after any automatic refinement.
    pub n_samples: usize,
    pub morse_a: usize,
    pub morse_b: usize,
    pub crossings: Vec<Crossing>,
    /// Sum of crossing contributions, using the nondegenerate part of degenerate forms.
    pub maslov: i64,
    /// `Mas − (Mor_a − Mor_b)`.
    pub residual: i64,
    pub samples: Vec<GridSample>,
    pub warnings: Vec<String>,
    /// `(t_star, zero count)` of degenerate crossings.
    pub degenerate: Vec<(f64, usize)>,
    pub verified: bool,
}

impl FlowReport {
    /// Maslov index, failing on degenerate crossings unless allowed.
    pub fn maslov_checked(&self, allow_degenerate: bool) -> Result<i64> {
        maslov_index(&self.crossings, allow_degenerate).map(|(m, _)| m)
    }

    pub fn interior_kernel_sum(&self) -> usize {
        self.crossings.iter().filter(|c| c.position == CrossingPosition::Interior).map(|c| c.kernel_dim).sum()
    }

    /// Eigenvalue trajectories as CSV, one column per global eigenvalue index.
    pub fn trajectories_csv(&self) -> String {
        let lo = self.samples.iter().map(|s| s.first_index).min().unwrap_or(0);
        let hi = self.samples.iter().map(|s| s.first_index + s.eigenvalues.len()).max().unwrap_or(0);
        let mut out = String::from("t");
        for k in lo..hi {
            let _ = write!(out, ",lambda_{}", k + 1);
        }
        out.push('\n');
        for s in &self.samples {
            let _ = write!(out, "{:.12e}", s.t);
            for k in lo..hi {
                match s.value(k) {
                    Some(v) => {
                        let _ = write!(out, ",{v:.12e}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the scan, locates every conjugate time and assembles the crossing forms.
///
/// A suspected double crossing doubles the grid (keeping the old samples) up to
/// `tolerances.grid_refine_max` times before the error is returned.
pub fn run_flow(problem: &Problem, n_samples: usize) -> Result<FlowReport> {
    let (a, b) = problem.t_range();
    let mut warnings = Vec::new();
    let mut n = n_samples;
    let mut attempts = 0;
    let scan = loop {
        match scan_trajectories(problem, n) {
            Ok(scan) => break scan,
            Err(Error::RefineGrid { t_lo, t_hi }) if attempts < problem.tolerances.grid_refine_max && n >= super::MIN_SAMPLES => {
                warnings.push(format!("suspected double crossing in [{t_lo:.6}, {t_hi:.6}]; grid refined to {} samples", 2 * n - 1));
                n = 2 * n - 1;
                attempts += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let bisect_tol = problem.bisect_tol();
    let first = &scan.samples[0];
    let last = scan.samples.last().expect("scan has samples");
    let mut crossings = Vec::new();

    if !first.borderline().is_empty() {
        let sol = &scan.endpoints.0;
        crossings.push(problem.crossing_at(sol, problem.kernel_tol(sol), CrossingPosition::Initial)?);
    }
    for bracket in &scan.brackets {
        let mut pending = bracket.indices.clone();
        while let Some(&k) = pending.first() {
            let sol = locate_crossing(problem, bracket.t_lo, bracket.t_hi, k, None)?;
            let tol = problem.cluster_tol(&sol);
            let gathered: Vec<usize> = sol
                .eigenvalues()
                .iter()
                .enumerate()
                .filter(|(_, l)| l.abs() <= tol)
                .map(|(i, _)| sol.first_index() + i)
                .collect();
            let outside: Vec<usize> = gathered.iter().copied().filter(|g| !bracket.indices.contains(g)).collect();
            if !outside.is_empty() {
                warnings.push(format!(
                    "kernel at t = {:.9} includes eigenvalue(s) {outside:?} that do not change sign on the grid",
                    sol.t
                ));
            }
            pending.retain(|p| *p != k && !gathered.contains(p));
            let position = if sol.t - a <= bisect_tol {
                CrossingPosition::Initial
            } else if b - sol.t <= bisect_tol {
                CrossingPosition::Terminal
            } else {
                CrossingPosition::Interior
            };
            crossings.push(problem.crossing_at(&sol, tol, position)?);
        }
    }
    if !last.borderline().is_empty() {
        let sol = &scan.endpoints.1;
        crossings.push(problem.crossing_at(sol, problem.kernel_tol(sol), CrossingPosition::Terminal)?);
    }
    crossings.sort_by(|x, y| x.t_star.total_cmp(&y.t_star));
    for c in &crossings {
        warnings.extend(c.warnings.iter().cloned());
    }

    let morse_a = first.morse_index();
    let morse_b = last.morse_index();
    let (maslov, nondegenerate) = maslov_index(&crossings, true)?;
    let degenerate: Vec<(f64, usize)> =
        crossings.iter().filter(|c| c.signature.z > 0).map(|c| (c.t_star, c.signature.z)).collect();
    let residual = maslov - (morse_a as i64 - morse_b as i64);
    Ok(FlowReport {
        lambda: problem.lambda(),
        t_range: (a, b),
        n_samples: n,
        morse_a,
        morse_b,
        crossings,
        maslov,
        residual,
        samples: scan.samples,
        warnings,
        degenerate,
        verified: residual == 0 && (nondegenerate || problem.allow_degenerate),
    })
}

/// Morse index just before and after an interior crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpCheck {
    pub t_star: f64,
    pub before: usize,
    pub after: usize,
    /// `q − p` of the crossing form.
    pub expected: i64,
}

impl JumpCheck {
    pub fn holds(&self) -> bool {
        self.after as i64 - self.before as i64 == self.expected
    }
}

/// Identity checks derived from a flow report.
#[derive(Debug, Clone, Default)]
pub struct Audit {
    pub residual: i64,
    /// `(t_star, relative defect)` between volume and boundary crossing forms.
    pub cross_formula: Vec<(f64, f64)>,
    /// Every Dirichlet crossing on an expanding family is negative definite.
    pub dirichlet_monotone: Option<bool>,
    /// `Mor_b = Mor_a + Σ_{t ∈ [a, b)} dim ker`.
    pub smale: Option<bool>,
    /// `min (λ − V − ½ x·∇V)` over the vertices of `Ω_b`.
    pub neumann_margin: Option<f64>,
    /// Every Neumann crossing is negative definite when the margin is positive.
    pub neumann_monotone: Option<bool>,
    /// `Mor_b = Σ_{t ∈ (a, b)} dim ker + 1` when the margin is positive and `Mor_a = 1`.
    pub neumann_plus_one: Option<bool>,
    pub jumps: Vec<JumpCheck>,
    /// Morse index along the grid never decreases.
    pub morse_nondecreasing: bool,
}

impl Audit {
    pub fn max_cross_formula_defect(&self) -> Option<f64> {
        self.cross_formula.iter().map(|&(_, d)| d).reduce(f64::max)
    }

    pub fn passed(&self) -> bool {
        self.residual == 0
            && [self.dirichlet_monotone, self.smale, self.neumann_monotone, self.neumann_plus_one]
                .iter()
                .all(|c| c.unwrap_or(true))
            && self.jumps.iter().all(JumpCheck::holds)
    }
}

fn expanding(kind: &FamilyKind, range: (f64, f64)) -> bool {
    match kind {
        FamilyKind::StarScale { .. } | FamilyKind::RadialScale { .. } => range.0 > 0.0,
        FamilyKind::Affine { .. } => false,
    }
}

/// Checks the monotonicity, Smale and Neumann identities that apply to the problem.
pub fn verify_identities(problem: &Problem, report: &FlowReport) -> Result<Audit> {
    let family = problem.family();
    let (a, b) = report.t_range;
    let mut audit = Audit {
        residual: report.residual,
        cross_formula: report.crossings.iter().filter_map(|c| c.cross_formula_defect().map(|d| (c.t_star, d))).collect(),
        morse_nondecreasing: report.samples.windows(2).all(|w| w[0].morse_index() <= w[1].morse_index()),
        ..Audit::default()
    };
    let negative_definite = |c: &Crossing| c.signature.q == c.kernel_dim;
    let laplacian = problem.is_laplacian_type();

    if laplacian && *problem.bc() == BcKind::Dirichlet && expanding(family.kind(), (a, b)) {
        audit.dirichlet_monotone = Some(report.crossings.iter().all(negative_definite));
        let sum: usize =
            report.crossings.iter().filter(|c| c.position != CrossingPosition::Terminal).map(|c| c.kernel_dim).sum();
        audit.smale = Some(report.morse_b == report.morse_a + sum);
    }

    let origin_star = matches!(family.kind(), FamilyKind::StarScale { center } if center.norm() == 0.0);
    if laplacian && *problem.bc() == BcKind::Neumann && origin_star {
        let margin = neumann_condition_margin(problem.potential(), problem.lambda(), &problem.assembler().image_vertices(b));
        audit.neumann_margin = Some(margin);
        if margin > 0.0 {
            audit.neumann_monotone = Some(report.crossings.iter().all(negative_definite));
            if report.morse_a == 1 {
                audit.neumann_plus_one = Some(report.morse_b == report.interior_kernel_sum() + 1);
            }
        }
    }

    for c in report.crossings.iter().filter(|c| c.position == CrossingPosition::Interior) {
        let lo = (c.t_star - JUMP_DELTA).max(a);
        let hi = (c.t_star + JUMP_DELTA).min(b);
        let before = problem.morse_index(lo)?.count;
        let after = problem.morse_index(hi)?.count;
        audit.jumps.push(JumpCheck {
            t_star: c.t_star,
            before,
            after,
            expected: c.signature.q as i64 - c.signature.p as i64,
        });
    }
    Ok(audit)
}
