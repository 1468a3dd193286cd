use crate::coeff::ScalarField;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{DiffeoFamily, Mesh};

/// Boundary conditions realized as subspaces of the P1 space.
#[derive(Debug, Clone, PartialEq)]
pub enum BcKind {
    /// Zero boundary values.
    Dirichlet,
    /// Natural condition, full space.
    Neumann,
    /// Constant on each boundary component.
    LocallyConstant,
    /// Zero boundary mean on each component.
    MeanZero,
    /// Natural condition with the boundary term `∫ β u v dμ_t` added to the form.
    Robin(ScalarField),
}

impl BcKind {
    pub fn parse(name: &str, beta: Option<ScalarField>) -> Result<Self> {
        match (name, beta) {
            ("dirichlet", _) => Ok(BcKind::Dirichlet),
            ("neumann", _) => Ok(BcKind::Neumann),
            ("locally_constant", _) => Ok(BcKind::LocallyConstant),
            ("mean_zero", _) => Ok(BcKind::MeanZero),
            ("robin", Some(beta)) => Ok(BcKind::Robin(beta)),
            ("robin", None) => Err(Error::InvalidArgument("robin condition needs a beta field".into())),
            (other, _) => Err(Error::InvalidArgument(format!("unknown boundary condition '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Neumann => "neumann",
            BcKind::LocallyConstant => "locally_constant",
            BcKind::MeanZero => "mean_zero",
            BcKind::Robin(_) => "robin",
        }
    }

    /// The Robin coefficient, zero for a pure Neumann condition.
    pub fn robin_beta(&self) -> Option<ScalarField> {
        match self {
            BcKind::Robin(beta) => Some(beta.clone()),
            BcKind::Neumann => Some(ScalarField::zero()),
            _ => None,
        }
    }
}

/// Boundary measure used by the mean-zero constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMeasure {
    /// Reference facet lengths, i.e. the pulled-back measure.
    #[default]
    Reference,
    /// Facet lengths of the deformed boundary at the current `t`.
    Induced,
}

/// Orthonormal basis of the admissible subspace together with the constraint rows
/// it annihilates.
#[derive(Debug, Clone)]
pub struct ConstraintSpace {
    basis: CsrMatrix,
    constraints: CsrMatrix,
    kind: BcKind,
    measure: BoundaryMeasure,
}

impl ConstraintSpace {
    pub fn basis(&self) -> &CsrMatrix {
        &self.basis
    }

    /// One row per linear constraint (possibly linearly dependent).
    pub fn constraints(&self) -> &CsrMatrix {
        &self.constraints
    }

    pub fn kind(&self) -> &BcKind {
        &self.kind
    }

    pub fn measure(&self) -> BoundaryMeasure {
        self.measure
    }

    pub fn n_dof(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }

    /// Full FE coefficients of a subspace vector.
    pub fn lift(&self, coords: &[f64]) -> Vec<f64> {
        self.basis.mul_vec(coords)
    }

    /// Subspace coordinates `Bᵀx`.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        for (i, xi) in x.iter().enumerate().take(self.n_dof()) {
            let (cols, vals) = self.basis.row(i);
            for (c, v) in cols.iter().zip(vals) {
                out[*c] += v * xi;
            }
        }
        out
    }

    /// Largest `|BᵀB − I|` entry.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.basis.transpose().matmul(&self.basis);
        let eye = CsrMatrix::identity(self.dimension());
        gram.linear_combination(1.0, &eye, -1.0).max_abs()
    }

    /// Largest entry of `C B`.
    pub fn constraint_defect(&self) -> f64 {
        if self.constraints.nrows() == 0 {
            return 0.0;
        }
        self.constraints.matmul(&self.basis).max_abs()
    }
}

/// Builds the admissible subspace for `kind`. The family and `t` only matter for
/// the mean-zero condition under [`BoundaryMeasure::Induced`].
pub fn constraint_space(
    mesh: &Mesh,
    kind: &BcKind,
    measure: BoundaryMeasure,
    family: Option<(&DiffeoFamily, f64)>,
) -> Result<ConstraintSpace> {
    let n = mesh.n_vertices();
    let on_boundary = mesh.is_boundary_vertex();
    let interior: Vec<usize> = (0..n).filter(|&v| !on_boundary[v]).collect();
    let components = mesh.component_vertices();
    let mut basis = Vec::new();
    let mut rows = Vec::new();
    let mut n_rows = 0;
    let push_identity = |vs: &[usize], basis: &mut Vec<(usize, usize, f64)>, col: &mut usize| {
        for &v in vs {
            basis.push((v, *col, 1.0));
            *col += 1;
        }
    };
    let mut col = 0;
    match kind {
        BcKind::Neumann | BcKind::Robin(_) => {
            let all: Vec<usize> = (0..n).collect();
            push_identity(&all, &mut basis, &mut col);
        }
        BcKind::Dirichlet => {
            push_identity(&interior, &mut basis, &mut col);
            for v in (0..n).filter(|&v| on_boundary[v]) {
                rows.push((n_rows, v, 1.0));
                n_rows += 1;
            }
        }
        BcKind::LocallyConstant => {
            push_identity(&interior, &mut basis, &mut col);
            for comp in &components {
                let s = 1.0 / (comp.len() as f64).sqrt();
                for &v in comp {
                    basis.push((v, col, s));
                }
                col += 1;
                for pair in comp.windows(2) {
                    rows.push((n_rows, pair[0], 1.0));
                    rows.push((n_rows, pair[1], -1.0));
                    n_rows += 1;
                }
            }
        }
        BcKind::MeanZero => {
            push_identity(&interior, &mut basis, &mut col);
            let weights = boundary_weights(mesh, measure, family)?;
            for comp in &components {
                let w: Vec<f64> = comp.iter().map(|&v| weights[v]).collect();
                for (k, &v) in comp.iter().enumerate() {
                    rows.push((n_rows, v, w[k]));
                }
                n_rows += 1;
                for column in orthogonal_complement(&w) {
                    for (k, &v) in comp.iter().enumerate() {
                        if column[k] != 0.0 {
                            basis.push((v, col, column[k]));
                        }
                    }
                    col += 1;
                }
            }
        }
    }
    Ok(ConstraintSpace {
        basis: CsrMatrix::from_triplets(n, col, &basis),
        constraints: CsrMatrix::from_triplets(n_rows, n, &rows),
        kind: kind.clone(),
        measure,
    })
}

/// `∫_∂Ω ψ_v dμ` for each vertex, in the requested measure.
fn boundary_weights(mesh: &Mesh, measure: BoundaryMeasure, family: Option<(&DiffeoFamily, f64)>) -> Result<Vec<f64>> {
    let mut w = vec![0.0; mesh.n_vertices()];
    for f in mesh.facets() {
        let factor = match (measure, family) {
            (BoundaryMeasure::Induced, Some((fam, t))) => fam.pushed_normal(t, mesh.facet_midpoint(f), f.normal)?.1,
            (BoundaryMeasure::Induced, None) => {
                return Err(Error::InvalidArgument("induced boundary measure needs a family and t".into()))
            }
            (BoundaryMeasure::Reference, _) => 1.0,
        };
        let share = factor * f.measure / f.vertices.len() as f64;
        for &v in &f.vertices {
            w[v] += share;
        }
    }
    Ok(w)
}

/// Columns 2..k of the Householder reflector mapping `w` onto a multiple of `e_1`;
/// they form an orthonormal basis of `w^⊥`.
fn orthogonal_complement(w: &[f64]) -> Vec<Vec<f64>> {
    let k = w.len();
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v = w.to_vec();
    v[0] += norm.copysign(w[0]);
    let vv: f64 = v.iter().map(|x| x * x).sum();
    (1..k)
        .map(|j| {
            (0..k)
                .map(|i| {
                    let e = if i == j { 1.0 } else { 0.0 };
                    e - 2.0 * v[i] * v[j] / vv
                })
                .collect()
        })
        .collect()
}
