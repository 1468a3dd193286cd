use nalgebra::{DMatrix, SymmetricEigen};

use crate::assembly::{shape_gradients, BcKind};
use crate::coeff::ScalarField;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{DiffeoFamily, Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingPosition {
    Initial,
    Interior,
    Terminal,
}

impl CrossingPosition {
    pub fn name(&self) -> &'static str {
        match self {
            CrossingPosition::Initial => "initial",
            CrossingPosition::Interior => "interior",
            CrossingPosition::Terminal => "terminal",
        }
    }
}

/// Counts of positive, negative and zero eigenvalues of a crossing form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
    pub z: usize,
}

/// Signature of a symmetric matrix; eigenvalues with `|μ| ≤ zero_tol` count as zero.
pub fn signature(q: &DMatrix<f64>, zero_tol: f64) -> Signature {
    if q.nrows() == 0 {
        return Signature::default();
    }
    let sym = (q + q.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut s = Signature::default();
    for &mu in eig.eigenvalues.iter() {
        if mu > zero_tol {
            s.p += 1;
        } else if mu < -zero_tol {
            s.q += 1;
        } else {
            s.z += 1;
        }
    }
    s
}

/// A conjugate time with its kernel and crossing forms.
#[derive(Debug, Clone)]
pub struct Crossing {
    pub t_star: f64,
    pub kernel_dim: usize,
    /// Pencil eigenvalues of the kernel vectors at `t_star`.
    pub kernel_eigenvalues: Vec<f64>,
    /// M-orthonormal kernel vectors in full finite-element coordinates.
    pub kernel: Vec<Vec<f64>>,
    pub q_volume: DMatrix<f64>,
    pub q_boundary: Option<DMatrix<f64>>,
    pub signature: Signature,
    pub position: CrossingPosition,
    pub warnings: Vec<String>,
}

impl Crossing {
    /// `‖Q_volume − Q_boundary‖_max / ‖Q_volume‖_max`, when both are available.
    pub fn cross_formula_defect(&self) -> Option<f64> {
        let qb = self.q_boundary.as_ref()?;
        let scale = self.q_volume.abs().max();
        Some((&self.q_volume - qb).abs().max() / scale.max(f64::MIN_POSITIVE))
    }

    /// Local contribution to the Maslov index: `p − q` in the interior, `−q` at the
    /// initial and `p` at the terminal parameter.
    pub fn contribution(&self) -> i64 {
        let (p, q) = (self.signature.p as i64, self.signature.q as i64);
        match self.position {
            CrossingPosition::Interior => p - q,
            CrossingPosition::Initial => -q,
            CrossingPosition::Terminal => p,
        }
    }
}

/// `Q_ij = D_t′(u_i, u_j)`.
pub fn crossing_form_volume(stiffness_dt: &CsrMatrix, kernel: &[Vec<f64>]) -> DMatrix<f64> {
    let d = kernel.len();
    let images: Vec<Vec<f64>> = kernel.iter().map(|u| stiffness_dt.mul_vec(u)).collect();
    let q = DMatrix::from_fn(d, d, |i, j| kernel[i].iter().zip(&images[j]).map(|(a, b)| a * b).sum::<f64>());
    (&q + q.transpose()) * 0.5
}

/// Per-facet data on the deformed boundary.
struct FacetFrame {
    normal: Point,
    x_dot_n: f64,
    measure: f64,
    image_midpoint: Point,
    /// Pushed-forward gradients of the kernel vectors on the adjacent cell.
    gradients: Vec<Point>,
    /// Kernel values at the facet midpoint.
    values: Vec<f64>,
}

fn facet_frames(mesh: &Mesh, family: &DiffeoFamily, t: f64, kernel: &[Vec<f64>]) -> Result<Vec<FacetFrame>> {
    mesh.facets()
        .iter()
        .map(|f| {
            let xm = mesh.facet_midpoint(f);
            let (normal, factor) = family.pushed_normal(t, xm, f.normal)?;
            let image_midpoint = family.map(t, xm);
            let x_dot_n = family.velocity(t, image_midpoint)?.dot(&normal);
            let (j, _) = family.checked_jacobian(t, xm)?;
            let inv_t = j.try_inverse().ok_or_else(|| Error::DegenerateFamily { t, detail: "singular Jacobian".into() })?.transpose();
            let cell = mesh.cell(f.cell);
            let (grads, _) = shape_gradients(mesh.dim(), &mesh.cell_points(f.cell));
            let gradients = kernel
                .iter()
                .map(|u| {
                    let g: Point = cell.iter().zip(&grads).map(|(&v, g)| g * u[v]).sum();
                    let pushed = inv_t * g;
                    if mesh.dim() == 1 {
                        Point::new(pushed.x, 0.0)
                    } else {
                        pushed
                    }
                })
                .collect();
            let values = kernel
                .iter()
                .map(|u| f.vertices.iter().map(|&v| u[v]).sum::<f64>() / f.vertices.len() as f64)
                .collect();
            Ok(FacetFrame { normal, x_dot_n, measure: f.measure * factor, image_midpoint, gradients, values })
        })
        .collect()
}

/// `−∫_{∂Ω_t} (∂û_i/∂N_t)(∂û_j/∂N_t)(X·N_t) dμ_t` with the normal derivative taken
/// from the cell adjacent to each facet and midpoint quadrature.
///
/// Also returns the indices of kernel vectors whose boundary flux vanishes.
pub fn crossing_form_boundary_dirichlet(
    mesh: &Mesh,
    family: &DiffeoFamily,
    bc: &BcKind,
    t: f64,
    kernel: &[Vec<f64>],
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if *bc != BcKind::Dirichlet {
        return Err(Error::UnsupportedBc(format!("Dirichlet crossing form requested for {}", bc.name())));
    }
    let d = kernel.len();
    let mut q = DMatrix::zeros(d, d);
    let mut flux = vec![0.0; d];
    for frame in facet_frames(mesh, family, t, kernel)? {
        let dn: Vec<f64> = frame.gradients.iter().map(|g| g.dot(&frame.normal)).collect();
        for i in 0..d {
            flux[i] += dn[i] * dn[i] * frame.measure;
            for j in 0..d {
                q[(i, j)] -= dn[i] * dn[j] * frame.x_dot_n * frame.measure;
            }
        }
    }
    let scale = flux.iter().fold(0.0f64, |m, v| m.max(*v));
    let silent = (0..d).filter(|&i| flux[i] <= 1e-12 * scale.max(f64::MIN_POSITIVE) || flux[i] == 0.0).collect();
    Ok(((&q + q.transpose()) * 0.5, silent))
}

/// `∫_{∂Ω_t} [∇ᵀû_i·∇ᵀû_j + (V − λ − β² + βH + ∂β/∂N_t) û_i û_j](X·N_t) dμ_t` for
/// Robin and Neumann (`β = 0`) conditions.
#[allow(clippy::too_many_arguments)]
pub fn crossing_form_boundary_robin(
    mesh: &Mesh,
    family: &DiffeoFamily,
    bc: &BcKind,
    t: f64,
    kernel: &[Vec<f64>],
    potential: &ScalarField,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    let beta = bc
        .robin_beta()
        .ok_or_else(|| Error::UnsupportedBc(format!("Robin crossing form requested for {}", bc.name())))?;
    let d = kernel.len();
    let mut q = DMatrix::zeros(d, d);
    for (frame, f) in facet_frames(mesh, family, t, kernel)?.into_iter().zip(mesh.facets()) {
        let curvature = family.image_mean_curvature(mesh, t, mesh.facet_midpoint(f)).ok_or_else(|| {
            Error::UnsupportedGeometry("mean curvature of the deformed boundary has no closed form".into())
        })?;
        let y = frame.image_midpoint;
        let b = beta.value(y);
        let coef = potential.value(y) - lambda - b * b + b * curvature + beta.gradient_or_fd(y).dot(&frame.normal);
        let tangential: Vec<Point> =
            frame.gradients.iter().map(|g| g - frame.normal * g.dot(&frame.normal)).collect();
        for i in 0..d {
            for j in 0..d {
                q[(i, j)] += (tangential[i].dot(&tangential[j]) + coef * frame.values[i] * frame.values[j])
                    * frame.x_dot_n
                    * frame.measure;
            }
        }
    }
    Ok((&q + q.transpose()) * 0.5)
}

/// Maslov index as the sum of crossing contributions.
///
/// Degenerate crossings (`z > 0`) are an error unless `allow_degenerate`, in which
/// case the signature of the nondegenerate part is used. The flag in the result is
/// false when any degenerate crossing was accepted this way.
pub fn maslov_index(crossings: &[Crossing], allow_degenerate: bool) -> Result<(i64, bool)> {
    let mut total = 0;
    let mut verified = true;
    for c in crossings {
        if c.signature.z > 0 {
            if !allow_degenerate {
                return Err(Error::DegenerateCrossing { t_star: c.t_star, zero_count: c.signature.z });
            }
            verified = false;
        }
        total += c.contribution();
    }
    Ok((total, verified))
}
