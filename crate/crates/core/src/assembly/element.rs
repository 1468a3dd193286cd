use nalgebra::Vector2;

use crate::coeff::Coefficients;
use crate::error::Result;
use crate::linalg::CsrMatrix;
use crate::mesh::{Mesh, Point};

/// Degree of polynomials integrated exactly by the cell rules.
pub const QUADRATURE_ORDER: usize = 2;

const GAUSS_1D: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];
const TRIANGLE_RULE: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

/// Shape-function gradients of a P1 cell (constant on the cell) and its measure.
pub fn shape_gradients(dim: usize, p: &[Point]) -> (Vec<Vector2<f64>>, f64) {
    if dim == 1 {
        let h = p[1].x - p[0].x;
        (vec![Vector2::new(-1.0 / h, 0.0), Vector2::new(1.0 / h, 0.0)], h)
    } else {
        let area2 = (p[1] - p[0]).perp(&(p[2] - p[0]));
        let g = |a: Point, b: Point| Vector2::new(a.y - b.y, b.x - a.x) / area2;
        (vec![g(p[1], p[2]), g(p[2], p[0]), g(p[0], p[1])], 0.5 * area2)
    }
}

/// Quadrature nodes as barycentric weights and relative weights summing to 1.
fn rule(dim: usize) -> Vec<(Vec<f64>, f64)> {
    if dim == 1 {
        GAUSS_1D.iter().map(|&s| (vec![1.0 - s, s], 0.5)).collect()
    } else {
        TRIANGLE_RULE.iter().map(|b| (b.to_vec(), 1.0 / 3.0)).collect()
    }
}

/// P1 Galerkin matrix of
/// `∫ a∇ψ_i·∇ψ_j + (b·∇ψ_i)ψ_j + (c·∇ψ_j)ψ_i + d ψ_iψ_j`.
pub fn assemble_form(mesh: &Mesh, coeffs: &dyn Coefficients) -> Result<CsrMatrix> {
    let dim = mesh.dim();
    let quad = rule(dim);
    let k = dim + 1;
    let mut triplets = Vec::with_capacity(mesh.n_cells() * k * k);
    let mut local = vec![0.0; k * k];
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        let pts = mesh.cell_points(c);
        let (grads, measure) = shape_gradients(dim, &pts);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (bary, w) in &quad {
            let x: Point = pts.iter().zip(bary).map(|(p, l)| p * *l).sum();
            let a = coeffs.diffusion(x)?;
            let (b, cv) = coeffs.drift(x)?;
            let d = coeffs.reaction(x)?;
            let wq = w * measure;
            for i in 0..k {
                let agi = a.transpose() * grads[i];
                for j in 0..k {
                    local[i * k + j] += wq
                        * (agi.dot(&grads[j])
                            + b.dot(&grads[i]) * bary[j]
                            + cv.dot(&grads[j]) * bary[i]
                            + d * bary[i] * bary[j]);
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                triplets.push((cell[i], cell[j], local[i * k + j]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), &triplets))
}

struct UnitMass;

impl Coefficients for UnitMass {
    fn diffusion(&self, _p: Point) -> Result<nalgebra::Matrix2<f64>> {
        Ok(nalgebra::Matrix2::zeros())
    }

    fn drift(&self, _p: Point) -> Result<(Vector2<f64>, Vector2<f64>)> {
        Ok((Vector2::zeros(), Vector2::zeros()))
    }

    fn reaction(&self, _p: Point) -> Result<f64> {
        Ok(1.0)
    }
}

/// L² Gram matrix of the P1 basis on the reference domain.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    assemble_form(mesh, &UnitMass).expect("unit mass coefficients are finite")
}

/// `∫_∂Ω w ψ_i ψ_j dμ` with the weight `w` frozen at each facet midpoint and the
/// exact P1 facet mass.
pub(crate) fn assemble_boundary_mass<F>(mesh: &Mesh, mut weight: F) -> Result<CsrMatrix>
where
    F: FnMut(Point, Point) -> Result<f64>,
{
    let mut triplets = Vec::new();
    for f in mesh.facets() {
        let w = weight(mesh.facet_midpoint(f), f.normal)?;
        match f.vertices.as_slice() {
            [v] => triplets.push((*v, *v, w)),
            [v0, v1] => {
                let m = w * f.measure;
                triplets.push((*v0, *v0, m / 3.0));
                triplets.push((*v1, *v1, m / 3.0));
                triplets.push((*v0, *v1, m / 6.0));
                triplets.push((*v1, *v0, m / 6.0));
            }
            _ => unreachable!("boundary facets have one or two vertices"),
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), &triplets))
}
