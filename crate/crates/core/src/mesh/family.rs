use nalgebra::Matrix2;

use super::{Geometry, Mesh, Point};
use crate::error::{Error, Result};

/// Closed-form deformation families `t ↦ φ_t`.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `φ_t(x) = center + t (x − center)`.
    StarScale { center: Point },
    /// Annular stretch keeping the circle of radius `inner` fixed and sending the
    /// reference radius `reference_outer` to `t`.
    RadialScale { center: Point, inner: f64, reference_outer: f64 },
    /// `φ_t(x) = (a0 + t a1) x + (b0 + t b1)`.
    Affine { a0: Matrix2<f64>, a1: Matrix2<f64>, b0: Point, b1: Point },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffeoFamily {
    kind: FamilyKind,
    dim: usize,
    t_range: (f64, f64),
    smoothness: u32,
}

fn degenerate(t: f64, detail: impl Into<String>) -> Error {
    Error::DegenerateFamily { t, detail: detail.into() }
}

impl DiffeoFamily {
    pub fn new(kind: FamilyKind, dim: usize, t_range: (f64, f64)) -> Result<Self> {
        let (a, b) = t_range;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("t_range must satisfy a < b, got [{a}, {b}]")));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
        }
        let kind = match kind {
            FamilyKind::StarScale { center } => {
                if a <= 0.0 {
                    return Err(degenerate(a, "star scaling needs t > 0"));
                }
                let center = if dim == 1 { Point::new(center.x, 0.0) } else { center };
                FamilyKind::StarScale { center }
            }
            FamilyKind::RadialScale { center, inner, reference_outer } => {
                if dim != 2 {
                    return Err(Error::UnsupportedFamily("radial scaling is two-dimensional".into()));
                }
                if !(inner > 0.0 && reference_outer > inner) {
                    return Err(Error::InvalidArgument("radial scaling needs 0 < inner < reference_outer".into()));
                }
                if a <= inner {
                    return Err(degenerate(a, "outer radius must stay above the fixed inner radius"));
                }
                FamilyKind::RadialScale { center, inner, reference_outer }
            }
            FamilyKind::Affine { mut a0, mut a1, mut b0, mut b1 } => {
                if dim == 1 {
                    a0 = Matrix2::new(a0[(0, 0)], 0.0, 0.0, 1.0);
                    a1 = Matrix2::new(a1[(0, 0)], 0.0, 0.0, 0.0);
                    b0.y = 0.0;
                    b1.y = 0.0;
                }
                // det(a0 + t a1) is quadratic in t; check endpoints and the vertex
                let det = |t: f64| (a0 + a1 * t).determinant();
                let mut probes = vec![a, b];
                let c2 = a1.determinant();
                if c2 != 0.0 {
                    let c1 = det(1.0) - det(0.0) - c2;
                    let tv = -c1 / (2.0 * c2);
                    if tv > a && tv < b {
                        probes.push(tv);
                    }
                }
                if let Some(&t) = probes.iter().find(|&&t| det(t) <= 0.0) {
                    return Err(degenerate(t, "affine map is not orientation preserving"));
                }
                FamilyKind::Affine { a0, a1, b0, b1 }
            }
        };
        Ok(Self { kind, dim, t_range, smoothness: u32::MAX })
    }

    /// `φ_t = id` for every `t`.
    pub fn identity(dim: usize, t_range: (f64, f64)) -> Result<Self> {
        Self::new(
            FamilyKind::Affine {
                a0: Matrix2::identity(),
                a1: Matrix2::zeros(),
                b0: Point::zeros(),
                b1: Point::zeros(),
            },
            dim,
            t_range,
        )
    }

    pub fn star(center: Point, dim: usize, t_range: (f64, f64)) -> Result<Self> {
        Self::new(FamilyKind::StarScale { center }, dim, t_range)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_range(&self) -> (f64, f64) {
        self.t_range
    }

    /// All built-in families are smooth in `t` and `x`.
    pub fn smoothness_class(&self) -> u32 {
        self.smoothness
    }

    pub fn star_center(&self) -> Option<Point> {
        match self.kind {
            FamilyKind::StarScale { center } => Some(center),
            _ => None,
        }
    }

    pub fn map(&self, t: f64, x: Point) -> Point {
        match &self.kind {
            FamilyKind::StarScale { center } => center + (x - center) * t,
            FamilyKind::RadialScale { center, inner, reference_outer } => {
                let d = x - center;
                let rho = d.norm();
                if rho == 0.0 {
                    return *center;
                }
                let s = (t - inner) / (reference_outer - inner);
                center + d * ((inner + s * (rho - inner)) / rho)
            }
            FamilyKind::Affine { a0, a1, b0, b1 } => (a0 + a1 * t) * x + b0 + b1 * t,
        }
    }

    pub fn inverse_map(&self, t: f64, y: Point) -> Result<Point> {
        match &self.kind {
            FamilyKind::StarScale { center } => Ok(center + (y - center) / t),
            FamilyKind::RadialScale { center, inner, reference_outer } => {
                let d = y - center;
                let rho = d.norm();
                if rho == 0.0 {
                    return Err(degenerate(t, "radial scaling is singular at the center"));
                }
                let s = (t - inner) / (reference_outer - inner);
                Ok(center + d * ((inner + (rho - inner) / s) / rho))
            }
            FamilyKind::Affine { a0, a1, b0, b1 } => {
                let a = a0 + a1 * t;
                let inv = a.try_inverse().ok_or_else(|| degenerate(t, "singular affine map"))?;
                Ok(inv * (y - b0 - b1 * t))
            }
        }
    }

    /// Jacobian `Dφ_t(x)`. In 1D the second row and column are those of the identity.
    pub fn jacobian(&self, t: f64, x: Point) -> Matrix2<f64> {
        let j = match &self.kind {
            FamilyKind::StarScale { .. } => Matrix2::identity() * t,
            FamilyKind::RadialScale { center, inner, reference_outer } => {
                let d = x - center;
                let rho = d.norm();
                let s = (t - inner) / (reference_outer - inner);
                if rho == 0.0 {
                    return Matrix2::zeros();
                }
                let u = d / rho;
                let radial = u * u.transpose();
                radial * s + (Matrix2::identity() - radial) * ((inner + s * (rho - inner)) / rho)
            }
            FamilyKind::Affine { a0, a1, .. } => a0 + a1 * t,
        };
        if self.dim == 1 {
            Matrix2::new(j[(0, 0)], 0.0, 0.0, 1.0)
        } else {
            j
        }
    }

    /// Jacobian with its determinant, failing when the map is not orientation preserving.
    pub fn checked_jacobian(&self, t: f64, x: Point) -> Result<(Matrix2<f64>, f64)> {
        let j = self.jacobian(t, x);
        let det = j.determinant();
        if !(det > 0.0) {
            return Err(degenerate(t, format!("det Dφ = {det:e} at ({}, {})", x.x, x.y)));
        }
        Ok((j, det))
    }

    /// `∂_t φ_t(x)` at a reference point.
    pub fn time_derivative(&self, t: f64, x: Point) -> Point {
        let _ = t;
        match &self.kind {
            FamilyKind::StarScale { center } => x - center,
            FamilyKind::RadialScale { center, inner, reference_outer } => {
                let d = x - center;
                let rho = d.norm();
                if rho == 0.0 {
                    return Point::zeros();
                }
                d * ((rho - inner) / ((reference_outer - inner) * rho))
            }
            FamilyKind::Affine { a1, b1, .. } => {
                let v = a1 * x + b1;
                if self.dim == 1 {
                    Point::new(v.x, 0.0)
                } else {
                    v
                }
            }
        }
    }

    /// Velocity field `X(y) = (∂_t φ_t)(φ_t⁻¹(y))` on the deformed domain.
    pub fn velocity(&self, t: f64, y: Point) -> Result<Point> {
        Ok(self.time_derivative(t, self.inverse_map(t, y)?))
    }

    /// Pushed-forward unit normal and surface-measure factor via Nanson's rule:
    /// `N_t ∝ det(Dφ) Dφ⁻ᵀ N` and `dμ_t = |det(Dφ) Dφ⁻ᵀ N| dμ`.
    pub fn pushed_normal(&self, t: f64, x: Point, normal: Point) -> Result<(Point, f64)> {
        let (j, det) = self.checked_jacobian(t, x)?;
        let inv_t = j.try_inverse().ok_or_else(|| degenerate(t, "singular Jacobian"))?.transpose();
        let v = inv_t * normal * det;
        let factor = v.norm();
        Ok((v / factor, factor))
    }

    /// Checks `det Dφ_t > 0` on every mesh vertex for a sweep of `t` values.
    pub fn validate_on(&self, mesh: &Mesh) -> Result<()> {
        if mesh.dim() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "family is {}D but mesh is {}D",
                self.dim,
                mesh.dim()
            )));
        }
        let (a, b) = self.t_range;
        for k in 0..=32 {
            let t = a + (b - a) * k as f64 / 32.0;
            for &x in mesh.vertices() {
                self.checked_jacobian(t, x)?;
            }
        }
        Ok(())
    }

    /// Mean curvature `div N_t` of the image of a circular boundary component,
    /// or zero in 1D. `None` when the image curvature has no closed form.
    pub fn image_mean_curvature(&self, mesh: &Mesh, t: f64, x: Point) -> Option<f64> {
        if self.dim == 1 {
            return Some(0.0);
        }
        let (center, radius, outer) = match mesh.geometry() {
            Geometry::Disk { center, radius } => (*center, *radius, true),
            Geometry::Annulus { center, r_in, r_out } => {
                let rho = (x - center).norm();
                if (rho - r_out).abs() < (rho - r_in).abs() {
                    (*center, *r_out, true)
                } else {
                    (*center, *r_in, false)
                }
            }
            _ => return None,
        };
        let image_radius = match &self.kind {
            FamilyKind::StarScale { .. } => t * radius,
            FamilyKind::RadialScale { center: c, .. } => {
                if (c - center).norm() > 1e-14 {
                    return None;
                }
                (self.map(t, x) - c).norm()
            }
            FamilyKind::Affine { a0, a1, .. } => {
                // circles stay circles only under similarities
                let a = a0 + a1 * t;
                let s2 = a.determinant();
                if (a.transpose() * a - Matrix2::identity() * s2).abs().max() > 1e-12 * s2.abs() {
                    return None;
                }
                s2.sqrt() * radius
            }
        };
        let sign = if outer { 1.0 } else { -1.0 };
        Some(sign / image_radius)
    }
}

/// `X·N_t` on the deformed boundary, one value per boundary facet.
///
/// Evaluated at the midpoint of the image facet, with the normal pushed forward
/// from the reference facet midpoint.
pub fn boundary_velocity_normal(family: &DiffeoFamily, t: f64, mesh: &Mesh) -> Result<Vec<f64>> {
    mesh.facets()
        .iter()
        .map(|f| {
            let xm = mesh.facet_midpoint(f);
            let (nt, _) = family.pushed_normal(t, xm, f.normal)?;
            let ym = f
                .vertices
                .iter()
                .map(|&v| family.map(t, mesh.vertex(v)))
                .sum::<Point>()
                / f.vertices.len() as f64;
            Ok(family.velocity(t, ym)?.dot(&nt))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_annulus_mesh, build_disk_mesh, build_interval_mesh};

    fn sample_points(n: usize, seed: u64) -> Vec<Point> {
        // deterministic quasi-random points in the annulus 0.6 < r < 0.95
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        (0..n)
            .map(|_| {
                let r = 0.6 + 0.35 * next();
                let th = 2.0 * std::f64::consts::PI * next();
                Point::new(r * th.cos(), r * th.sin())
            })
            .collect()
    }

    fn families() -> Vec<DiffeoFamily> {
        vec![
            DiffeoFamily::star(Point::new(0.1, -0.2), 2, (0.5, 1.5)).unwrap(),
            DiffeoFamily::new(
                FamilyKind::RadialScale { center: Point::zeros(), inner: 0.5, reference_outer: 1.0 },
                2,
                (1.0, 1.5),
            )
            .unwrap(),
            DiffeoFamily::new(
                FamilyKind::Affine {
                    a0: Matrix2::new(1.0, 0.2, 0.0, 0.9),
                    a1: Matrix2::new(0.3, 0.0, 0.1, 0.2),
                    b0: Point::new(0.1, 0.0),
                    b1: Point::new(-0.2, 0.4),
                },
                2,
                (0.0, 1.0),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn velocity_is_consistent_with_map() {
        for fam in families() {
            let (a, b) = fam.t_range();
            let t = 0.5 * (a + b);
            let delta = 1e-5;
            for x in sample_points(20, 7) {
                let y = fam.map(t, x);
                let fd = fam.map(t + delta, x) - y;
                let pred = fam.velocity(t, y).unwrap() * delta;
                assert!((fd - pred).norm() < 1e-8, "{:?}: {}", fam.kind(), (fd - pred).norm());
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for fam in families() {
            let t = fam.t_range().0 * 0.5 + fam.t_range().1 * 0.5;
            for x in sample_points(20, 11) {
                let j = fam.jacobian(t, x);
                let eps = 1e-6;
                for c in 0..2 {
                    let mut e = Point::zeros();
                    e[c] = eps;
                    let col = (fam.map(t, x + e) - fam.map(t, x - e)) / (2.0 * eps);
                    assert!((col - j.column(c)).norm() < 1e-8);
                }
                let back = fam.inverse_map(t, fam.map(t, x)).unwrap();
                assert!((back - x).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn star_scale_pointwise_identities() {
        let c = Point::new(0.3, 0.1);
        let fam = DiffeoFamily::star(c, 2, (0.2, 2.0)).unwrap();
        for x in sample_points(20, 3) {
            let t = 1.7;
            assert!((fam.map(t, x) - (c + (x - c) * t)).norm() < 1e-15);
            assert!((fam.jacobian(t, x) - Matrix2::identity() * t).abs().max() < 1e-15);
            let y = fam.map(t, x);
            assert!((fam.velocity(t, y).unwrap() - (y - c) / t).norm() < 1e-14);
        }
    }

    #[test]
    fn star_scale_cell_measures_scale_by_t_to_the_n() {
        let mesh = build_disk_mesh(1.0, 0.25).unwrap();
        let fam = DiffeoFamily::star(Point::zeros(), 2, (0.5, 2.0)).unwrap();
        let t = 1.3;
        for c in 0..mesh.n_cells() {
            let p: Vec<Point> = mesh.cell(c).iter().map(|&v| fam.map(t, mesh.vertex(v))).collect();
            let area = 0.5 * (p[1] - p[0]).perp(&(p[2] - p[0]));
            let expect = t * t * mesh.cell_measure(c);
            assert!((area - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn disk_velocity_normal_is_one() {
        let mesh = build_disk_mesh(1.0, 0.05).unwrap();
        let fam = DiffeoFamily::star(Point::zeros(), 2, (0.5, 1.0)).unwrap();
        for t in [0.5, 0.8, 1.0] {
            let xn = boundary_velocity_normal(&fam, t, &mesh).unwrap();
            // chord midpoints sit at radius cos(π/N) < 1
            assert!(xn.iter().all(|v| (v - 1.0).abs() < 1e-3), "{xn:?}");
        }
    }

    #[test]
    fn interval_fixed_point_and_identity_family() {
        let mesh = build_interval_mesh(8).unwrap();
        let fam = DiffeoFamily::star(Point::zeros(), 1, (0.1, 1.0)).unwrap();
        let xn = boundary_velocity_normal(&fam, 0.4, &mesh).unwrap();
        for (f, v) in mesh.facets().iter().zip(&xn) {
            if f.vertices == [0] {
                assert_eq!(*v, 0.0);
            } else {
                assert!((v - 1.0).abs() < 1e-14);
            }
        }
        let id = DiffeoFamily::identity(1, (0.0, 1.0)).unwrap();
        assert!(boundary_velocity_normal(&id, 0.5, &mesh).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn radial_scale_fixes_inner_circle() {
        let mesh = build_annulus_mesh(0.5, 1.0, 0.1).unwrap();
        let fam = DiffeoFamily::new(
            FamilyKind::RadialScale { center: Point::zeros(), inner: 0.5, reference_outer: 1.0 },
            2,
            (1.0, 1.5),
        )
        .unwrap();
        fam.validate_on(&mesh).unwrap();
        let xn = boundary_velocity_normal(&fam, 1.2, &mesh).unwrap();
        for (f, v) in mesh.facets().iter().zip(&xn) {
            let r = mesh.facet_midpoint(f).norm();
            if r < 0.75 {
                assert!(v.abs() < 1e-2);
            } else {
                assert!(*v > 0.9);
            }
        }
        assert!((fam.image_mean_curvature(&mesh, 1.2, Point::new(1.0, 0.0)).unwrap() - 1.0 / 1.2).abs() < 1e-12);
        assert!((fam.image_mean_curvature(&mesh, 1.2, Point::new(0.5, 0.0)).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_families_are_rejected() {
        assert!(DiffeoFamily::star(Point::zeros(), 2, (1.0, 0.5)).is_err());
        assert!(matches!(
            DiffeoFamily::star(Point::zeros(), 2, (0.0, 1.0)),
            Err(Error::DegenerateFamily { .. })
        ));
        let flip = FamilyKind::Affine {
            a0: Matrix2::identity(),
            a1: Matrix2::identity() * -2.0,
            b0: Point::zeros(),
            b1: Point::zeros(),
        };
        assert!(matches!(DiffeoFamily::new(flip, 2, (0.0, 1.0)), Err(Error::DegenerateFamily { .. })));
    }
}
