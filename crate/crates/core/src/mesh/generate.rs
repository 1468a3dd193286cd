use std::f64::consts::PI;

use spade::{ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::{Geometry, Mesh, Point};
use crate::error::{Error, Result};

/// Uniform mesh of (0, 1) with `n` cells.
pub fn build_interval_mesh(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("interval mesh needs at least 2 cells, got {n}")));
    }
    let vertices = (0..=n).map(|i| Point::new(i as f64 / n as f64, 0.0)).collect();
    let cells = (0..n).map(|i| vec![i, i + 1]).collect();
    Mesh::from_cells(1, vertices, cells, Geometry::Interval { length: 1.0 })
}

/// Vertices of a ring of `count` points at angles `2πj/count`.
fn ring(center: Point, radius: f64, count: usize) -> Vec<Point> {
    (0..count)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / count as f64;
            center + Point::new(radius * theta.cos(), radius * theta.sin())
        })
        .collect()
}

/// Triangulates the band between two concentric rings that both start at angle 0.
///
/// Angles are compared in exact integer arithmetic, so any rotation mapping both
/// rings onto themselves is also a symmetry of the triangulation.
fn stitch_rings(inner: (usize, usize), outer: (usize, usize), cells: &mut Vec<Vec<usize>>) {
    let (i0, ni) = inner;
    let (o0, no) = outer;
    let (mut i, mut o) = (0usize, 0usize);
    while i < ni || o < no {
        let advance_inner = if i == ni {
            false
        } else if o == no {
            true
        } else {
            (i + 1) * no <= (o + 1) * ni
        };
        if advance_inner {
            cells.push(vec![i0 + i % ni, i0 + (i + 1) % ni, o0 + o % no]);
            i += 1;
        } else {
            cells.push(vec![i0 + i % ni, o0 + (o + 1) % no, o0 + o % no]);
            o += 1;
        }
    }
}

/// Number of rings and per-ring vertex counts (multiples of 6) for a band.
fn ring_counts(r_in: f64, r_out: f64, h: f64) -> Vec<(f64, usize)> {
    let layers = ((r_out - r_in) / h).ceil().max(1.0) as usize;
    (0..=layers)
        .map(|k| {
            let r = r_in + (r_out - r_in) * k as f64 / layers as f64;
            let count = 6 * ((2.0 * PI * r / h / 6.0).ceil().max(1.0) as usize);
            (r, count)
        })
        .collect()
}

/// Concentric-ring triangulation of the disk.
///
/// Ring `k` carries `6k` equally spaced vertices, so the mesh is invariant under
/// rotation by 60° about the center; rotationally degenerate eigenpairs of the
/// continuous problem stay exactly degenerate in the discrete one.
pub fn build_disk_mesh(radius: f64, h: f64) -> Result<Mesh> {
    build_disk_mesh_centered(Point::zeros(), radius, h)
}

pub fn build_disk_mesh_centered(center: Point, radius: f64, h: f64) -> Result<Mesh> {
    if !(radius > 0.0) || !(h > 0.0) {
        return Err(Error::InvalidArgument("disk mesh needs radius > 0 and h > 0".into()));
    }
    if h > radius {
        return Err(Error::MeshFailure(format!("h = {h} cannot resolve a disk of radius {radius}")));
    }
    let rings = (radius / h).ceil() as usize;
    let mut vertices = vec![center];
    let mut cells = Vec::new();
    let mut prev = (0usize, 1usize);
    for k in 1..=rings {
        let start = vertices.len();
        vertices.extend(ring(center, radius * k as f64 / rings as f64, 6 * k));
        if k == 1 {
            for j in 0..6 {
                cells.push(vec![0, start + j, start + (j + 1) % 6]);
            }
        } else {
            stitch_rings(prev, (start, 6 * k), &mut cells);
        }
        prev = (start, 6 * k);
    }
    Mesh::from_cells(2, vertices, cells, Geometry::Disk { center, radius })
}

/// Concentric-ring triangulation of the annulus `r_in < |x| < r_out`.
pub fn build_annulus_mesh(r_in: f64, r_out: f64, h: f64) -> Result<Mesh> {
    if !(r_in > 0.0 && r_in < r_out) || !(h > 0.0) {
        return Err(Error::InvalidArgument("annulus mesh needs 0 < r_in < r_out and h > 0".into()));
    }
    if h > r_out - r_in {
        return Err(Error::MeshFailure(format!("h = {h} cannot resolve annulus width {}", r_out - r_in)));
    }
    let center = Point::zeros();
    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    let mut prev: Option<(usize, usize)> = None;
    for (r, count) in ring_counts(r_in, r_out, h) {
        let start = vertices.len();
        vertices.extend(ring(center, r, count));
        if let Some(p) = prev {
            stitch_rings(p, (start, count), &mut cells);
        }
        prev = Some((start, count));
    }
    Mesh::from_cells(2, vertices, cells, Geometry::Annulus { center, r_in, r_out })
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q - p).perp(&(r - p));
    let (d1, d2) = (orient(a, b, c), orient(a, b, d));
    let (d3, d4) = (orient(c, d, a), orient(c, d, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn polygon_area(loop_: &[Point]) -> f64 {
    let n = loop_.len();
    (0..n).map(|i| loop_[i].perp(&loop_[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Constrained Delaunay triangulation of a simple counterclockwise polygon,
/// refined until no triangle exceeds the area of an equilateral triangle of side `h`.
pub fn build_polygon_mesh(loop_: &[Point], h: f64) -> Result<Mesh> {
    let n = loop_.len();
    if n < 3 || !(h > 0.0) {
        return Err(Error::InvalidArgument("polygon needs at least 3 vertices and h > 0".into()));
    }
    for i in 0..n {
        if (loop_[i] - loop_[(i + 1) % n]).norm() == 0.0 {
            return Err(Error::InvalidArgument(format!("repeated polygon vertex {i}")));
        }
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(loop_[i], loop_[(i + 1) % n], loop_[j], loop_[(j + 1) % n]) {
                return Err(Error::InvalidArgument(format!("polygon edges {i} and {j} intersect")));
            }
        }
    }
    let area = polygon_area(loop_);
    if area <= 0.0 {
        return Err(Error::InvalidArgument("polygon must be counterclockwise".into()));
    }

    // split edges so boundary spacing already matches h
    let mut boundary = Vec::new();
    for i in 0..n {
        let (a, b) = (loop_[i], loop_[(i + 1) % n]);
        let pieces = ((b - a).norm() / h).ceil().max(1.0) as usize;
        for k in 0..pieces {
            boundary.push(a + (b - a) * (k as f64 / pieces as f64));
        }
    }

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let handles: Vec<_> = boundary
        .iter()
        .map(|p| cdt.insert(Point2::new(p.x, p.y)))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::MeshFailure(format!("triangulation insert failed: {e:?}")))?;
    for i in 0..handles.len() {
        let (a, b) = (handles[i], handles[(i + 1) % handles.len()]);
        if !cdt.can_add_constraint(a, b) {
            return Err(Error::MeshFailure("boundary segment could not be recovered".into()));
        }
        cdt.add_constraint(a, b);
    }
    let max_area = 3f64.sqrt() / 4.0 * h * h;
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .with_max_allowed_area(max_area)
            .with_max_additional_vertices(2_000_000),
    );
    if !result.refinement_complete {
        return Err(Error::MeshFailure("refinement did not converge".into()));
    }
    let excluded: std::collections::HashSet<_> = result.excluded_faces.iter().copied().collect();

    let mut index = std::collections::HashMap::new();
    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let mut cell = Vec::with_capacity(3);
        for v in face.vertices() {
            let id = *index.entry(v.fix()).or_insert_with(|| {
                let p = v.position();
                vertices.push(Point::new(p.x, p.y));
                vertices.len() - 1
            });
            cell.push(id);
        }
        cells.push(cell);
    }
    let mesh = Mesh::from_cells(2, vertices, cells, Geometry::Polygon { vertices: loop_.to_vec() })?;
    if (mesh.total_measure() - area).abs() > 1e-9 * area.max(1.0) || mesh.n_components() != 1 {
        return Err(Error::MeshFailure("triangulation does not cover the polygon".into()));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_mesh_basic() {
        let m = build_interval_mesh(4).unwrap();
        let xs: Vec<f64> = m.vertices().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.n_components(), 2);
        let m2 = build_interval_mesh(2).unwrap();
        assert_eq!(m2.n_vertices(), 3);
        assert!((0..2).all(|c| (m2.cell_measure(c) - 0.5).abs() < 1e-15));
        assert!(matches!(build_interval_mesh(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn interval_boundary_normals_point_outward() {
        let m = build_interval_mesh(5).unwrap();
        let left = m.facets().iter().find(|f| f.vertices == [0]).unwrap();
        let right = m.facets().iter().find(|f| f.vertices == [5]).unwrap();
        assert_eq!(left.normal.x, -1.0);
        assert_eq!(right.normal.x, 1.0);
        assert_ne!(left.component, right.component);
    }

    #[test]
    fn disk_mesh_area_and_boundary() {
        let m = build_disk_mesh(1.0, 0.3).unwrap();
        assert_eq!(m.n_components(), 1);
        assert!((m.total_measure() - PI).abs() < 3.0 * 0.3);
        for f in m.facets() {
            for &v in &f.vertices {
                assert!((m.vertex(v).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn disk_boundary_length_converges_quadratically() {
        let err = |h: f64| (build_disk_mesh(1.0, h).unwrap().boundary_measure() - 2.0 * PI).abs();
        let (e1, e2) = (err(0.2), err(0.1));
        assert!(e2 < e1 / 3.5, "{e1} {e2}");
    }

    #[test]
    fn annulus_has_two_components() {
        let m = build_annulus_mesh(0.5, 1.0, 0.2).unwrap();
        assert_eq!(m.n_components(), 2);
        let exact = PI * (1.0 - 0.25);
        assert!((m.total_measure() - exact).abs() < 3.0 * 0.2);
    }

    #[test]
    fn unit_square_is_exact() {
        let sq = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        let m = build_polygon_mesh(&sq, 0.25).unwrap();
        assert!((m.total_measure() - 1.0).abs() < 1e-12);
        assert_eq!(m.n_components(), 1);
    }

    #[test]
    fn bad_polygons_are_rejected() {
        let bowtie = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(matches!(build_polygon_mesh(&bowtie, 0.2), Err(Error::InvalidArgument(_))));
        let cw = [Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert!(matches!(build_polygon_mesh(&cw, 0.2), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_disk_mesh(1.0, 2.0), Err(Error::MeshFailure(_))));
    }
}
