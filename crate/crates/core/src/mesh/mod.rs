//! Simplicial meshes of reference domains and the deformation families acting on them.

mod family;
mod generate;
mod io;

use std::collections::HashMap;

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub use family::{boundary_velocity_normal, DiffeoFamily, FamilyKind};
pub use generate::{build_annulus_mesh, build_disk_mesh, build_disk_mesh_centered, build_interval_mesh, build_polygon_mesh};

/// Points are stored in the plane; 1D meshes use the first coordinate only.
pub type Point = Vector2<f64>;

/// Analytic description of the domain a mesh approximates.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Interval { length: f64 },
    Disk { center: Point, radius: f64 },
    Annulus { center: Point, r_in: f64, r_out: f64 },
    Polygon { vertices: Vec<Point> },
    /// Read back from a file without an analytic description.
    Unspecified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    /// One vertex in 1D, two (counterclockwise along the boundary) in 2D.
    pub vertices: Vec<usize>,
    /// The unique cell containing the facet.
    pub cell: usize,
    /// Outward unit normal on the reference domain.
    pub normal: Point,
    pub component: usize,
    /// Length of the facet (1 for point facets).
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    facets: Vec<BoundaryFacet>,
    n_components: usize,
    geometry: Geometry,
}

fn signed_measure(dim: usize, p: &[Point]) -> f64 {
    match dim {
        1 => p[1].x - p[0].x,
        _ => 0.5 * ((p[1] - p[0]).perp(&(p[2] - p[0]))),
    }
}

fn sorted_face(face: &[usize]) -> Vec<usize> {
    let mut f = face.to_vec();
    f.sort_unstable();
    f
}

impl Mesh {
    /// Builds a mesh from cells alone; the boundary is every face owned by exactly
    /// one cell, grouped into connected components.
    pub fn from_cells(dim: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>, geometry: Geometry) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
        }
        let mut cells = cells;
        for cell in cells.iter_mut() {
            if cell.len() != dim + 1 || cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument("malformed cell".into()));
            }
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            if signed_measure(dim, &pts) < 0.0 {
                cell.swap(0, 1);
            }
        }

        let mut owners: HashMap<Vec<usize>, Vec<(usize, Vec<usize>)>> = HashMap::new();
        for (c, cell) in cells.iter().enumerate() {
            for skip in 0..=dim {
                // faces in cyclic order so 2D facets inherit counterclockwise orientation
                let face: Vec<usize> = match dim {
                    1 => vec![cell[1 - skip]],
                    _ => vec![cell[(skip + 1) % 3], cell[(skip + 2) % 3]],
                };
                owners.entry(sorted_face(&face)).or_default().push((c, face));
            }
        }
        let mut boundary: Vec<(usize, Vec<usize>)> = Vec::new();
        for (key, list) in owners {
            match list.len() {
                1 => boundary.push(list.into_iter().next().unwrap()),
                2 => {}
                k => {
                    return Err(Error::MeshFailure(format!(
                        "non-conforming mesh: face {key:?} shared by {k} cells"
                    )))
                }
            }
        }
        boundary.sort_by(|a, b| a.1.cmp(&b.1));
        let comp = Self::components_of(vertices.len(), boundary.iter().map(|b| b.1.as_slice()));
        Self::assemble(dim, vertices, cells, boundary, comp, geometry)
    }

    /// Builds a mesh with explicit boundary facets and component labels.
    pub fn from_parts(
        dim: usize,
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        facets: Vec<(Vec<usize>, usize)>,
        geometry: Geometry,
    ) -> Result<Self> {
        let mesh = Self::from_cells(dim, vertices, cells, geometry)?;
        if facets.len() != mesh.facets.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} boundary facets, got {}",
                mesh.facets.len(),
                facets.len()
            )));
        }
        let mut lookup: HashMap<Vec<usize>, usize> = HashMap::new();
        for (verts, comp) in &facets {
            lookup.insert(sorted_face(verts), *comp);
        }
        let mut mesh = mesh;
        for f in mesh.facets.iter_mut() {
            f.component = *lookup.get(&sorted_face(&f.vertices)).ok_or_else(|| {
                Error::InvalidArgument(format!("facet {:?} is not on the boundary", f.vertices))
            })?;
        }
        mesh.n_components = facets.iter().map(|f| f.1 + 1).max().unwrap_or(0);
        mesh.validate()?;
        Ok(mesh)
    }

    fn components_of<'a>(n_vertices: usize, faces: impl Iterator<Item = &'a [usize]> + Clone) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..n_vertices).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for face in faces.clone() {
            for w in face.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        // label components by their smallest vertex
        let roots: Vec<usize> = faces.clone().map(|f| find(&mut parent, f[0])).collect();
        let mut min_vertex: HashMap<usize, usize> = HashMap::new();
        for (face, &r) in faces.zip(&roots) {
            let m = *face.iter().min().unwrap();
            min_vertex.entry(r).and_modify(|v| *v = (*v).min(m)).or_insert(m);
        }
        let mut keys: Vec<(usize, usize)> = min_vertex.into_iter().map(|(r, m)| (m, r)).collect();
        keys.sort_unstable();
        let label: HashMap<usize, usize> = keys.iter().enumerate().map(|(i, &(_, r))| (r, i)).collect();
        roots.iter().map(|r| label[r]).collect()
    }

    fn assemble(
        dim: usize,
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        boundary: Vec<(usize, Vec<usize>)>,
        components: Vec<usize>,
        geometry: Geometry,
    ) -> Result<Self> {
        let mut facets = Vec::with_capacity(boundary.len());
        for ((cell, verts), comp) in boundary.into_iter().zip(components) {
            let (normal, measure) = match dim {
                1 => {
                    let other = cells[cell].iter().copied().find(|&v| v != verts[0]).unwrap();
                    let s = (vertices[verts[0]].x - vertices[other].x).signum();
                    (Point::new(s, 0.0), 1.0)
                }
                _ => {
                    let e = vertices[verts[1]] - vertices[verts[0]];
                    let len = e.norm();
                    // counterclockwise cells: outward normal is the edge rotated clockwise
                    (Point::new(e.y, -e.x) / len, len)
                }
            };
            facets.push(BoundaryFacet {
                vertices: verts,
                cell,
                normal,
                component: comp,
                measure,
            });
        }
        let n_components = facets.iter().map(|f| f.component + 1).max().unwrap_or(0);
        let mesh = Self {
            dim,
            vertices,
            cells,
            facets,
            n_components,
            geometry,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks positivity of cell measures, facet ownership and unit normals.
    pub fn validate(&self) -> Result<()> {
        for (c, _) in self.cells.iter().enumerate() {
            let m = self.cell_measure(c);
            if !(m > 0.0) {
                return Err(Error::MeshFailure(format!("cell {c} has non-positive measure {m:e}")));
            }
        }
        for (k, f) in self.facets.iter().enumerate() {
            if (f.normal.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::MeshFailure(format!("facet {k} normal is not unit length")));
            }
            if f.component >= self.n_components {
                return Err(Error::MeshFailure(format!("facet {k} has no component")));
            }
            if !f.vertices.iter().all(|v| self.cells[f.cell].contains(v)) {
                return Err(Error::MeshFailure(format!("facet {k} is not a face of its cell")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn facets(&self) -> &[BoundaryFacet] {
        &self.facets
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        signed_measure(self.dim, &self.cell_points(c))
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_measure(c)).sum()
    }

    pub fn boundary_measure(&self) -> f64 {
        self.facets.iter().map(|f| f.measure).sum()
    }

    pub fn facet_midpoint(&self, f: &BoundaryFacet) -> Point {
        f.vertices.iter().map(|&v| self.vertices[v]).sum::<Point>() / f.vertices.len() as f64
    }

    pub fn is_boundary_vertex(&self) -> Vec<bool> {
        let mut flag = vec![false; self.n_vertices()];
        for f in &self.facets {
            for &v in &f.vertices {
                flag[v] = true;
            }
        }
        flag
    }

    /// Sorted boundary vertex indices of each component.
    pub fn component_vertices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_components];
        for f in &self.facets {
            out[f.component].extend(&f.vertices);
        }
        for list in out.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        out
    }

    /// Longest edge over all cells.
    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for cell in &self.cells {
            for i in 0..cell.len() {
                for j in i + 1..cell.len() {
                    h = h.max((self.vertices[cell[i]] - self.vertices[cell[j]]).norm());
                }
            }
        }
        h
    }
}
