//! Plain-text mesh format.
//!
//! ```text
//! dim nv nc nbf
//! x [y]            (nv lines)
//! v0 v1 [v2]       (nc lines)
//! v0 [v1] comp     (nbf lines)
//! ```

use std::fmt::Write as _;

use super::{Geometry, Mesh, Point};
use crate::error::{Error, Result};

impl Mesh {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let dim = self.dim();
        writeln!(out, "{} {} {} {}", dim, self.n_vertices(), self.n_cells(), self.facets().len()).unwrap();
        for p in self.vertices() {
            if dim == 1 {
                writeln!(out, "{:?}", p.x).unwrap();
            } else {
                writeln!(out, "{:?} {:?}", p.x, p.y).unwrap();
            }
        }
        for cell in self.cells() {
            let line: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        for f in self.facets() {
            let line: Vec<String> = f.vertices.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{} {}", line.join(" "), f.component).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::InvalidArgument(format!("mesh line {}: {msg}", line + 1));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut numbers = |expected: usize| -> Result<(usize, Vec<f64>)> {
            let (no, line) = lines.next().ok_or_else(|| Error::InvalidArgument("truncated mesh file".into()))?;
            let vals: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            let vals = vals.map_err(|_| bad(no, "expected numbers"))?;
            if vals.len() != expected {
                return Err(bad(no, &format!("expected {expected} fields, found {}", vals.len())));
            }
            Ok((no, vals))
        };
        let (no, header) = numbers(4)?;
        let [dim, nv, nc, nbf] = [header[0], header[1], header[2], header[3]].map(|v| v as usize);
        if !(1..=2).contains(&dim) {
            return Err(bad(no, "dimension must be 1 or 2"));
        }
        let as_index = |v: f64, no: usize, bound: usize| -> Result<usize> {
            if v.fract() != 0.0 || v < 0.0 || v as usize >= bound {
                return Err(bad(no, "index out of range"));
            }
            Ok(v as usize)
        };
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (_, v) = numbers(dim)?;
            vertices.push(Point::new(v[0], if dim == 2 { v[1] } else { 0.0 }));
        }
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (no, v) = numbers(dim + 1)?;
            cells.push(v.iter().map(|&x| as_index(x, no, nv)).collect::<Result<Vec<_>>>()?);
        }
        let mut facets = Vec::with_capacity(nbf);
        for _ in 0..nbf {
            let (no, v) = numbers(dim + 1)?;
            let verts = v[..dim].iter().map(|&x| as_index(x, no, nv)).collect::<Result<Vec<_>>>()?;
            let comp = as_index(v[dim], no, nbf)?;
            facets.push((verts, comp));
        }
        Mesh::from_parts(dim, vertices, cells, facets, Geometry::Unspecified)
    }
}
