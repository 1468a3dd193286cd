use std::collections::VecDeque;

use crate::error::{Error, Result};

use super::csr::CsrMatrix;

/// Reverse Cuthill–McKee ordering of a structurally symmetric matrix.
///
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, visited_mask: &[bool]| -> (usize, usize) {
        // (last node reached, eccentricity)
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        let mut last = start;
        while let Some(v) = queue.pop_front() {
            last = v;
            for &w in a.row(v).0 {
                if !visited_mask[w] && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        (last, dist[last])
    };

    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .expect("unvisited node");
        // pseudo-peripheral start node
        let mut start = seed;
        let mut ecc = 0;
        for _ in 0..4 {
            let (far, e) = bfs_levels(start, &visited);
            if e <= ecc {
                break;
            }
            ecc = e;
            start = far;
        }

        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// `L D Lᵀ` factorization of a symmetric matrix in variable-band (skyline) storage.
///
/// No pivoting is performed, so the factorization exists only when every leading
/// principal minor of the permuted matrix is nonsingular. By Sylvester's law the
/// number of negative entries of `D` equals the number of negative eigenvalues.
#[derive(Debug, Clone)]
pub struct SkylineLdl {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl SkylineLdl {
    pub fn ordering(a: &CsrMatrix) -> Vec<usize> {
        reverse_cuthill_mckee(a)
    }

    /// Factors `a` under the given ordering (`perm[new] = old`).
    pub fn factor(a: &CsrMatrix, perm: &[usize]) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(perm.len(), n);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &c in a.row(old).0 {
                let cn = inv[c];
                if cn < first[new] {
                    first[new] = cn;
                }
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i]));
        }
        let mut lower = vec![0.0; offset[n]];
        let mut diag = vec![0.0; n];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let cn = inv[c];
                if cn < new {
                    lower[offset[new] + cn - first[new]] = v;
                } else if cn == new {
                    diag[new] = v;
                }
            }
        }

        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fi = first[i];
            let row_start = offset[i];
            // row i now holds a_ij; overwrite with g_ij = l_ij d_j
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let gi = &lower[row_start + k0 - fi..row_start + j - fi];
                let lj = &lower[offset[j] + k0 - fj..offset[j] + j - fj];
                let dot: f64 = gi.iter().zip(lj).map(|(a, b)| a * b).sum();
                lower[row_start + j - fi] -= dot;
            }
            let mut di = diag[i];
            for j in fi..i {
                let g = lower[row_start + j - fi];
                let l = g / diag[j];
                di -= g * l;
                lower[row_start + j - fi] = l;
            }
            if !di.is_finite() || di.abs() <= 1e-14 * scale {
                return Err(Error::NumericalBreakdown {
                    pivot: perm[i],
                    detail: format!("LDLᵀ pivot {di:e} is numerically zero"),
                });
            }
            diag[i] = di;
        }

        Ok(Self {
            perm: perm.to_vec(),
            first,
            offset,
            lower,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of negative pivots, i.e. negative eigenvalues of the factored matrix.
    pub fn negative_count(&self) -> usize {
        self.diag.iter().filter(|&&d| d < 0.0).count()
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.diag.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()))
    }

    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.offset[i]..self.offset[i + 1]];
            let dot: f64 = row.iter().zip(&x[fi..i]).map(|(l, v)| l * v).sum();
            x[i] -= dot;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.offset[i]..self.offset[i + 1]];
            for (l, v) in row.iter().zip(&mut x[fi..i]) {
                *v -= l * xi;
            }
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}
