use nalgebra::{DMatrix, SymmetricEigen};

use super::{Pencil, RESIDUAL_TOL};
use crate::error::{Error, Result};
use crate::linalg::SkylineLdl;

/// Controls for the windowed shift-invert solver.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowOptions {
    /// Eigenpairs nearest the target that must converge.
    pub wanted: usize,
    /// Extra block vectors that speed up convergence and are discarded.
    pub guard: usize,
    /// Pencils of at most this dimension are solved densely.
    pub dense_threshold: usize,
    pub max_iterations: usize,
}

impl Default for WindowOptions {
    fn default() -> Self {
        Self { wanted: 8, guard: 6, dense_threshold: 160, max_iterations: 400 }
    }
}

/// Deterministic fill vectors for the starting block.
fn pseudo_random(m: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x2545_F491_4F6C_DD1D);
    (0..m)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// B-orthonormalizes the block in place by two passes of classical Gram–Schmidt,
/// replacing numerically dependent columns with fresh fill vectors.
fn b_orthonormalize(pencil: &Pencil<'_>, block: &mut [Vec<f64>], seed: &mut u64) {
    let m = pencil.dimension();
    let mut bq: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for j in 0..block.len() {
        let mut attempts = 0;
        loop {
            let initial = dot(&block[j], &pencil.mass.mul_vec(&block[j])).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    let c = dot(&bq[i], &block[j]);
                    let (head, tail) = block.split_at_mut(j);
                    for (x, q) in tail[0].iter_mut().zip(&head[i]) {
                        *x -= c * q;
                    }
                }
            }
            let bx = pencil.mass.mul_vec(&block[j]);
            let norm = dot(&block[j], &bx).sqrt();
            if norm > 1e-10 * initial && norm.is_finite() {
                block[j].iter_mut().for_each(|x| *x /= norm);
                bq.push(bx.into_iter().map(|x| x / norm).collect());
                break;
            }
            attempts += 1;
            assert!(attempts < 8, "cannot extend the block to an independent set");
            *seed += 1;
            block[j] = pseudo_random(m, *seed);
        }
    }
}

/// Block shift-invert subspace iteration with Rayleigh–Ritz extraction.
///
/// Returns the `wanted` eigenvalues of `(A − shift·B, B)` closest to zero in
/// ascending order, their B-orthonormal vectors, and the global index of the first.
pub(super) fn shift_invert(
    pencil: &Pencil<'_>,
    shift: f64,
    opts: &WindowOptions,
    warm: Option<&[Vec<f64>]>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, usize)> {
    let m = pencil.dimension();
    let wanted = opts.wanted.min(m);
    let p = (wanted + opts.guard).min(m);
    let scale = pencil.stiffness_norm / pencil.mass_norm.max(f64::MIN_POSITIVE);
    let base = shift.abs().max(1.0) * 1e-12 + 1e-9 * scale;
    let perm = SkylineLdl::ordering(&pencil.stiffness);

    let mut last_err = None;
    for (attempt, factor) in [-0.618, 1.37, -4.1, 9.3, -23.0].iter().enumerate() {
        let sigma = shift + factor * base;
        let shifted = pencil.stiffness.linear_combination(1.0, &pencil.mass, -sigma);
        let ldl = match SkylineLdl::factor(&shifted, &perm) {
            Ok(l) => l,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let mut seed = 17 + attempt as u64 * 1000;
        let mut block: Vec<Vec<f64>> = warm.unwrap_or(&[]).iter().filter(|v| v.len() == m).take(p - 2.min(p)).cloned().collect();
        while block.len() < p {
            seed += 1;
            block.push(pseudo_random(m, seed));
        }
        b_orthonormalize(pencil, &mut block, &mut seed);

        let mut result = None;
        for iter in 0..opts.max_iterations {
            let mut y: Vec<Vec<f64>> = block.iter().map(|x| ldl.solve(&pencil.mass.mul_vec(x))).collect();
            b_orthonormalize(pencil, &mut y, &mut seed);
            let ay: Vec<Vec<f64>> = y.iter().map(|v| pencil.stiffness.mul_vec(v)).collect();
            let h = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])));
            let eig = SymmetricEigen::new(h);
            let mut order: Vec<usize> = (0..p).collect();
            order.sort_by(|&i, &j| (eig.eigenvalues[i] - sigma).abs().total_cmp(&(eig.eigenvalues[j] - sigma).abs()));
            let combine = |src: &[Vec<f64>], k: usize| -> Vec<f64> {
                let mut out = vec![0.0; m];
                for (i, col) in src.iter().enumerate() {
                    let c = eig.eigenvectors[(i, k)];
                    out.iter_mut().zip(col).for_each(|(o, v)| *o += c * v);
                }
                out
            };
            block = order.iter().map(|&k| combine(&y, k)).collect();
            let thetas: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

            let converged = iter >= 1
                && (0..wanted).all(|i| {
                    let ax = combine(&ay, order[i]);
                    let bx = pencil.mass.mul_vec(&block[i]);
                    let r: f64 = ax.iter().zip(&bx).map(|(a, b)| (a - thetas[i] * b).powi(2)).sum::<f64>().sqrt();
                    let xn = dot(&block[i], &block[i]).sqrt();
                    r <= 0.1 * RESIDUAL_TOL * (pencil.stiffness_norm + thetas[i].abs() * pencil.mass_norm) * xn
                });
            if converged {
                result = Some(thetas);
                break;
            }
        }
        let Some(thetas) = result else {
            return Err(Error::NumericalBreakdown {
                pivot: 0,
                detail: format!("shift-invert iteration did not converge in {} steps", opts.max_iterations),
            });
        };
        let too_close = thetas[..wanted].iter().any(|th| (th - sigma).abs() <= 1e-3 * base);
        if too_close {
            last_err = Some(Error::NumericalBreakdown { pivot: 0, detail: "eigenvalue at the factorization shift".into() });
            continue;
        }
        let n_below = ldl.negative_count();
        let k_below = thetas[..wanted].iter().filter(|&&th| th < sigma).count();
        if k_below > n_below {
            last_err = Some(Error::NumericalBreakdown { pivot: 0, detail: "inconsistent inertia in eigenvalue window".into() });
            continue;
        }
        let mut pairs: Vec<(f64, Vec<f64>)> = thetas.into_iter().zip(block).take(wanted).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (vals, vecs): (Vec<f64>, Vec<Vec<f64>>) = pairs.into_iter().map(|(th, v)| (th - shift, v)).unzip();
        return Ok((vals, vecs, n_below - k_below));
    }
    Err(last_err.unwrap_or(Error::NumericalBreakdown { pivot: 0, detail: "shift-invert failed".into() }))
}
