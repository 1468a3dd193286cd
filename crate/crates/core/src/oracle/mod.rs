//! Independent reference values: closed-form interval spectra, Prüfer shooting,
//! and Bessel-function spectra of disks and annuli.

pub mod bessel;
mod prufer;

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use bessel::{bessel_j, bessel_j_prime, bessel_j_prime_zeros, bessel_j_zeros, bessel_y, bessel_y_prime};
pub use prufer::{prufer_conjugate_times, PRUFER_STEPS};

#[derive(Debug, Clone, PartialEq)]
pub enum IntervalBc {
    Dirichlet,
    Neumann,
    /// `∂u/∂N + βu = 0` at both ends.
    Robin(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskBc {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleSource {
    ClosedForm,
    Shooting,
    Bessel,
}

/// Ascending eigenvalues with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpectrum {
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub source: OracleSource,
    pub parameters: String,
}

impl OracleSpectrum {
    /// Eigenvalues strictly below `level`, counted with multiplicity.
    pub fn count_below(&self, level: f64) -> usize {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .filter(|(l, _)| **l < level)
            .map(|(_, m)| m)
            .sum()
    }

    fn sorted(mut pairs: Vec<(f64, usize)>, source: OracleSource, parameters: String) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (eigenvalues, multiplicities) = pairs.into_iter().unzip();
        Self { eigenvalues, multiplicities, source, parameters }
    }
}

/// Roots of `f` on `(0, limit]` located on a uniform grid and refined by bisection.
fn scan_roots(f: impl Fn(f64) -> f64, limit: f64, step: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut x = 1e-9 * step;
    let mut fx = f(x);
    while x < limit {
        let xn = (x + step).min(limit);
        let fxn = f(xn);
        if fxn == 0.0 {
            roots.push(xn);
        } else if fx != 0.0 && (fx < 0.0) != (fxn < 0.0) {
            roots.push(bessel::bisect(&f, x, xn));
        }
        x = xn;
        fx = fxn;
    }
    roots
}

/// The `count` lowest eigenvalues of `−u″ − c u` on `(0, t)`.
///
/// Dirichlet and Neumann spectra are `(kπ/t)² − c` for `k ≥ 1` and `k ≥ 0`. For Robin,
/// positive `μ = k²` solve `(k² − β²) sin kt − 2βk cos kt = 0` and negative `μ = −κ²`
/// solve `(κ² + β²) tanh κt + 2βκ = 0`.
pub fn interval_spectrum(c: f64, t: f64, bc: &IntervalBc, count: usize) -> Result<OracleSpectrum> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("interval length must be positive, got {t}")));
    }
    let params = format!("c={c}, t={t}, bc={bc:?}");
    let pairs: Vec<(f64, usize)> = match bc {
        IntervalBc::Dirichlet => (1..=count).map(|k| ((k as f64 * PI / t).powi(2) - c, 1)).collect(),
        IntervalBc::Neumann => (0..count).map(|k| ((k as f64 * PI / t).powi(2) - c, 1)).collect(),
        IntervalBc::Robin(beta) => {
            let beta = *beta;
            let mut mus = Vec::new();
            if beta < 0.0 {
                let kmax = 4.0 * beta.abs() + 10.0 / t;
                let g = |k: f64| (k * k + beta * beta) * (k * t).tanh() + 2.0 * beta * k;
                mus.extend(scan_roots(g, kmax, kmax / 4000.0).into_iter().map(|k| -k * k));
            }
            if beta == 0.0 || (beta * (2.0 + beta * t)).abs() <= 1e-14 * beta.abs().max(1.0) {
                mus.push(0.0);
            }
            let mut limit = (count as f64 + 2.0) * PI / t + beta.abs();
            loop {
                let f = |k: f64| (k * k - beta * beta) * (k * t).sin() - 2.0 * beta * k * (k * t).cos();
                let mut roots: Vec<f64> = scan_roots(f, limit, PI / (t * 64.0)).into_iter().map(|k| k * k).collect();
                roots.retain(|&mu| mu > 1e-12);
                if mus.len() + roots.len() >= count {
                    mus.extend(roots);
                    break;
                }
                limit *= 2.0;
            }
            mus.sort_by(f64::total_cmp);
            mus.truncate(count);
            mus.into_iter().map(|mu| (mu - c, 1)).collect()
        }
    };
    Ok(OracleSpectrum::sorted(pairs, OracleSource::ClosedForm, params))
}

/// Eigenvalues below `level` of `−Δ` on the disk of radius `radius`, with angular
/// modes `m ≤ max_mode` (multiplicity 2 for `m ≥ 1`).
///
/// Fails when `max_mode` could exclude an eigenvalue below `level`: any mode with
/// `m ≥ max_mode` then has its first zero within 1% of `radius·√level`.
pub fn disk_spectrum(level: f64, bc: DiskBc, radius: f64, max_mode: u32) -> Result<OracleSpectrum> {
    if !(level > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidArgument("disk oracle needs level > 0 and radius > 0".into()));
    }
    let limit = radius * level.sqrt();
    let zeros = |m: u32, lim: f64| match bc {
        DiskBc::Dirichlet => bessel_j_zeros(m, lim),
        DiskBc::Neumann => bessel_j_prime_zeros(m, lim),
    };
    if !zeros(max_mode, 1.01 * limit).is_empty() || (max_mode as f64) < limit {
        return Err(Error::IncreaseModeCap(format!(
            "angular modes up to {max_mode} do not cover radius·√level = {limit:.4}"
        )));
    }
    let mut pairs = Vec::new();
    if bc == DiskBc::Neumann {
        pairs.push((0.0, 1));
    }
    for m in 0..=max_mode {
        let mult = if m == 0 { 1 } else { 2 };
        for z in zeros(m, limit) {
            pairs.push(((z / radius).powi(2), mult));
        }
    }
    Ok(OracleSpectrum::sorted(
        pairs,
        OracleSource::Bessel,
        format!("level={level}, bc={bc:?}, radius={radius}, max_mode={max_mode}"),
    ))
}

/// Conjugate times `t ∈ [a, b]` of `−Δ − λ` on the disks `tΩ`, `Ω` the unit disk:
/// `t = z/√λ` for the Bessel (derivative) zeros `z`, with multiplicity.
pub fn disk_conjugate_times(lambda: f64, bc: DiskBc, range: (f64, f64)) -> Result<Vec<(f64, usize)>> {
    let (a, b) = range;
    let spec = disk_spectrum(lambda * b * b * 1.0001, bc, 1.0, (b * lambda.sqrt()).ceil() as u32 + 2)?;
    let mut out = Vec::new();
    for (mu, mult) in spec.eigenvalues.iter().zip(&spec.multiplicities) {
        if *mu <= 0.0 {
            continue;
        }
        let t = (mu / lambda).sqrt();
        if a <= t && t <= b {
            out.push((t, *mult));
        }
    }
    Ok(out)
}

/// First nonzero Neumann eigenvalue of `−Δ` on the annulus `r_in < r < r_out`, with
/// its angular mode. For each mode `m ≤ 3` the radial condition is the cross product
/// `J_m′(k r_in) Y_m′(k r_out) − J_m′(k r_out) Y_m′(k r_in) = 0`.
pub fn annulus_first_neumann(r_in: f64, r_out: f64) -> Result<(f64, u32)> {
    if !(0.0 < r_in && r_in < r_out) {
        return Err(Error::InvalidArgument("annulus needs 0 < r_in < r_out".into()));
    }
    let mut best: Option<(f64, u32)> = None;
    for m in 0..=3u32 {
        let f = |k: f64| {
            bessel_j_prime(m, k * r_in) * bessel_y_prime(m, k * r_out)
                - bessel_j_prime(m, k * r_out) * bessel_y_prime(m, k * r_in)
        };
        let limit = (m as f64 + 2.0) * PI / (r_out - r_in) + 4.0 / r_in;
        let step = (0.01 / r_out).min(PI / (r_out - r_in) / 50.0);
        // skip the spurious sign flip at the k → 0 singularity
        let roots = scan_roots(f, limit, step);
        if let Some(&k) = roots.iter().find(|&&k| k * r_in > 1e-3) {
            let mu = k * k;
            if best.is_none_or(|(b, _)| mu < b) {
                best = Some((mu, m));
            }
        }
    }
    best.ok_or_else(|| Error::NumericalBreakdown { pivot: 0, detail: "no annulus Neumann root found".into() })
}

#[cfg(test)]
mod tests;
