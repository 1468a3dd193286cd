use std::f64::consts::{FRAC_PI_2, PI};

use super::IntervalBc;
use crate::coeff::ScalarField;
use crate::error::{Error, Result};
use crate::mesh::Point;

/// Default number of fixed RK4 steps over `[0, b]`.
pub const PRUFER_STEPS: usize = 4096;

fn phase_rate(v: &ScalarField, x: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c * c - v.value(Point::new(x, 0.0)) * s * s
}

fn rk4(v: &ScalarField, x: f64, theta: f64, h: f64) -> f64 {
    let k1 = phase_rate(v, x, theta);
    let k2 = phase_rate(v, x + 0.5 * h, theta + 0.5 * h * k1);
    let k3 = phase_rate(v, x + 0.5 * h, theta + 0.5 * h * k2);
    let k4 = phase_rate(v, x + h, theta + h * k3);
    theta + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Conjugate times in `[a, b]` of `−u″ + V u = 0` on `(0, t)` by the Prüfer phase
/// `θ′ = cos²θ − V sin²θ`, `u = ρ sin θ`, `u′ = ρ cos θ`, integrated from `x = 0` with
/// `steps` fixed RK4 steps.
///
/// Dirichlet times are where `θ ≡ 0 (mod π)`, Neumann times where `θ ≡ π/2 (mod π)`.
/// Each time is refined by bisection on a single RK4 step from the enclosing node.
pub fn prufer_conjugate_times(v: &ScalarField, bc: &IntervalBc, range: (f64, f64), steps: usize) -> Result<Vec<f64>> {
    let (a, b) = range;
    if !(0.0 <= a && a < b) {
        return Err(Error::InvalidArgument(format!("invalid range [{a}, {b}]")));
    }
    let theta0 = match bc {
        IntervalBc::Dirichlet => 0.0,
        IntervalBc::Neumann => FRAC_PI_2,
        IntervalBc::Robin(_) => return Err(Error::UnsupportedBc("Prüfer oracle covers Dirichlet and Neumann".into())),
    };
    if steps == 0 {
        return Err(Error::RefineSteps("at least one step is required".into()));
    }
    let h = b / steps as f64;
    // number of multiples of π passed by θ − θ0, tracked from the closed side
    let level = |theta: f64| ((theta - theta0) / PI).floor();
    let mut times = Vec::new();
    let mut theta = theta0;
    for i in 0..steps {
        let x = i as f64 * h;
        let next = rk4(v, x, theta, h);
        if (next - theta).abs() > FRAC_PI_2 || !next.is_finite() {
            return Err(Error::RefineSteps(format!("phase jump {:.3} at x = {x:.6}; increase the step count", next - theta)));
        }
        let (l0, l1) = (level(theta), level(next));
        if l0 != l1 && !(i == 0 && l1 < l0) {
            let target = theta0 + PI * l0.max(l1);
            let g = |s: f64| rk4(v, x, theta, s - x) - target;
            let t = super::bessel::bisect(g, x, x + h);
            if t > 0.0 && a <= t && t <= b {
                times.push(t);
            }
        }
        theta = next;
    }
    Ok(times)
}
