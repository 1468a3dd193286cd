use nalgebra::{Matrix2, Vector2};

use crate::coeff::{CoefficientSet, Coefficients};
use crate::error::{Error, Result};
use crate::mesh::{DiffeoFamily, FamilyKind, Point};

/// Coefficients of `D_t` transported to the reference domain:
/// `a_t = |J| J⁻¹ (a∘φ_t) J⁻ᵀ`, `b_t = |J| J⁻¹ (b∘φ_t)`, `c_t` likewise, `d_t = |J| (d∘φ_t)`.
#[derive(Debug, Clone)]
pub struct PulledBack<'a> {
    coeffs: &'a CoefficientSet,
    family: &'a DiffeoFamily,
    t: f64,
}

pub fn pullback_coefficients<'a>(coeffs: &'a CoefficientSet, family: &'a DiffeoFamily, t: f64) -> PulledBack<'a> {
    PulledBack { coeffs, family, t }
}

impl PulledBack<'_> {
    pub fn t(&self) -> f64 {
        self.t
    }

    fn frame(&self, p: Point) -> Result<(Matrix2<f64>, f64, Point)> {
        let (j, det) = self.family.checked_jacobian(self.t, p)?;
        let inv = j.try_inverse().ok_or_else(|| Error::DegenerateFamily {
            t: self.t,
            detail: "singular Jacobian".into(),
        })?;
        Ok((inv, det, self.family.map(self.t, p)))
    }
}

impl Coefficients for PulledBack<'_> {
    fn diffusion(&self, p: Point) -> Result<Matrix2<f64>> {
        let (inv, det, y) = self.frame(p)?;
        Ok(inv * self.coeffs.diffusion(y)? * inv.transpose() * det)
    }

    fn drift(&self, p: Point) -> Result<(Vector2<f64>, Vector2<f64>)> {
        let (inv, det, y) = self.frame(p)?;
        let (b, c) = self.coeffs.drift(y)?;
        Ok((inv * b * det, inv * c * det))
    }

    fn reaction(&self, p: Point) -> Result<f64> {
        let (_, det, y) = self.frame(p)?;
        Ok(det * self.coeffs.reaction(y)?)
    }
}

/// Exact `t`-derivative of the pulled-back coefficients of a star-scaled family.
///
/// With `φ_t(x) = c + t(x − c)` one has `a_t = t^{n−2} a`, `b_t = t^{n−1} b` and
/// `d_t = t^n d(φ_t x)`, where the principal and first-order parts are constant.
#[derive(Debug, Clone)]
pub struct StarDerivative<'a> {
    coeffs: &'a CoefficientSet,
    center: Point,
    dim: usize,
    t: f64,
}

impl<'a> StarDerivative<'a> {
    pub fn new(coeffs: &'a CoefficientSet, family: &DiffeoFamily, t: f64) -> Result<Self> {
        match family.kind() {
            FamilyKind::StarScale { center } => Ok(Self { coeffs, center: *center, dim: family.dim(), t }),
            _ => Err(Error::UnsupportedFamily("analytic derivative needs a star-scaled family".into())),
        }
    }

    fn power(&self, k: i32) -> f64 {
        self.t.powi(k)
    }
}

impl Coefficients for StarDerivative<'_> {
    fn diffusion(&self, p: Point) -> Result<Matrix2<f64>> {
        let n = self.dim as i32;
        Ok(self.coeffs.diffusion(p)? * ((n - 2) as f64 * self.power(n - 3)))
    }

    fn drift(&self, p: Point) -> Result<(Vector2<f64>, Vector2<f64>)> {
        let n = self.dim as i32;
        let s = (n - 1) as f64 * self.power(n - 2);
        let (b, c) = self.coeffs.drift(p)?;
        Ok((b * s, c * s))
    }

    fn reaction(&self, p: Point) -> Result<f64> {
        let n = self.dim as i32;
        let rel = p - self.center;
        let y = self.center + rel * self.t;
        let d = self.coeffs.reaction(y)?;
        let grad = self.coeffs.d().gradient_or_fd(y);
        let out = n as f64 * self.power(n - 1) * d + self.power(n) * grad.dot(&rel);
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::NonFiniteCoefficient { x: y.x, y: y.y })
        }
    }
}
