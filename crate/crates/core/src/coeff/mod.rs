//! Coefficient fields of the Dirichlet form and the potential.

mod expr;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::mesh::Point;

pub use expr::{parse_expr, BinOp, Expr, Func, Var};

/// Central-difference step used when a field has no analytic gradient.
pub const FD_GRADIENT_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Constant(f64),
    /// `Σ_k coeffs[k] r^k`.
    RadialPolynomial(Vec<f64>),
    /// `coef · x^px · y^py`.
    Monomial { coef: f64, px: u32, py: u32 },
    Expression(Expr),
    /// `base + offset`.
    Shifted(Box<ScalarField>, f64),
}

pub fn parse_field(source: &str) -> Result<ScalarField> {
    let e = parse_expr(source)?;
    Ok(match e.constant_value() {
        Some(c) => ScalarField::Constant(c),
        None => ScalarField::Expression(e),
    })
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField::Constant(0.0)
    }

    pub fn shifted(self, offset: f64) -> Self {
        match self {
            _ if offset == 0.0 => self,
            ScalarField::Constant(c) => ScalarField::Constant(c + offset),
            ScalarField::Shifted(base, o) => ScalarField::Shifted(base, o + offset),
            other => ScalarField::Shifted(Box::new(other), offset),
        }
    }

    pub fn value(&self, p: Point) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::RadialPolynomial(cs) => {
                let r = p.norm();
                cs.iter().rev().fold(0.0, |acc, c| acc * r + c)
            }
            ScalarField::Monomial { coef, px, py } => coef * p.x.powi(*px as i32) * p.y.powi(*py as i32),
            ScalarField::Expression(e) => e.eval(p.x, p.y),
            ScalarField::Shifted(base, o) => base.value(p) + o,
        }
    }

    /// Analytic gradient; every built-in form and every expression has one.
    pub fn gradient(&self, p: Point) -> Vector2<f64> {
        match self {
            ScalarField::Constant(_) => Vector2::zeros(),
            ScalarField::RadialPolynomial(cs) => {
                let r = p.norm();
                if r == 0.0 {
                    return Vector2::zeros();
                }
                let dr: f64 = cs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| k as f64 * c * r.powi(k as i32 - 1))
                    .sum();
                p * (dr / r)
            }
            ScalarField::Monomial { coef, px, py } => {
                let dx = if *px == 0 { 0.0 } else { coef * *px as f64 * p.x.powi(*px as i32 - 1) * p.y.powi(*py as i32) };
                let dy = if *py == 0 { 0.0 } else { coef * *py as f64 * p.x.powi(*px as i32) * p.y.powi(*py as i32 - 1) };
                Vector2::new(dx, dy)
            }
            ScalarField::Expression(e) => {
                let (_, gx, gy) = e.eval_with_gradient(p.x, p.y);
                Vector2::new(gx, gy)
            }
            ScalarField::Shifted(base, _) => base.gradient(p),
        }
    }

    /// Central-difference gradient with step [`FD_GRADIENT_STEP`].
    pub fn gradient_fd(&self, p: Point) -> Vector2<f64> {
        let h = FD_GRADIENT_STEP;
        let ex = Vector2::new(h, 0.0);
        let ey = Vector2::new(0.0, h);
        Vector2::new(
            (self.value(p + ex) - self.value(p - ex)) / (2.0 * h),
            (self.value(p + ey) - self.value(p - ey)) / (2.0 * h),
        )
    }

    /// Analytic gradient, falling back to central differences where it is not finite.
    pub fn gradient_or_fd(&self, p: Point) -> Vector2<f64> {
        let g = self.gradient(p);
        if g.iter().all(|v| v.is_finite()) {
            g
        } else {
            self.gradient_fd(p)
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            ScalarField::Constant(c) => Some(*c),
            ScalarField::RadialPolynomial(cs) if cs.iter().skip(1).all(|&c| c == 0.0) => {
                Some(cs.first().copied().unwrap_or(0.0))
            }
            ScalarField::Monomial { coef, px: 0, py: 0 } => Some(*coef),
            ScalarField::Expression(e) => e.constant_value(),
            ScalarField::Shifted(base, o) => base.constant_value().map(|c| c + o),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant_value() == Some(0.0)
    }
}

/// Minimum over `points` of `λ − V(x) − ½ x·∇V(x)`.
///
/// A positive value certifies the star-shaped Neumann monotonicity hypothesis on
/// the sampled set. Points are measured from the scaling center.
pub fn neumann_condition_margin(v: &ScalarField, lambda: f64, points: &[Point]) -> f64 {
    points
        .iter()
        .map(|&x| lambda - v.value(x) - 0.5 * x.dot(&v.gradient_or_fd(x)))
        .fold(f64::INFINITY, f64::min)
}

/// Principal part `a^{ij}`; user input is limited to constant matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixField {
    Identity,
    Constant(Matrix2<f64>),
}

impl MatrixField {
    pub fn value(&self, _p: Point) -> Matrix2<f64> {
        match self {
            MatrixField::Identity => Matrix2::identity(),
            MatrixField::Constant(m) => *m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VectorField {
    Zero,
    Constant(Vector2<f64>),
}

impl VectorField {
    pub fn value(&self, _p: Point) -> Vector2<f64> {
        match self {
            VectorField::Zero => Vector2::zeros(),
            VectorField::Constant(v) => *v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            VectorField::Zero => true,
            VectorField::Constant(v) => v.iter().all(|&c| c == 0.0),
        }
    }
}

/// Pointwise coefficients of
/// `D(u,v) = ∫ a^{ij} ∂_i u ∂_j v + b^i (∂_i u) v + c^i u (∂_i v) + d u v`.
pub trait Coefficients {
    fn diffusion(&self, p: Point) -> Result<Matrix2<f64>>;
    fn drift(&self, p: Point) -> Result<(Vector2<f64>, Vector2<f64>)>;
    fn reaction(&self, p: Point) -> Result<f64>;
}

fn finite_or<T>(ok: bool, p: Point, value: T) -> Result<T> {
    if ok {
        Ok(value)
    } else {
        Err(Error::NonFiniteCoefficient { x: p.x, y: p.y })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    a: MatrixField,
    b: VectorField,
    c: VectorField,
    d: ScalarField,
}

impl CoefficientSet {
    /// Rejects nonsymmetric forms (`b ≠ c`) and non-SPD principal parts.
    pub fn new(a: MatrixField, b: VectorField, c: VectorField, d: ScalarField) -> Result<Self> {
        if b != c && !(b.is_zero() && c.is_zero()) {
            return Err(Error::InvalidArgument(
                "first-order coefficients must satisfy b = c for a symmetric form".into(),
            ));
        }
        if let MatrixField::Constant(m) = &a {
            if (m - m.transpose()).abs().max() > 0.0 {
                return Err(Error::InvalidArgument("a^{ij} must be symmetric".into()));
            }
            if m.symmetric_eigenvalues().min() <= 0.0 {
                return Err(Error::InvalidArgument("a^{ij} must be positive definite".into()));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// `-Δ + V`.
    pub fn schrodinger(potential: ScalarField) -> Self {
        Self { a: MatrixField::Identity, b: VectorField::Zero, c: VectorField::Zero, d: potential }
    }

    /// Zeroth-order part only; with `d = 1` this is the L² pairing.
    pub fn reaction_only(d: ScalarField) -> Self {
        Self {
            a: MatrixField::Constant(Matrix2::zeros()),
            b: VectorField::Zero,
            c: VectorField::Zero,
            d,
        }
    }

    /// The same form with `d` replaced by `d − λ`, i.e. the operator `L − λ`.
    pub fn shifted(&self, lambda: f64) -> Self {
        Self { d: self.d.clone().shifted(-lambda), ..self.clone() }
    }

    pub fn a(&self) -> &MatrixField {
        &self.a
    }

    pub fn b(&self) -> &VectorField {
        &self.b
    }

    pub fn c(&self) -> &VectorField {
        &self.c
    }

    pub fn d(&self) -> &ScalarField {
        &self.d
    }

    pub fn is_laplacian_type(&self) -> bool {
        self.a == MatrixField::Identity && self.b.is_zero() && self.c.is_zero()
    }

    /// Strong-ellipticity constant `λ₀ = min_x min eig a(x)` over the samples.
    pub fn ellipticity_constant(&self, dim: usize, points: &[Point]) -> f64 {
        points
            .iter()
            .map(|&p| {
                let m = self.a.value(p);
                if dim == 1 {
                    m[(0, 0)]
                } else {
                    m.symmetric_eigenvalues().min()
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl Coefficients for CoefficientSet {
    fn diffusion(&self, p: Point) -> Result<Matrix2<f64>> {
        let m = self.a.value(p);
        finite_or(m.iter().all(|v| v.is_finite()), p, m)
    }

    fn drift(&self, p: Point) -> Result<(Vector2<f64>, Vector2<f64>)> {
        let (b, c) = (self.b.value(p), self.c.value(p));
        finite_or(b.iter().chain(c.iter()).all(|v| v.is_finite()), p, (b, c))
    }

    fn reaction(&self, p: Point) -> Result<f64> {
        let d = self.d.value(p);
        finite_or(d.is_finite(), p, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_disk_samples() -> Vec<Point> {
        let mut pts = vec![Point::zeros()];
        for i in 1..=20 {
            for j in 0..24 {
                let r = i as f64 / 20.0;
                let th = j as f64 * std::f64::consts::TAU / 24.0;
                pts.push(Point::new(r * th.cos(), r * th.sin()));
            }
        }
        pts
    }

    #[test]
    fn margin_examples() {
        let v = parse_field("-5 + r^2").unwrap();
        let m = neumann_condition_margin(&v, 10.0, &unit_disk_samples());
        assert!((m - 13.0).abs() < 1e-9, "{m}");
        assert_eq!(neumann_condition_margin(&ScalarField::zero(), 1.0, &unit_disk_samples()), 1.0);
        let c = ScalarField::Constant(2.5);
        assert_eq!(neumann_condition_margin(&c, 2.5, &unit_disk_samples()), 0.0);
    }

    #[test]
    fn builtin_gradients_match_finite_differences() {
        let fields = [
            ScalarField::RadialPolynomial(vec![1.0, -2.0, 0.5, 0.25]),
            ScalarField::Monomial { coef: 1.5, px: 2, py: 3 },
            parse_field("exp(-r^2)*x").unwrap(),
            parse_field("x*y - 3").unwrap().shifted(4.0),
        ];
        for f in &fields {
            for p in unit_disk_samples().into_iter().skip(30).step_by(17) {
                let (g, fd) = (f.gradient(p), f.gradient_fd(p));
                for k in 0..2 {
                    assert!((g[k] - fd[k]).abs() <= 1e-6 * fd[k].abs().max(1.0), "{f:?} at {p:?}");
                }
            }
        }
    }

    #[test]
    fn constant_detection() {
        assert_eq!(parse_field("-(3.5*pi)").unwrap().constant_value(), Some(-3.5 * std::f64::consts::PI));
        assert_eq!(ScalarField::Constant(1.0).shifted(-3.0), ScalarField::Constant(-2.0));
        assert!(parse_field("x").unwrap().constant_value().is_none());
    }

    #[test]
    fn nonsymmetric_forms_are_rejected() {
        let b = VectorField::Constant(Vector2::new(1.0, 0.0));
        let err = CoefficientSet::new(MatrixField::Identity, b.clone(), VectorField::Zero, ScalarField::zero());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        assert!(CoefficientSet::new(MatrixField::Identity, b.clone(), b, ScalarField::zero()).is_ok());
        let indefinite = MatrixField::Constant(Matrix2::new(1.0, 2.0, 2.0, 1.0));
        assert!(CoefficientSet::new(indefinite, VectorField::Zero, VectorField::Zero, ScalarField::zero()).is_err());
    }

    #[test]
    fn ellipticity_is_reported() {
        let a = MatrixField::Constant(Matrix2::new(2.0, 0.5, 0.5, 1.0));
        let set = CoefficientSet::new(a, VectorField::Zero, VectorField::Zero, ScalarField::zero()).unwrap();
        let l0 = set.ellipticity_constant(2, &unit_disk_samples());
        assert!((l0 - (1.5 - (0.5f64).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn non_finite_values_are_errors() {
        let set = CoefficientSet::schrodinger(parse_field("1/x").unwrap());
        assert!(matches!(set.reaction(Point::zeros()), Err(Error::NonFiniteCoefficient { .. })));
    }
}
