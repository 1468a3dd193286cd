//! Finite-element surrogates of the rescaled form `D_t`, its `t`-derivative, the
//! reference mass, Robin boundary terms, and the boundary-condition subspaces.

mod constraints;
mod element;
mod pullback;

use crate::coeff::{CoefficientSet, ScalarField};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, SkylineLdl};
use crate::mesh::{DiffeoFamily, FamilyKind, Mesh, Point};

pub use constraints::{constraint_space, BcKind, BoundaryMeasure, ConstraintSpace};
pub use element::{assemble_form, assemble_mass, shape_gradients, QUADRATURE_ORDER};
pub use pullback::{pullback_coefficients, PulledBack, StarDerivative};

/// Relative step of the central difference for `D_t′`, as a fraction of `b − a`.
pub const FD_RELATIVE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMethod {
    Analytic,
    FiniteDifference { step: f64 },
}

impl DerivativeMethod {
    /// Analytic for star-scaled families, otherwise central differences.
    pub fn default_for(family: &DiffeoFamily) -> Self {
        match family.kind() {
            FamilyKind::StarScale { .. } => DerivativeMethod::Analytic,
            _ => {
                let (a, b) = family.t_range();
                DerivativeMethod::FiniteDifference { step: FD_RELATIVE_STEP * (b - a) }
            }
        }
    }
}

fn family_name(family: &DiffeoFamily) -> &'static str {
    match family.kind() {
        FamilyKind::StarScale { .. } => "star_scale",
        FamilyKind::RadialScale { .. } => "radial_scale",
        FamilyKind::Affine { .. } => "affine",
    }
}

/// `∫_{∂Ω_t} β u v dμ_t` pulled back to the reference boundary with the surface
/// factor `|det(Dφ_t) Dφ_t⁻ᵀ N|`.
pub fn robin_boundary_term(mesh: &Mesh, family: &DiffeoFamily, t: f64, beta: &ScalarField) -> Result<CsrMatrix> {
    element::assemble_boundary_mass(mesh, |x, normal| {
        let (_, factor) = family.pushed_normal(t, x, normal)?;
        Ok(beta.value(family.map(t, x)) * factor)
    })
}

/// Exact `t`-derivative of the Robin term for a star-scaled family, whose surface
/// factor is `t^{n−1}`.
fn robin_boundary_term_dt(mesh: &Mesh, family: &DiffeoFamily, t: f64, beta: &ScalarField) -> Result<CsrMatrix> {
    let center = family
        .star_center()
        .ok_or_else(|| Error::UnsupportedFamily("analytic derivative needs a star-scaled family".into()))?;
    let n = family.dim() as i32;
    element::assemble_boundary_mass(mesh, |x, _| {
        let rel = x - center;
        let y = center + rel * t;
        Ok((n - 1) as f64 * t.powi(n - 2) * beta.value(y) + t.powi(n - 1) * beta.gradient_or_fd(y).dot(&rel))
    })
}

/// `D_t` on the reference mesh: the pulled-back volume form plus the Robin term.
pub fn assemble_stiffness(
    mesh: &Mesh,
    coeffs: &CoefficientSet,
    family: &DiffeoFamily,
    t: f64,
    robin: Option<&ScalarField>,
) -> Result<CsrMatrix> {
    let form = assemble_form(mesh, &pullback_coefficients(coeffs, family, t))?;
    match robin {
        Some(beta) if !beta.is_zero() => {
            Ok(form.linear_combination(1.0, &robin_boundary_term(mesh, family, t, beta)?, 1.0))
        }
        _ => Ok(form),
    }
}

/// `D_t′`, analytic for star-scaled families or by the central difference
/// `(D_{t+δ} − D_{t−δ}) / 2δ`.
pub fn assemble_form_derivative(
    mesh: &Mesh,
    coeffs: &CoefficientSet,
    family: &DiffeoFamily,
    t: f64,
    method: DerivativeMethod,
    robin: Option<&ScalarField>,
) -> Result<CsrMatrix> {
    match method {
        DerivativeMethod::Analytic => {
            let form = assemble_form(mesh, &StarDerivative::new(coeffs, family, t)?)?;
            match robin {
                Some(beta) if !beta.is_zero() => {
                    Ok(form.linear_combination(1.0, &robin_boundary_term_dt(mesh, family, t, beta)?, 1.0))
                }
                _ => Ok(form),
            }
        }
        DerivativeMethod::FiniteDifference { step } => {
            if !(step > 0.0) {
                return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")));
            }
            let plus = assemble_stiffness(mesh, coeffs, family, t + step, robin)?;
            let minus = assemble_stiffness(mesh, coeffs, family, t - step, robin)?;
            Ok(plus.linear_combination(0.5 / step, &minus, -0.5 / step))
        }
    }
}

/// Gram matrix of the physical L² product on `Ω_t`, pulled back: `∫ |det Dφ_t| u v`.
pub fn assemble_physical_mass(mesh: &Mesh, family: &DiffeoFamily, t: f64) -> Result<CsrMatrix> {
    let unit = CoefficientSet::reaction_only(ScalarField::Constant(1.0));
    assemble_form(mesh, &pullback_coefficients(&unit, family, t))
}

/// Matrices of the pencil at one parameter value.
#[derive(Debug, Clone)]
pub struct FormSystem {
    pub t: f64,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub stiffness_dt: CsrMatrix,
    pub quadrature_order: usize,
    pub family_kind: &'static str,
    pub derivative: DerivativeMethod,
}

impl FormSystem {
    /// Symmetry of both forms within `1e−12` relative and positive pivots of the mass.
    pub fn check_invariants(&self) -> Result<()> {
        for (name, m) in [("stiffness", &self.stiffness), ("stiffness_dt", &self.stiffness_dt), ("mass", &self.mass)] {
            if !m.is_symmetric(1e-12) {
                return Err(Error::NumericalBreakdown {
                    pivot: 0,
                    detail: format!("{name} is not symmetric (defect {:e})", m.asymmetry()),
                });
            }
        }
        let ldl = SkylineLdl::factor(&self.mass, &SkylineLdl::ordering(&self.mass))?;
        if ldl.negative_count() > 0 {
            return Err(Error::NumericalBreakdown { pivot: 0, detail: "mass matrix is indefinite".into() });
        }
        Ok(())
    }
}

/// Everything needed to assemble the pencil at any `t` for a fixed problem.
#[derive(Debug, Clone)]
pub struct FormAssembler {
    mesh: Mesh,
    coeffs: CoefficientSet,
    family: DiffeoFamily,
    robin: Option<ScalarField>,
    mass: CsrMatrix,
    method: DerivativeMethod,
}

impl FormAssembler {
    pub fn new(mesh: Mesh, coeffs: CoefficientSet, family: DiffeoFamily, bc: &BcKind) -> Result<Self> {
        if family.dim() != mesh.dim() {
            return Err(Error::InvalidArgument(format!(
                "family is {}D but mesh is {}D",
                family.dim(),
                mesh.dim()
            )));
        }
        let robin = match bc {
            BcKind::Robin(beta) if !beta.is_zero() => Some(beta.clone()),
            _ => None,
        };
        let method = DerivativeMethod::default_for(&family);
        let mass = assemble_mass(&mesh);
        Ok(Self { mesh, coeffs, family, robin, mass, method })
    }

    pub fn with_method(mut self, method: DerivativeMethod) -> Self {
        self.method = method;
        self
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn family(&self) -> &DiffeoFamily {
        &self.family
    }

    pub fn method(&self) -> DerivativeMethod {
        self.method
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self, t: f64) -> Result<CsrMatrix> {
        assemble_stiffness(&self.mesh, &self.coeffs, &self.family, t, self.robin.as_ref())
    }

    pub fn stiffness_dt(&self, t: f64) -> Result<CsrMatrix> {
        assemble_form_derivative(&self.mesh, &self.coeffs, &self.family, t, self.method, self.robin.as_ref())
    }

    pub fn physical_mass(&self, t: f64) -> Result<CsrMatrix> {
        assemble_physical_mass(&self.mesh, &self.family, t)
    }

    pub fn system(&self, t: f64) -> Result<FormSystem> {
        Ok(FormSystem {
            t,
            stiffness: self.stiffness(t)?,
            mass: self.mass.clone(),
            stiffness_dt: self.stiffness_dt(t)?,
            quadrature_order: QUADRATURE_ORDER,
            family_kind: family_name(&self.family),
            derivative: self.method,
        })
    }

    /// Reference mesh vertices mapped into `Ω_t`.
    pub fn image_vertices(&self, t: f64) -> Vec<Point> {
        self.mesh.vertices().iter().map(|&x| self.family.map(t, x)).collect()
    }
}
