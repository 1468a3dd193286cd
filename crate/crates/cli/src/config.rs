use std::path::{Path, PathBuf};

use maslov_core::assembly::{BcKind, BoundaryMeasure};
use maslov_core::coeff::{parse_field, ScalarField};
use maslov_core::flow::{Problem, Tolerances, MIN_SAMPLES};
use maslov_core::mesh::{
    build_annulus_mesh, build_disk_mesh_centered, build_interval_mesh, build_polygon_mesh, DiffeoFamily, FamilyKind, Mesh,
    Point,
};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    /// The unit interval `(0, 1)`.
    Interval,
    Disk {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Annulus { inner: f64, outer: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Star,
    Radial,
    Affine,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyName,
    #[serde(default)]
    pub center: [f64; 2],
    pub t_range: [f64; 2],
    pub t_samples: usize,
    /// Radial families: fixed inner radius and the reference outer radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_outer: Option<f64>,
    /// Affine families: `φ_t(x) = (a0 + t a1) x + (b0 + t b1)`, matrices row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    /// Boundary measure of the mean-zero condition: `reference` or `induced`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

/// Kernel and bisection tolerances are relative (to `‖D_t‖_max` and `b − a`);
/// the cluster tolerance is a multiple of the kernel tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_kernel")]
    pub kernel_tol: f64,
    #[serde(default = "default_bisect")]
    pub bisect_tol: f64,
    #[serde(default = "default_cluster")]
    pub cluster_tol: f64,
    #[serde(default = "default_refine")]
    pub grid_refine_max: usize,
}

fn default_kernel() -> f64 {
    Tolerances::default().kernel_rel
}
fn default_bisect() -> f64 {
    Tolerances::default().bisect_rel
}
fn default_cluster() -> f64 {
    Tolerances::default().cluster_factor
}
fn default_refine() -> usize {
    Tolerances::default().grid_refine_max
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            kernel_tol: default_kernel(),
            bisect_tol: default_bisect(),
            cluster_tol: default_cluster(),
            grid_refine_max: default_refine(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    pub family: FamilyConfig,
    /// Potential `V(x, y)` as an expression.
    pub potential: String,
    pub bc: BcConfig,
    #[serde(default)]
    pub lambda_shift: f64,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Accept degenerate crossings using the signature of their nondegenerate part.
    #[serde(default)]
    pub allow_degenerate: bool,
}

fn invalid(field: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {detail}"))
}

fn point(p: [f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

fn matrix(m: [[f64; 2]; 2]) -> Matrix2<f64> {
    Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn writable(path: &Path, field: &str) -> Result<(), CliError> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(invalid(field, format!("directory {} does not exist", parent.display())));
    }
    if path.is_dir() {
        return Err(invalid(field, format!("{} is a directory", path.display())));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let [a, b] = self.family.t_range;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(invalid("family.t_range", format!("need a < b, got [{a}, {b}]")));
        }
        if self.family.t_samples < MIN_SAMPLES {
            return Err(invalid(
                "family.t_samples",
                format!("must be at least {MIN_SAMPLES}, got {}", self.family.t_samples),
            ));
        }
        let t = &self.tolerances;
        for (name, v) in [("tolerances.kernel_tol", t.kernel_tol), ("tolerances.bisect_tol", t.bisect_tol), ("tolerances.cluster_tol", t.cluster_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !self.lambda_shift.is_finite() {
            return Err(invalid("lambda_shift", "must be finite"));
        }
        match (&self.domain, self.mesh.n, self.mesh.h) {
            (DomainConfig::Interval, Some(n), _) if n >= 1 => {}
            (DomainConfig::Interval, _, _) => return Err(invalid("mesh.n", "interval meshes need a positive element count")),
            (_, _, Some(h)) if h > 0.0 && h.is_finite() => {}
            _ => return Err(invalid("mesh.h", "two-dimensional meshes need a positive element size")),
        }
        if let Some(p) = &self.outputs.report {
            writable(p, "outputs.report")?;
        }
        if let Some(p) = &self.outputs.trajectories {
            writable(p, "outputs.trajectories")?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.domain {
            DomainConfig::Interval => 1,
            _ => 2,
        }
    }

    pub fn potential_field(&self) -> Result<ScalarField, CliError> {
        parse_field(&self.potential).map_err(|e| invalid("potential", e))
    }

    pub fn bc_kind(&self) -> Result<BcKind, CliError> {
        let beta = match &self.bc.beta {
            Some(src) => Some(parse_field(src).map_err(|e| invalid("bc.beta", e))?),
            None => None,
        };
        BcKind::parse(&self.bc.kind, beta).map_err(|e| invalid("bc.kind", e))
    }

    pub fn measure(&self) -> Result<BoundaryMeasure, CliError> {
        match self.bc.measure.as_deref() {
            None | Some("reference") => Ok(BoundaryMeasure::Reference),
            Some("induced") => Ok(BoundaryMeasure::Induced),
            Some(other) => Err(invalid("bc.measure", format!("expected 'reference' or 'induced', got '{other}'"))),
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh, CliError> {
        let h = self.mesh.h.unwrap_or(0.0);
        let mesh = match &self.domain {
            DomainConfig::Interval => build_interval_mesh(self.mesh.n.unwrap_or(0)),
            DomainConfig::Disk { radius, center } => build_disk_mesh_centered(point(*center), *radius, h),
            DomainConfig::Annulus { inner, outer } => build_annulus_mesh(*inner, *outer, h),
            DomainConfig::Polygon { vertices } => {
                build_polygon_mesh(&vertices.iter().copied().map(point).collect::<Vec<_>>(), h)
            }
        };
        mesh.map_err(CliError::from)
    }

    pub fn build_family(&self) -> Result<DiffeoFamily, CliError> {
        let f = &self.family;
        let range = (f.t_range[0], f.t_range[1]);
        let dim = self.dim();
        let kind = match f.kind {
            FamilyName::Star => FamilyKind::StarScale { center: point(f.center) },
            FamilyName::Identity => return DiffeoFamily::identity(dim, range).map_err(|e| invalid("family", e)),
            FamilyName::Radial => {
                let (inner, outer) = match (&self.domain, f.inner, f.reference_outer) {
                    (_, Some(i), Some(o)) => (i, o),
                    (DomainConfig::Annulus { inner, outer }, i, o) => (i.unwrap_or(*inner), o.unwrap_or(*outer)),
                    _ => return Err(invalid("family.inner", "radial families need inner and reference_outer radii")),
                };
                FamilyKind::RadialScale { center: point(f.center), inner, reference_outer: outer }
            }
            FamilyName::Affine => FamilyKind::Affine {
                a0: matrix(f.a0.unwrap_or([[1.0, 0.0], [0.0, 1.0]])),
                a1: matrix(f.a1.unwrap_or([[0.0, 0.0], [0.0, 0.0]])),
                b0: point(f.b0.unwrap_or_default()),
                b1: point(f.b1.unwrap_or_default()),
            },
        };
        DiffeoFamily::new(kind, dim, range).map_err(|e| invalid("family", e))
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            kernel_rel: self.tolerances.kernel_tol,
            cluster_factor: self.tolerances.cluster_tol,
            bisect_rel: self.tolerances.bisect_tol,
            grid_refine_max: self.tolerances.grid_refine_max,
        }
    }

    /// The configured problem with `lambda` in place of the configured shift.
    pub fn problem_with_lambda(&self, mesh: Mesh, lambda: f64) -> Result<Problem, CliError> {
        let potential = self.potential_field()?;
        let bc = self.bc_kind()?;
        let measure = self.measure()?;
        let family = self.build_family()?;
        let mut problem = Problem::schrodinger(mesh, potential, family, bc, lambda)?.with_measure(measure);
        problem.tolerances = self.tolerances();
        problem.allow_degenerate = self.allow_degenerate;
        Ok(problem)
    }

    pub fn problem(&self, mesh: Mesh) -> Result<Problem, CliError> {
        self.problem_with_lambda(mesh, self.lambda_shift)
    }
}
