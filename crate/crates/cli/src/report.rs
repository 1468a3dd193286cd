use maslov_core::flow::{Audit, Crossing, FlowReport};
use maslov_core::mesh::Mesh;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ToleranceConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureJson {
    pub p: usize,
    pub q: usize,
    pub z: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingJson {
    pub t_star: f64,
    pub kernel_dim: usize,
    pub signature: SignatureJson,
    pub q_volume: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_boundary: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_formula_defect: Option<f64>,
    pub position: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateJson {
    pub t_star: f64,
    pub zero_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub dim: usize,
    pub vertices: usize,
    pub cells: usize,
    pub boundary_facets: usize,
    pub max_edge_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: ExperimentConfig,
    pub mesh: MeshStats,
    pub tolerances: ToleranceConfig,
    /// Grid size after automatic refinement.
    pub t_samples_used: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpJson {
    pub t_star: f64,
    pub morse_before: usize,
    pub morse_after: usize,
    pub expected: i64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditJson {
    pub residual: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cross_formula_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet_monotone: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smale: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neumann_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neumann_monotone: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neumann_plus_one: Option<bool>,
    pub morse_jumps: Vec<JumpJson>,
    pub morse_nondecreasing: bool,
    pub passed: bool,
}

impl From<&Audit> for AuditJson {
    fn from(a: &Audit) -> Self {
        Self {
            residual: a.residual,
            max_cross_formula_defect: a.max_cross_formula_defect(),
            dirichlet_monotone: a.dirichlet_monotone,
            smale: a.smale,
            neumann_margin: a.neumann_margin,
            neumann_monotone: a.neumann_monotone,
            neumann_plus_one: a.neumann_plus_one,
            morse_jumps: a
                .jumps
                .iter()
                .map(|j| JumpJson {
                    t_star: j.t_star,
                    morse_before: j.before,
                    morse_after: j.after,
                    expected: j.expected,
                    holds: j.holds(),
                })
                .collect(),
            morse_nondecreasing: a.morse_nondecreasing,
            passed: a.passed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    /// Seconds since the Unix epoch; the only field that differs between identical runs.
    pub timestamp: u64,
    pub lambda: f64,
    pub t_range: [f64; 2],
    pub morse_a: usize,
    pub morse_b: usize,
    pub maslov: i64,
    pub residual: i64,
    pub verified: bool,
    pub crossings: Vec<CrossingJson>,
    pub degenerate: Vec<DegenerateJson>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditJson>,
    pub provenance: Provenance,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn crossing_json(c: &Crossing) -> CrossingJson {
    CrossingJson {
        t_star: c.t_star,
        kernel_dim: c.kernel_dim,
        signature: SignatureJson { p: c.signature.p, q: c.signature.q, z: c.signature.z },
        q_volume: rows(&c.q_volume),
        q_boundary: c.q_boundary.as_ref().map(rows),
        cross_formula_defect: c.cross_formula_defect(),
        position: c.position.name().to_string(),
    }
}

pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    MeshStats {
        dim: mesh.dim(),
        vertices: mesh.n_vertices(),
        cells: mesh.n_cells(),
        boundary_facets: mesh.facets().len(),
        max_edge_length: mesh.max_edge_length(),
    }
}

impl ReportJson {
    pub fn new(config: &ExperimentConfig, mesh: &Mesh, report: &FlowReport, audit: Option<&Audit>) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            timestamp,
            lambda: report.lambda,
            t_range: [report.t_range.0, report.t_range.1],
            morse_a: report.morse_a,
            morse_b: report.morse_b,
            maslov: report.maslov,
            residual: report.residual,
            verified: report.verified,
            crossings: report.crossings.iter().map(crossing_json).collect(),
            degenerate: report.degenerate.iter().map(|&(t_star, zero_count)| DegenerateJson { t_star, zero_count }).collect(),
            warnings: report.warnings.clone(),
            audit: audit.map(AuditJson::from),
            provenance: Provenance {
                config: config.clone(),
                mesh: mesh_stats(mesh),
                tolerances: config.tolerances.clone(),
                t_samples_used: report.n_samples,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

}
