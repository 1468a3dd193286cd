use maslov_core::assembly::BcKind;
use maslov_core::coeff::ScalarField;
use maslov_core::flow::FlowReport;
use maslov_core::oracle::{
    disk_conjugate_times, disk_spectrum, interval_spectrum, prufer_conjugate_times, DiskBc, IntervalBc, PRUFER_STEPS,
};
use maslov_core::Error;

use crate::config::{DomainConfig, ExperimentConfig, FamilyName};
use crate::CliError;

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub fem: f64,
    pub oracle: f64,
    pub tolerance: f64,
}

impl Row {
    fn new(quantity: impl Into<String>, fem: f64, oracle: f64, tolerance: f64) -> Self {
        Self { quantity: quantity.into(), fem, oracle, tolerance }
    }

    pub fn abs_diff(&self) -> f64 {
        (self.fem - self.oracle).abs()
    }

    pub fn pass(&self) -> bool {
        self.abs_diff() <= self.tolerance
    }
}

/// The reference problem behind a configuration, if one is registered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// `−u″ − c` on `(0, t)`.
    Interval { c: f64, neumann: bool },
    /// `−Δ − μ` on the disk of radius `t·radius`.
    Disk { mu: f64, radius: f64, neumann: bool },
}

pub fn reference(config: &ExperimentConfig) -> Result<Reference, CliError> {
    let missing = || CliError::Config("no oracle registered for this configuration".into());
    if config.family.kind != FamilyName::Star {
        return Err(missing());
    }
    let v0 = match config.potential_field()? {
        ScalarField::Constant(v) => v,
        _ => return Err(missing()),
    };
    let neumann = match config.bc_kind()? {
        BcKind::Dirichlet => false,
        BcKind::Neumann => true,
        _ => return Err(missing()),
    };
    let shift = config.lambda_shift - v0;
    match &config.domain {
        DomainConfig::Interval => Ok(Reference::Interval { c: shift, neumann }),
        DomainConfig::Disk { radius, .. } => Ok(Reference::Disk { mu: shift, radius: *radius, neumann }),
        _ => Err(missing()),
    }
}

fn with_mode_cap<T>(f: impl Fn(u32) -> maslov_core::Result<T>) -> maslov_core::Result<T> {
    let mut cap = 16;
    loop {
        match f(cap) {
            Err(Error::IncreaseModeCap(_)) if cap < 1024 => cap *= 2,
            other => return other,
        }
    }
}

fn morse_at(reference: Reference, t: f64) -> maslov_core::Result<usize> {
    match reference {
        Reference::Interval { c, neumann } => {
            let bc = if neumann { IntervalBc::Neumann } else { IntervalBc::Dirichlet };
            let count = (t * c.max(0.0).sqrt() / std::f64::consts::PI) as usize + 3;
            Ok(interval_spectrum(c, t, &bc, count)?.count_below(0.0))
        }
        Reference::Disk { mu, radius, neumann } => {
            if mu <= 0.0 {
                return Ok(0);
            }
            let bc = if neumann { DiskBc::Neumann } else { DiskBc::Dirichlet };
            Ok(with_mode_cap(|cap| disk_spectrum(mu, bc, t * radius, cap))?.count_below(mu))
        }
    }
}

fn conjugate_times(reference: Reference, range: (f64, f64)) -> maslov_core::Result<Vec<(f64, usize)>> {
    match reference {
        Reference::Interval { c, neumann } => {
            let bc = if neumann { IntervalBc::Neumann } else { IntervalBc::Dirichlet };
            let times = prufer_conjugate_times(&ScalarField::Constant(-c), &bc, range, PRUFER_STEPS)?;
            Ok(times.into_iter().map(|t| (t, 1)).collect())
        }
        Reference::Disk { mu, radius, neumann } => {
            if mu <= 0.0 {
                return Ok(Vec::new());
            }
            let bc = if neumann { DiskBc::Neumann } else { DiskBc::Dirichlet };
            disk_conjugate_times(mu * radius * radius, bc, range)
        }
    }
}

/// Morse indices at both ends, the crossing count, and each crossing time and
/// multiplicity against the reference.
pub fn compare(reference: Reference, report: &FlowReport) -> Result<Vec<Row>, CliError> {
    let (a, b) = report.t_range;
    let time_tol = match reference {
        Reference::Interval { .. } => 1e-3,
        Reference::Disk { .. } => 1e-2,
    };
    let mut rows = vec![
        Row::new("morse_a", report.morse_a as f64, morse_at(reference, a)? as f64, 0.0),
        Row::new("morse_b", report.morse_b as f64, morse_at(reference, b)? as f64, 0.0),
    ];
    let times = conjugate_times(reference, (a, b))?;
    rows.push(Row::new("crossings", report.crossings.len() as f64, times.len() as f64, 0.0));
    for (i, (c, (t, m))) in report.crossings.iter().zip(&times).enumerate() {
        rows.push(Row::new(format!("t_star[{i}]"), c.t_star, *t, time_tol));
        rows.push(Row::new(format!("kernel_dim[{i}]"), c.kernel_dim as f64, *m as f64, 0.0));
    }
    Ok(rows)
}

pub fn format_table(rows: &[Row]) -> String {
    let mut out = format!("{:<14} {:>14} {:>14} {:>11} {:>10}  pass\n", "quantity", "fem", "oracle", "abs_diff", "tolerance");
    for r in rows {
        out.push_str(&format!(
            "{:<14} {:>14.8} {:>14.8} {:>11.3e} {:>10.1e}  {}\n",
            r.quantity,
            r.fem,
            r.oracle,
            r.abs_diff(),
            r.tolerance,
            if r.pass() { "yes" } else { "no" }
        ));
    }
    out
}
