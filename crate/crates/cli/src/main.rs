//! `maslov`: batch driver for deforming-domain index experiments.

mod config;
mod oracle_cmd;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maslov_core::flow::{run_flow, verify_identities, Audit, FlowReport, Problem};
use maslov_core::mesh::Mesh;
use thiserror::Error;

use config::ExperimentConfig;
use report::ReportJson;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] maslov_core::Error),
    #[error("cannot write {path}: {detail}")]
    Output { path: PathBuf, detail: String },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use maslov_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Output { .. } => 2,
            CliError::Core(
                E::InvalidArgument(_)
                | E::Parse { .. }
                | E::UnsupportedFamily(_)
                | E::UnsupportedBc(_)
                | E::UnsupportedGeometry(_),
            ) => 2,
            CliError::Core(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "maslov", version, about = "Morse and Maslov indices of elliptic operators on deforming domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow, write the report and trajectories.
    Flow { config: PathBuf },
    /// Morse index of the operator at one parameter value.
    Morse {
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Spectral shift; defaults to the configured one.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
    },
    /// Run the flow and print the crossing table.
    Crossings { config: PathBuf },
    /// Run the flow and audit the index identities.
    Verify { config: PathBuf },
    /// Compare against the closed-form or Bessel oracle.
    Oracle { config: PathBuf },
}

struct Run {
    config: ExperimentConfig,
    mesh: Mesh,
    problem: Problem,
    report: FlowReport,
}

fn run(path: &Path) -> Result<Run, CliError> {
    let config = ExperimentConfig::load(path)?;
    let mesh = config.build_mesh()?;
    let problem = config.problem(mesh.clone())?;
    let report = run_flow(&problem, config.family.t_samples)?;
    Ok(Run { config, mesh, problem, report })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Output { path: path.to_path_buf(), detail: e.to_string() })
}

fn emit(run: &Run, audit: Option<&Audit>) -> Result<ReportJson, CliError> {
    let json = ReportJson::new(&run.config, &run.mesh, &run.report, audit);
    let text = serde_json::to_string_pretty(&json).expect("report serializes");
    match &run.config.outputs.report {
        Some(p) => write(p, &(text + "\n"))?,
        None => println!("{text}"),
    }
    if let Some(p) = &run.config.outputs.trajectories {
        write(p, &run.report.trajectories_csv())?;
    }
    Ok(json)
}

fn summary(report: &FlowReport) {
    eprintln!(
        "morse_a={} morse_b={} maslov={} residual={} crossings={}",
        report.morse_a,
        report.morse_b,
        report.maslov,
        report.residual,
        report.crossings.len()
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

fn flow_status(report: &FlowReport, allow_degenerate: bool) -> u8 {
    let degenerate = !report.degenerate.is_empty() && !allow_degenerate;
    if report.residual != 0 || degenerate {
        1
    } else {
        0
    }
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Flow { config } => {
            let run = run(&config)?;
            emit(&run, None)?;
            summary(&run.report);
            Ok(flow_status(&run.report, run.config.allow_degenerate))
        }
        Command::Crossings { config } => {
            let run = run(&config)?;
            println!("{:>14} {:>4} {:>3} {:>3} {:>3} {:>9} {:>12}", "t_star", "dim", "p", "q", "z", "position", "defect");
            for c in &run.report.crossings {
                let defect = c.cross_formula_defect().map_or("-".to_string(), |d| format!("{d:.3e}"));
                println!(
                    "{:>14.9} {:>4} {:>3} {:>3} {:>3} {:>9} {:>12}",
                    c.t_star,
                    c.kernel_dim,
                    c.signature.p,
                    c.signature.q,
                    c.signature.z,
                    c.position.name(),
                    defect
                );
            }
            summary(&run.report);
            Ok(flow_status(&run.report, run.config.allow_degenerate))
        }
        Command::Verify { config } => {
            let run = run(&config)?;
            let audit = verify_identities(&run.problem, &run.report)?;
            emit(&run, Some(&audit))?;
            summary(&run.report);
            eprintln!("audit {}", if audit.passed() { "passed" } else { "failed" });
            Ok(flow_status(&run.report, run.config.allow_degenerate).max(u8::from(!audit.passed())))
        }
        Command::Morse { config, t, lambda } => {
            let config = ExperimentConfig::load(&config)?;
            let (a, b) = (config.family.t_range[0], config.family.t_range[1]);
            if !(a..=b).contains(&t) {
                return Err(CliError::Config(format!("--t {t} lies outside family.t_range [{a}, {b}]")));
            }
            let lambda = lambda.unwrap_or(config.lambda_shift);
            let problem = config.problem_with_lambda(config.build_mesh()?, lambda)?;
            let count = problem.morse_index(t)?;
            let out = serde_json::json!({ "t": t, "lambda": lambda, "morse_index": count.count, "borderline": count.borderline });
            println!("{out}");
            Ok(0)
        }
        Command::Oracle { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let reference = oracle_cmd::reference(&cfg)?;
            let run = run(&config)?;
            let rows = oracle_cmd::compare(reference, &run.report)?;
            print!("{}", oracle_cmd::format_table(&rows));
            Ok(u8::from(!rows.iter().all(oracle_cmd::Row::pass)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
