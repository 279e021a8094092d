//! CSV and JSON emission. Nothing time- or host-dependent goes into a
//! report, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use heisenberg_core::constants::{sharp_constant, SharpConstantReport};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::suite::SuiteReport;
use crate::sweep::RatioSweep;
use crate::volume::VolumeReport;
use crate::{Result, VerifyError};

pub const CSV_HEADER: &str = "experiment,epsilon,ratio,ratio_error,constant,ratio_over_constant";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub quad_rel_tol: f64,
    pub mc_samples: usize,
    pub n: usize,
    pub p: f64,
    pub p_bar_in: f64,
    pub p_bar_out: f64,
    pub omega_convention: String,
    pub omega: f64,
    pub printed_omega: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub metadata: Metadata,
    pub sweeps: Vec<RatioSweep>,
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn metadata(cfg: &ExperimentConfig, constants: &[SharpConstantReport]) -> Result<Metadata> {
    let space = cfg.space()?;
    let mut notes = vec![
        "kernel homogeneity degree is -Q, the value under which the extremizer family is sharp".to_string(),
        "extrapolated_limit is the value at eps = 0 of the polynomial through the last three valid rows".to_string(),
    ];
    if cfg.omega_fault != 1.0 {
        notes.push(format!(
            "sphere mass deliberately scaled by {}",
            cfg.omega_fault
        ));
    }
    for c in constants {
        for note in c
            .notes
            .iter()
            .filter(|n| !n.starts_with("kernel homogeneity"))
        {
            let note = format!("{}: {note}", c.constant);
            if !notes.contains(&note) {
                notes.push(note);
            }
        }
    }
    Ok(Metadata {
        seed: cfg.seed,
        quad_rel_tol: cfg.tol,
        mc_samples: cfg.samples,
        n: cfg.n,
        p: cfg.p,
        p_bar_in: cfg.p_bar_in(),
        p_bar_out: cfg.p_bar_out(),
        omega_convention: "omega_Q = Q * Lebesgue volume of the unit Koranyi ball".into(),
        omega: space.sphere_mass(),
        printed_omega: space.printed_sphere_mass(),
        notes,
    })
}

pub fn sweep_report(cfg: &ExperimentConfig, sweeps: Vec<RatioSweep>) -> Result<SweepReport> {
    let constants = cfg
        .operators
        .iter()
        .map(|&op| Ok(sharp_constant(&cfg.constant_request(op)?, &cfg.quad())?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        metadata: metadata(cfg, &constants)?,
        sweeps,
    })
}

pub fn sweeps_csv(sweeps: &[RatioSweep]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for s in sweeps {
        for r in &s.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.experiment,
                num(r.epsilon),
                opt(r.ratio),
                opt(r.ratio_error),
                num(r.constant),
                opt(r.ratio_over_constant)
            );
        }
    }
    out
}

pub fn constants_csv(reports: &[SharpConstantReport]) -> String {
    let mut out = "constant,closed_form_value,quadrature_value,relative_gap,operator_norm,omega,printed_omega_value\n".to_string();
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.constant,
            num(r.closed_form_value),
            opt(r.quadrature_value),
            opt(r.relative_gap),
            num(r.operator_norm),
            num(r.omega),
            num(r.printed_omega_value)
        );
    }
    out
}

pub fn volume_csv(reports: &[VolumeReport]) -> String {
    let mut out = "n,closed_form,quadrature,monte_carlo,monte_carlo_error,quadrature_rel_gap,monte_carlo_z,printed_ratio\n".to_string();
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            num(r.closed_form),
            num(r.quadrature),
            num(r.monte_carlo),
            num(r.monte_carlo_error),
            num(r.quadrature_rel_gap),
            num(r.monte_carlo_z),
            num(r.printed_ratio)
        );
    }
    out
}

pub fn suite_csv(report: &SuiteReport) -> String {
    let mut out = "suite,checks,violations,worst_score,passed\n".to_string();
    for r in &report.results {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.name,
            r.checks,
            r.violations,
            num(r.worst_score),
            r.passed
        );
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes `contents` to `dir/file_name`, creating `dir`; without a
/// directory the contents go to stdout.
pub fn emit(dir: Option<&Path>, file_name: &str, contents: &str) -> Result<Option<PathBuf>> {
    let Some(dir) = dir else {
        print!("{contents}");
        return Ok(None);
    };
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| VerifyError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(file_name);
    std::fs::write(&path, contents).map_err(io(&path))?;
    Ok(Some(path))
}
