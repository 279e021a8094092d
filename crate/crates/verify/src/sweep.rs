//! Extremizer ratio sweeps: `||T f_eps|| / ||f_eps||` against the sharp
//! constant as `eps` shrinks.

use heisenberg_core::constants::{sharp_constant, OperatorKind, SharpConstantReport};
use heisenberg_core::mixed::{extremizer_family, MixedNormParams};
use heisenberg_core::numerics::IntegralResult;
use heisenberg_core::operators::{operator_ratio, Kernel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::{with_jobs, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    /// `None` when the ratio could not be computed at this epsilon.
    pub ratio: Option<f64>,
    pub ratio_error: Option<f64>,
    pub constant: f64,
    pub ratio_over_constant: Option<f64>,
    pub valid: bool,
    /// `ratio <= constant + 3 ratio_error`.
    pub within_bound: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSweep {
    pub experiment: String,
    /// Operator norm the ratios are compared with.
    pub constant: f64,
    /// Rows in grid order (descending epsilon).
    pub rows: Vec<SweepRow>,
    /// Value at `eps = 0` of the polynomial through the last three valid
    /// rows (two rows: the line through them).
    pub extrapolated_limit: Option<f64>,
    /// Valid ratios never decrease as epsilon decreases.
    pub monotone_flag: bool,
}

impl RatioSweep {
    pub fn bound_holds(&self) -> bool {
        self.rows.iter().all(|r| !r.valid || r.within_bound)
    }

    pub fn diverged_rows(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.note.as_deref().is_some_and(|n| n.contains("diverges")))
            .count()
    }
}

/// Polynomial through `(eps_i, r_i)` evaluated at zero.
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let pts = &points[points.len().saturating_sub(3)..];
    let mut sum = 0.0;
    for (i, &(ei, ri)) in pts.iter().enumerate() {
        let mut w = 1.0;
        for (j, &(ej, _)) in pts.iter().enumerate() {
            if i != j {
                w *= ej / (ej - ei);
            }
        }
        sum += w * ri;
    }
    Some(sum)
}

fn row_ratio(cfg: &ExperimentConfig, op: OperatorKind, eps: f64) -> Result<IntegralResult> {
    let space = cfg.space()?;
    let norm_cfg = cfg.norm_config();
    let out = MixedNormParams::new(cfg.p, cfg.p_bar_out())?;
    let (kernel, exponents) = match op {
        OperatorKind::Hilbert => (Kernel::Hilbert, vec![cfg.p]),
        OperatorKind::Hlp => (Kernel::Hlp, vec![cfg.p]),
        OperatorKind::Mlinear => (
            Kernel::multilinear(cfg.m)?,
            cfg.constant_request(op)?.slot_exponents(),
        ),
    };
    let inputs = exponents
        .iter()
        .map(|&p| extremizer_family(&space, p, eps, cfg.side))
        .collect::<heisenberg_core::Result<Vec<_>>>()?;
    let params_in = exponents
        .iter()
        .map(|&p| MixedNormParams::new(p, cfg.p_bar_in()))
        .collect::<heisenberg_core::Result<Vec<_>>>()?;
    Ok(operator_ratio(
        &kernel, &inputs, &params_in, out, &space, &norm_cfg,
    )?)
}

fn assemble(
    experiment: String,
    report: &SharpConstantReport,
    grid: &[f64],
    results: Vec<Result<IntegralResult>>,
) -> RatioSweep {
    let constant = report.operator_norm;
    let rows: Vec<SweepRow> = grid
        .iter()
        .zip(results)
        .map(|(&epsilon, res)| match res {
            Ok(r) => SweepRow {
                epsilon,
                ratio: Some(r.value),
                ratio_error: Some(r.error_estimate),
                constant,
                ratio_over_constant: Some(r.value / constant),
                valid: true,
                within_bound: r.value <= constant + 3.0 * r.error_estimate,
                note: None,
            },
            Err(e) => SweepRow {
                epsilon,
                ratio: None,
                ratio_error: None,
                constant,
                ratio_over_constant: None,
                valid: false,
                within_bound: false,
                note: Some(e.to_string()),
            },
        })
        .collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.ratio.map(|v| (r.epsilon, v)))
        .collect();
    RatioSweep {
        experiment,
        constant,
        extrapolated_limit: extrapolate_to_zero(&points),
        monotone_flag: points.windows(2).all(|w| w[1].1 >= w[0].1),
        rows,
    }
}

/// One sweep per configured operator, in configuration order. Rows are
/// computed on `cfg.jobs` threads; a failure at one epsilon marks that row
/// invalid and the sweep carries on.
pub fn run_ratio_sweep(cfg: &ExperimentConfig) -> Result<Vec<RatioSweep>> {
    cfg.validate()?;
    let reports = cfg
        .operators
        .iter()
        .map(|&op| Ok(sharp_constant(&cfg.constant_request(op)?, &cfg.quad())?))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, f64)> = (0..cfg.operators.len())
        .flat_map(|i| cfg.eps_grid.iter().map(move |&e| (i, e)))
        .collect();
    let mut results = with_jobs(cfg.jobs, || {
        tasks
            .par_iter()
            .map(|&(i, eps)| row_ratio(cfg, cfg.operators[i], eps))
            .collect::<Vec<_>>()
    })?
    .into_iter();
    Ok(cfg
        .operators
        .iter()
        .zip(&reports)
        .map(|(&op, report)| {
            let chunk: Vec<_> = results.by_ref().take(cfg.eps_grid.len()).collect();
            assemble(cfg.experiment_name(op), report, &cfg.eps_grid, chunk)
        })
        .collect())
}
