use std::time::Instant;

use rayon::prelude::*;

use super::config::{SampleUnit, StudyConfig};
use super::data::{cell_model, cell_params, exceedance_probability, pareto_exceedances, t_process_exceedances};
use super::report::{CellReport, EstimatorSummary, StudyKind, StudyReport};
use crate::error::Result;
use crate::exponent::{EllipticalModel, ParamVector};
use crate::inference::{fit_model, FitResult};
use crate::numerics::derive_seed;

/// Well-specified study: exceedances drawn exactly from the elliptical
/// ℓ-Pareto model, fitted by each configured estimator.
pub fn run_recovery_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    run_cells(cfg, StudyKind::Recovery, &cfg.threshold_quantiles[..1])
}

/// Misspecified study: multivariate t samples with the cell's α and
/// correlation, thresholded at each configured quantile.
pub fn run_misspec_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    run_cells(cfg, StudyKind::Misspecified, &cfg.threshold_quantiles)
}

#[derive(Debug, Clone, Copy)]
enum Source {
    /// ℓ-Pareto exceedances with exceedance probability V(u).
    Pareto(f64),
    TProcess,
}

/// Observations per repetition.
fn observations(cfg: &StudyConfig, v0: f64) -> usize {
    match cfg.sample_unit {
        SampleUnit::Observations => cfg.sample_size,
        SampleUnit::Exceedances => ((cfg.sample_size as f64 / v0).round() as usize).max(cfg.sample_size),
    }
}

fn run_cells(cfg: &StudyConfig, kind: StudyKind, quantiles: &[f64]) -> Result<StudyReport> {
    let start = Instant::now();
    let sites = cfg.sites();
    let mut cells = Vec::new();
    for (ci, spec) in cfg.cells.iter().enumerate() {
        let psi0 = cell_params(spec.kappa, spec.alpha, spec.theta, cfg.theta_distance)?;
        let model = cell_model(&sites, &psi0)?;
        for &q in quantiles {
            let cell_start = Instant::now();
            let u = vec![1.0 / (1.0 - q); sites.rows()];
            let v0 = exceedance_probability(&model, &u, &cfg.v0_qmc)?;
            let source = match kind {
                StudyKind::Recovery => Source::Pareto(v0),
                StudyKind::Misspecified => Source::TProcess,
            };
            let n = observations(cfg, v0);
            let fits = run_reps(cfg, ci as u64, &model, &u, n, source, &psi0);
            let estimators =
                cfg.estimators.iter().zip(&fits).map(|(kind, f)| EstimatorSummary::from_fits(*kind, f, &psi0)).collect();
            let report = CellReport { spec: *spec, threshold_quantile: q, psi0, estimators, runtime_secs: cell_start.elapsed().as_secs_f64() };
            log::info!(
                "cell kappa={} alpha={} theta={} q={q}: {:.1}s{}",
                spec.kappa,
                spec.alpha,
                spec.theta,
                report.runtime_secs,
                if report.invalid() { " (invalid)" } else { "" }
            );
            cells.push(report);
        }
    }
    Ok(StudyReport { kind, config: cfg.clone(), cells, runtime_secs: start.elapsed().as_secs_f64() })
}

/// Fits of every estimator on every repetition, indexed [estimator][rep].
fn run_reps(
    cfg: &StudyConfig,
    cell: u64,
    model: &EllipticalModel<f64>,
    u: &[f64],
    n: usize,
    source: Source,
    psi0: &ParamVector<f64>,
) -> Vec<Vec<Option<FitResult>>> {
    let per_rep: Vec<Vec<Option<FitResult>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(&[cfg.seed, cell, rep as u64]);
            let generated = match source {
                Source::Pareto(v0) => pareto_exceedances(model, u, n, v0, seed),
                Source::TProcess => t_process_exceedances(model, u, n, seed),
            };
            let sample = match generated {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("cell {cell} rep {rep}: data generation failed: {e}");
                    return vec![None; cfg.estimators.len()];
                }
            };
            cfg.estimators
                .iter()
                .map(|&kind| {
                    if sample.is_empty() {
                        log::warn!("cell {cell} rep {rep}: no exceedances");
                        return None;
                    }
                    match fit_model(&sample, model.sites(), kind, psi0, &cfg.fit) {
                        Ok(f) => Some(f),
                        Err(e) => {
                            log::warn!("cell {cell} rep {rep} {kind}: {e}");
                            None
                        }
                    }
                })
                .collect()
        })
        .collect();
    (0..cfg.estimators.len()).map(|k| per_rep.iter().map(|r| r[k].clone()).collect()).collect()
}
