//! Monte Carlo studies of estimator efficiency and robustness, and the
//! empirical pairwise extremal coefficient.
//!
//! Repetitions run in parallel; repetition `r` of cell `c` draws its data
//! from the seed derived from `(cfg.seed, c, r)`, so reports do not depend
//! on the thread count.

mod config;
mod data;
mod extcoef;
mod report;
mod run;

pub use config::{site_grid, table1_cells, table2_cells, CellSpec, Preset, SampleUnit, StudyConfig};
pub use data::{calibrate_lambda, cell_model, cell_params, exceedance_probability, pareto_exceedances, t_process_exceedances, t_to_pareto};
pub use extcoef::{empirical_extremal_coeff, ExtCoefEstimate, ExtCoefOptions, MIN_JOINT, MIN_PAIR_EXCEEDANCES};
pub use report::{CellReport, EstimatorSummary, Moments, StudyKind, StudyReport, MAX_FAILURE_SHARE};
pub use run::{run_misspec_study, run_recovery_study};
