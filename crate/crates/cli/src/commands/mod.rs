pub mod conditional;
pub mod extcoef;
pub mod fit;
pub mod simulate;
pub mod study;

use std::path::{Path, PathBuf};

use elliptical_pareto::inference::MarginalFit;
use elliptical_pareto::ParamVector;

use crate::error::{Classify, CliError, CliResult};
use crate::input::{parse_list, Observations, Sites};
use fit::FitOutput;

/// Dependence parameters from `--params` or from a fit.json.
pub fn model_params(params: Option<&str>, fit_file: Option<&Path>) -> CliResult<ParamVector> {
    match (params, fit_file) {
        (Some(p), None) => {
            let v = parse_list(p, "--params")?;
            if v.len() != 3 {
                return Err(CliError::config("--params takes log_lambda,kappa,alpha"));
            }
            ParamVector::new(v[0], v[1], v[2]).config_err("--params")
        }
        (None, Some(path)) => Ok(FitOutput::load(path)?.psi_hat),
        (Some(_), Some(_)) => Err(CliError::config("give either --params or --fit, not both")),
        (None, None) => Err(CliError::config("model parameters needed: --params log_lambda,kappa,alpha or --fit fit.json")),
    }
}

/// Per-site semiparametric margins, with the failing site named.
pub fn site_margins(obs: &Observations, sites: &Sites, q: f64) -> CliResult<Vec<MarginalFit>> {
    (0..sites.len())
        .map(|j| MarginalFit::fit(&obs.column(j), q).model_err(format!("marginal fit at site '{}'", sites.sites[j].id)))
        .collect()
}

pub fn output_dir(flag: &Option<PathBuf>, globals: &crate::Globals) -> PathBuf {
    flag.clone().or_else(|| globals.config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."))
}
