//! Two-step inference: semiparametric margins mapped to the standard
//! Pareto scale, then maximum likelihood for the dependence parameters
//! from ℓ-exceedances with ℓ(f) = max_j f_j/u_j.
//!
//! Estimators work in `f64`.

mod exceed;
mod fit;
mod likelihood;
mod margins;
pub mod optim;

pub use exceed::{extract_exceedances, ExceedanceSample};
pub use fit::{default_init, fit_model, from_transformed, to_transformed, FitConfig, FitResult, ALPHA_BOX, KAPPA_BOX, LOG_LAMBDA_BOX};
pub(crate) use likelihood::block_nll;
pub use likelihood::{nll_censored, nll_pairwise, nll_uncensored, Likelihood, LikelihoodKind};
pub use margins::{fit_gpd_site, fit_margins, standardize_margins, GpdFit, MarginalFit, MIN_EXCEEDANCES};
