//! Exact samplers: extremal-t max-stable vectors, ℓ-Pareto vectors by
//! Poisson points or acceptance-rejection, conditional draws through the
//! transformed t process, and multivariate t process data.
//!
//! Batch samplers run in parallel; draw (or round) `i` always uses the
//! random stream `(seed, i)`, so results do not depend on scheduling.

mod conditional;
mod risk;
mod spectral;

pub use conditional::{sample_conditional, simulate_conditional, simulate_t_process};
pub use risk::{RiskFunctional, RiskKind};
pub use spectral::{bound_b, simulate_extremal_t, simulate_pareto_ar, simulate_pareto_poisson, sphere_point, SimBatch, SimOptions};
