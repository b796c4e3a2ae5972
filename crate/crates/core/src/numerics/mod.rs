//! Numerical kernel: special functions, Cholesky factorization, univariate
//! and multivariate Student-t distribution functions, the signed power
//! transform and reproducible random streams.

pub mod linalg;
pub mod mvt;
pub mod rng;
pub mod special;
pub mod student;
pub mod transform;

pub use linalg::{cholesky_pd, symmetric_eigen, Matrix, PdMatrix};
pub use mvt::{mvt_cdf, MvtEstimate, MvtIntegrator, MvtProblem, QmcConfig};
pub use rng::{derive_seed, rng_stream, RngStream};
pub use special::{gamma_p, gamma_p_inv, gamma_q, ln_gamma, norm_cdf, norm_pdf, norm_ppf};
pub use student::{t_cdf, t_log_pdf, t_pdf};
pub use transform::{signed_power, signed_power_vec};
