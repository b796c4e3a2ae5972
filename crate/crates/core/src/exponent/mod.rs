//! Extremal-t exponent measure: correlation matrices, the exponent function
//! V, the intensity λ_s, conditional intensities, partial derivatives V_I and
//! pairwise extremal coefficients.

mod measure;
mod model;

pub use measure::{
    cond_intensity, exponent_v, exponent_v_corr, exponent_v_with, extremal_coeff, extremal_coeff_at, extremal_coeff_rho,
    intensity_lambda, log_intensity, log_partial_v_with, partial_v, ConditionalT,
};
pub use model::{corr_matrix, CorrelationModel, EllipticalModel, ParamVector};
pub(crate) use model::{corr_entries, distance};
