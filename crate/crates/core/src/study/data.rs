//! Data generators for the Monte Carlo studies.

use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::exponent::{exponent_v_with, extremal_coeff_rho, CorrelationModel, EllipticalModel, ParamVector};
use crate::inference::{extract_exceedances, ExceedanceSample};
use crate::numerics::{rng_stream, t_cdf, Matrix, MvtIntegrator, QmcConfig};
use crate::simulate::{simulate_pareto_ar, simulate_t_process, RiskFunctional, SimOptions};

const BINOMIAL_STREAM: u64 = 0xB1_0000;

/// Range λ at which the pairwise extremal coefficient at `distance` equals
/// `theta_target`, for the stable correlation function with shape κ.
///
/// θ is decreasing in ρ, so ρ is found by bisection and λ follows from
/// ρ = exp{−(h/λ)^κ}.
pub fn calibrate_lambda(kappa: f64, alpha: f64, theta_target: f64, distance: f64) -> Result<f64> {
    let hi = extremal_coeff_rho(0.0, alpha);
    if !(theta_target > 1.0 && theta_target < hi) {
        return Err(Error::Unattainable { target: theta_target, lo: 1.0, hi });
    }
    if !(kappa > 0.0 && kappa <= 2.0) || !(distance > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa}, alpha = {alpha}, distance = {distance}")));
    }
    let (mut lo_rho, mut hi_rho) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo_rho + hi_rho);
        if extremal_coeff_rho(mid, alpha) > theta_target {
            lo_rho = mid;
        } else {
            hi_rho = mid;
        }
        if hi_rho - lo_rho < 1e-15 {
            break;
        }
    }
    let rho = 0.5 * (lo_rho + hi_rho);
    let theta = extremal_coeff_rho(rho, alpha);
    if (theta - theta_target).abs() > 1e-8 {
        return Err(Error::Unattainable { target: theta_target, lo: 1.0, hi });
    }
    Ok(distance / (-rho.ln()).powf(1.0 / kappa))
}

/// True parameter vector of a study cell.
pub fn cell_params(kappa: f64, alpha: f64, theta: f64, distance: f64) -> Result<ParamVector<f64>> {
    ParamVector::new(calibrate_lambda(kappa, alpha, theta, distance)?.ln(), kappa, alpha)
}

/// Exceedance probability V(u) of the model, used for the binomial count.
pub fn exceedance_probability(model: &EllipticalModel<f64>, u: &[f64], qmc: &QmcConfig) -> Result<f64> {
    let integ = MvtIntegrator::new(*qmc)?;
    Ok(exponent_v_with(u, model, &integ)?.probability)
}

/// Well-specified data: of `n` observations, N_u ~ Bin(n, V(u)) exceed the
/// thresholds, and the exceedances are exact ℓ-Pareto draws for
/// ℓ(f) = max_j f_j/u_j.
pub fn pareto_exceedances(model: &EllipticalModel<f64>, u: &[f64], n: usize, v0: f64, seed: u64) -> Result<ExceedanceSample> {
    if !(v0 > 0.0 && v0 < 1.0) {
        return Err(Error::ThresholdTooLow(v0));
    }
    let mut rng = rng_stream(seed, BINOMIAL_STREAM);
    let binom = Binomial::new(n as u64, v0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let count = binom.sample(&mut rng) as usize;
    if count == 0 {
        return Ok(ExceedanceSample::empty(n, u.to_vec()));
    }
    let ell = RiskFunctional::weighted_max(u.to_vec())?;
    let batch = simulate_pareto_ar(model, &ell, count, seed, &SimOptions::default())?;
    ExceedanceSample::new(batch.draws, n, u.to_vec())
}

/// Misspecified data: `n` draws of the multivariate t vector with α
/// degrees of freedom, margins mapped to the standard Pareto scale by
/// 1/{1 − t_α(x)}, and the exceedances of `u` kept.
pub fn t_process_exceedances(model: &EllipticalModel<f64>, u: &[f64], n: usize, seed: u64) -> Result<ExceedanceSample> {
    let raw = simulate_t_process(model, n, seed)?;
    let x_star = t_to_pareto(&raw, model.alpha());
    match extract_exceedances(&x_star, u) {
        Err(Error::EmptySample) => Ok(ExceedanceSample::empty(n, u.to_vec())),
        other => other,
    }
}

/// Standard Pareto transform of t-distributed margins.
pub fn t_to_pareto(raw: &Matrix<f64>, alpha: f64) -> Matrix<f64> {
    // 1 − t(x) = t(−x) keeps precision in the upper tail
    Matrix::from_fn(raw.rows(), raw.cols(), |i, j| 1.0 / t_cdf(-raw[(i, j)], alpha))
}

/// Model of a study cell on the given sites.
pub fn cell_model(sites: &Matrix<f64>, psi: &ParamVector<f64>) -> Result<EllipticalModel<f64>> {
    EllipticalModel::new(sites.clone(), CorrelationModel::new(psi.lambda(), psi.kappa)?, psi.alpha)
}
