//! Pairwise extremal coefficient from data: censored bivariate fit of
//! (ρ, α) with a percentile bootstrap.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::extremal_coeff_rho;
use crate::inference::optim::{nelder_mead, NelderMeadOptions};
use crate::inference::{block_nll, extract_exceedances, ExceedanceSample, ALPHA_BOX};
use crate::numerics::{rng_stream, Matrix, MvtIntegrator, QmcConfig};

/// Minimum number of complete joint observations.
pub const MIN_JOINT: usize = 100;
/// Minimum number of joint exceedances for the bivariate fit.
pub const MIN_PAIR_EXCEEDANCES: usize = 10;
/// |atanh ρ| is capped here, i.e. |ρ| ≤ 1 − 3·10⁻⁸.
const ATANH_CAP: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtCoefOptions {
    pub bootstrap: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for ExtCoefOptions {
    fn default() -> Self {
        Self { bootstrap: 200, level: 0.95, seed: 0xE7C0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtCoefEstimate {
    pub theta: f64,
    pub ci: [f64; 2],
    pub rho: f64,
    pub alpha: f64,
    pub n_exceed: usize,
    pub n_total: usize,
    /// Bootstrap resamples whose fit failed; they are left out of the interval.
    pub bootstrap_failures: usize,
}

/// Censored bivariate maximum likelihood fit, returning (ρ̂, α̂).
fn fit_pair(sample: &ExceedanceSample, integ: &MvtIntegrator<f64>) -> Result<(f64, f64)> {
    let objective = |t: &[f64]| {
        if t[0].abs() > ATANH_CAP || !(ALPHA_BOX.0.ln()..=ALPHA_BOX.1.ln()).contains(&t[1]) {
            return f64::INFINITY;
        }
        let rho = t[0].tanh();
        let sigma = Matrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).expect("2x2");
        block_nll(sample, &sigma, t[1].exp(), integ, true).unwrap_or(f64::INFINITY)
    };
    let opts = NelderMeadOptions { max_evals: 1000, f_tol: 1e-9, x_tol: 1e-4, initial_step: 0.4 };
    let m = nelder_mead(objective, &[0.5f64.atanh(), 2f64.ln()], &opts);
    if !m.converged || !m.value.is_finite() {
        return Err(Error::NonConvergence { evals: m.evals });
    }
    Ok((m.x[0].tanh(), m.x[1].exp()))
}

fn pair_sample(x: &[f64], y: &[f64], rows: &[usize], threshold: f64) -> Result<ExceedanceSample> {
    let m = Matrix::from_fn(rows.len(), 2, |i, j| if j == 0 { x[rows[i]] } else { y[rows[i]] });
    let s = extract_exceedances(&m, &[threshold, threshold]).map_err(|e| match e {
        Error::EmptySample => Error::TooFewExceedances { found: 0, needed: MIN_PAIR_EXCEEDANCES },
        e => e,
    })?;
    if s.len() < MIN_PAIR_EXCEEDANCES {
        return Err(Error::TooFewExceedances { found: s.len(), needed: MIN_PAIR_EXCEEDANCES });
    }
    Ok(s)
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Extremal coefficient θ̂ = V(1, 1) of the extremal-t model fitted by
/// censored likelihood to two standard-scale columns, thresholded at
/// `threshold` in both, with a percentile bootstrap interval over rows.
/// Rows with a missing value are dropped.
pub fn empirical_extremal_coeff(x: &[f64], y: &[f64], threshold: f64, opts: &ExtCoefOptions) -> Result<ExtCoefEstimate> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("columns have {} and {} rows", x.len(), y.len())));
    }
    let rows: Vec<usize> = (0..x.len()).filter(|&i| !x[i].is_nan() && !y[i].is_nan()).collect();
    if rows.len() < MIN_JOINT {
        return Err(Error::TooFewExceedances { found: rows.len(), needed: MIN_JOINT });
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence level {}", opts.level)));
    }
    let integ = MvtIntegrator::new(QmcConfig::for_fitting(opts.seed))?;
    let sample = pair_sample(x, y, &rows, threshold)?;
    let (rho, alpha) = fit_pair(&sample, &integ)?;
    let theta = extremal_coeff_rho(rho, alpha);

    let boot: Vec<Option<f64>> = (0..opts.bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_stream(opts.seed, b as u64);
            let idx: Vec<usize> = (0..rows.len()).map(|_| rows[rng.random_range(0..rows.len())]).collect();
            let s = pair_sample(x, y, &idx, threshold).ok()?;
            fit_pair(&s, &integ).ok().map(|(r, a)| extremal_coeff_rho(r, a))
        })
        .collect();
    let mut thetas: Vec<f64> = boot.iter().flatten().copied().collect();
    let failures = boot.len() - thetas.len();
    thetas.sort_by(f64::total_cmp);
    let ci = if thetas.is_empty() {
        [theta, theta]
    } else {
        let tail = 0.5 * (1.0 - opts.level);
        [quantile(&thetas, tail), quantile(&thetas, 1.0 - tail)]
    };
    Ok(ExtCoefEstimate { theta, ci, rho, alpha, n_exceed: sample.len(), n_total: sample.n_total(), bootstrap_failures: failures })
}
