//! Semiparametric margins: empirical distribution below a high threshold,
//! generalized Pareto tail above it, and the map to the standard Pareto
//! scale x* = 1/(1 − F(x)).

use serde::{Deserialize, Serialize};

use super::optim::{fd_hessian, nelder_mead, symmetric_inverse, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Minimum number of threshold excesses for a tail fit.
pub const MIN_EXCEEDANCES: usize = 30;

const SHAPE_LO: f64 = -0.5;
const SHAPE_HI: f64 = 1.0;
/// Distance to either shape bound below which a fit is flagged.
const SHAPE_EDGE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub scale: f64,
    pub shape: f64,
    /// Standard errors from the observed information; absent when the
    /// Hessian is not positive definite (typically at a shape bound).
    pub se_scale: Option<f64>,
    pub se_shape: Option<f64>,
    pub n_exceed: usize,
    pub nll: f64,
    /// The shape estimate lies within 0.05 of the admissible range (−0.5, 1).
    pub near_boundary: bool,
}

impl GpdFit {
    /// Survival function of the excess distribution.
    pub fn sf(&self, y: f64) -> f64 {
        let y = y.max(0.0);
        if self.shape.abs() < 1e-12 {
            (-y / self.scale).exp()
        } else {
            let t = 1.0 + self.shape * y / self.scale;
            if t <= 0.0 {
                0.0
            } else {
                (-t.ln() / self.shape).exp()
            }
        }
    }

    /// Inverse of [`sf`](Self::sf).
    pub fn isf(&self, p: f64) -> f64 {
        if self.shape.abs() < 1e-12 {
            -self.scale * p.ln()
        } else {
            self.scale * (p.powf(-self.shape) - 1.0) / self.shape
        }
    }
}

fn gpd_nll(excess: &[f64], scale: f64, shape: f64) -> f64 {
    if !(scale > 0.0) || !(SHAPE_LO..SHAPE_HI).contains(&shape) {
        return f64::INFINITY;
    }
    let n = excess.len() as f64;
    if shape.abs() < 1e-9 {
        return n * scale.ln() + excess.iter().sum::<f64>() / scale;
    }
    let mut acc = 0.0;
    for &y in excess {
        let t = shape * y / scale;
        if t <= -1.0 {
            return f64::INFINITY;
        }
        acc += t.ln_1p();
    }
    n * scale.ln() + (1.0 + 1.0 / shape) * acc
}

/// Maximum likelihood generalized Pareto fit to the excesses of `data`
/// over `threshold`. Non-finite values are ignored.
pub fn fit_gpd_site(data: &[f64], threshold: f64) -> Result<GpdFit> {
    let excess: Vec<f64> = data.iter().filter(|x| x.is_finite() && **x > threshold).map(|x| x - threshold).collect();
    if excess.len() < MIN_EXCEEDANCES {
        return Err(Error::TooFewExceedances { found: excess.len(), needed: MIN_EXCEEDANCES });
    }
    let n = excess.len() as f64;
    let mean = excess.iter().sum::<f64>() / n;
    let var = excess.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(Error::Degenerate("threshold excesses have no spread".into()));
    }
    // method-of-moments start, pulled inside the admissible shape range
    let ratio = mean * mean / var;
    let shape0 = (0.5 * (1.0 - ratio)).clamp(SHAPE_LO + 0.1, SHAPE_HI - 0.1);
    let scale0 = mean * (1.0 - shape0);

    let objective = |x: &[f64]| gpd_nll(&excess, x[0].exp(), x[1]);
    let opts = NelderMeadOptions { max_evals: 4000, f_tol: 1e-12, x_tol: 1e-7, initial_step: 0.1 };
    let m = nelder_mead(objective, &[scale0.ln(), shape0], &opts);
    let (scale, shape) = (m.x[0].exp(), m.x[1]);
    if !m.converged {
        return Err(Error::NonConvergence { evals: m.evals });
    }
    let near_boundary = shape - SHAPE_LO < SHAPE_EDGE || SHAPE_HI - shape < SHAPE_EDGE;
    if near_boundary {
        log::warn!("GPD shape estimate {shape:.4} is at the edge of ({SHAPE_LO}, {SHAPE_HI})");
    }

    let hess = fd_hessian(|x| gpd_nll(&excess, x[0], x[1]), &[scale, shape], &[1e-4 * scale, 1e-4]);
    let (cov, pd) = symmetric_inverse(&hess, 1e-12);
    let (se_scale, se_shape) = if pd && hess[(0, 0)].is_finite() && hess[(1, 1)].is_finite() {
        (Some(cov[(0, 0)].sqrt()), Some(cov[(1, 1)].sqrt()))
    } else {
        (None, None)
    };
    Ok(GpdFit { scale, shape, se_scale, se_shape, n_exceed: excess.len(), nll: m.value, near_boundary })
}

/// Fitted marginal distribution of one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalFit {
    pub threshold: f64,
    /// Probability level of the threshold.
    pub quantile: f64,
    pub gpd: GpdFit,
    /// Sorted observations at or below the threshold.
    pub below: Vec<f64>,
    /// Number of finite observations used.
    pub n: usize,
}

impl MarginalFit {
    /// Fits one site at the empirical `quantile` of its finite values.
    pub fn fit(data: &[f64], quantile: f64) -> Result<Self> {
        if !(quantile > 0.0 && quantile < 1.0) {
            return Err(Error::InvalidParameter(format!("threshold quantile {quantile} outside (0, 1)")));
        }
        let mut sorted: Vec<f64> = data.iter().copied().filter(|x| x.is_finite()).collect();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        if n == 0 {
            return Err(Error::TooFewExceedances { found: 0, needed: MIN_EXCEEDANCES });
        }
        let k = ((quantile * n as f64).ceil() as usize).clamp(1, n);
        let threshold = sorted[k - 1];
        let gpd = fit_gpd_site(&sorted, threshold)?;
        let below: Vec<f64> = sorted.into_iter().take_while(|&x| x <= threshold).collect();
        Ok(Self { threshold, quantile, gpd, below, n })
    }

    /// Semiparametric distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x > self.threshold {
            return 1.0 - (1.0 - self.quantile) * self.gpd.sf(x - self.threshold);
        }
        let count = self.below.partition_point(|&b| b <= x);
        self.quantile * count as f64 / self.below.len() as f64
    }

    /// Standard Pareto value 1/(1 − F(x)).
    pub fn to_pareto(&self, x: f64) -> f64 {
        if x > self.threshold {
            // avoids cancellation in 1 − F far in the tail
            return 1.0 / ((1.0 - self.quantile) * self.gpd.sf(x - self.threshold));
        }
        1.0 / (1.0 - self.cdf(x))
    }

    /// Data-scale value with standard Pareto value `x_star`.
    pub fn from_pareto(&self, x_star: f64) -> f64 {
        if x_star.is_nan() {
            return f64::NAN;
        }
        let tail = 1.0 / x_star.max(1.0);
        if tail < 1.0 - self.quantile {
            return self.threshold + self.gpd.isf(tail / (1.0 - self.quantile));
        }
        let p = 1.0 - tail;
        let m = self.below.len();
        let idx = ((p / self.quantile * m as f64).ceil() as usize).clamp(1, m);
        self.below[idx - 1]
    }
}

/// Fits every column of an n×D matrix; NaN entries are treated as missing.
pub fn fit_margins(raw: &Matrix<f64>, quantile: f64) -> Result<Vec<MarginalFit>> {
    (0..raw.cols())
        .map(|j| {
            let col: Vec<f64> = (0..raw.rows()).map(|i| raw[(i, j)]).collect();
            MarginalFit::fit(&col, quantile)
        })
        .collect()
}

/// Maps each column of `raw` to the standard Pareto scale with its fit.
/// Missing values stay NaN.
pub fn standardize_margins(raw: &Matrix<f64>, fits: &[MarginalFit]) -> Result<Matrix<f64>> {
    if fits.len() != raw.cols() {
        return Err(Error::DimensionMismatch(format!("{} marginal fits for {} sites", fits.len(), raw.cols())));
    }
    Ok(Matrix::from_fn(raw.rows(), raw.cols(), |i, j| fits[j].to_pareto(raw[(i, j)])))
}
