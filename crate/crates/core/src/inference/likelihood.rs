//! Negative log-likelihoods of the dependence parameters given
//! ℓ-exceedances on the standard scale.
//!
//! All three variants share the binomial factor
//! V(u)^{N_u}{1 − V(u)}^{n − N_u}; the V(u)^{N_u} part cancels against the
//! normalization of the exceedance density, leaving −(n − N_u)·log{1 − V(u)}
//! plus one term per exceedance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exceed::ExceedanceSample;
use crate::error::{Error, Result};
use crate::exponent::{corr_entries, exponent_v_corr, log_partial_v_with, ParamVector};
use crate::numerics::{Matrix, MvtIntegrator, QmcConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodKind {
    /// Intensity at the observed exceedances.
    L1,
    /// Censored at the thresholds: components below u_j enter through
    /// partial derivatives of V.
    L2,
    /// Sum of bivariate censored likelihoods over all site pairs.
    Pairwise,
}

impl LikelihoodKind {
    pub const ALL: [LikelihoodKind; 3] = [LikelihoodKind::L1, LikelihoodKind::L2, LikelihoodKind::Pairwise];

    pub fn name(self) -> &'static str {
        match self {
            LikelihoodKind::L1 => "l1",
            LikelihoodKind::L2 => "l2",
            LikelihoodKind::Pairwise => "pairwise",
        }
    }
}

impl std::str::FromStr for LikelihoodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "uncensored" => Ok(LikelihoodKind::L1),
            "l2" | "censored" => Ok(LikelihoodKind::L2),
            "pairwise" => Ok(LikelihoodKind::Pairwise),
            other => Err(Error::InvalidParameter(format!("unknown likelihood '{other}', expected l1, l2 or pairwise"))),
        }
    }
}

impl std::fmt::Display for LikelihoodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A likelihood bound to one sample, reusable across parameter values.
#[derive(Debug)]
pub struct Likelihood<'a> {
    sample: &'a ExceedanceSample,
    sites: &'a Matrix<f64>,
    kind: LikelihoodKind,
    integ: MvtIntegrator<f64>,
    /// Every site pair with its marginal sample.
    pairs: Vec<([usize; 2], ExceedanceSample)>,
}

impl<'a> Likelihood<'a> {
    pub fn new(sample: &'a ExceedanceSample, sites: &'a Matrix<f64>, kind: LikelihoodKind, cfg: &QmcConfig) -> Result<Self> {
        if sites.rows() != sample.dim() {
            return Err(Error::DimensionMismatch(format!("{} sites, sample has {} columns", sites.rows(), sample.dim())));
        }
        let mut pairs = Vec::new();
        if kind == LikelihoodKind::Pairwise {
            let d = sample.dim();
            if d < 2 {
                return Err(Error::DimensionMismatch("pairwise likelihood needs at least two sites".into()));
            }
            for i in 0..d {
                for j in (i + 1)..d {
                    // pairs without exceedances still carry the binomial term
                    let sub = sample.marginalize(&[i, j]);
                    pairs.push(([i, j], sub.unwrap_or_else(|| empty_pair(sample, [i, j]))));
                }
            }
        }
        Ok(Self { sample, sites, kind, integ: MvtIntegrator::new(*cfg)?, pairs })
    }

    pub fn kind(&self) -> LikelihoodKind {
        self.kind
    }

    pub fn sample(&self) -> &ExceedanceSample {
        self.sample
    }

    pub fn sites(&self) -> &Matrix<f64> {
        self.sites
    }

    /// Negative log-likelihood at ψ.
    pub fn nll(&self, psi: &ParamVector<f64>) -> Result<f64> {
        psi.validate()?;
        let sigma = corr_entries(self.sites, &psi.correlation()?);
        match self.kind {
            LikelihoodKind::L1 => block_nll(self.sample, &sigma, psi.alpha, &self.integ, false),
            LikelihoodKind::L2 => block_nll(self.sample, &sigma, psi.alpha, &self.integ, true),
            LikelihoodKind::Pairwise => {
                let mut total = 0.0;
                for ([i, j], sub) in &self.pairs {
                    let s2 = sigma.select(&[*i, *j], &[*i, *j]);
                    total += block_nll(sub, &s2, psi.alpha, &self.integ, true)?;
                }
                Ok(total)
            }
        }
    }
}

/// Pair sample with no rows; only its binomial term contributes.
fn empty_pair(sample: &ExceedanceSample, pair: [usize; 2]) -> ExceedanceSample {
    ExceedanceSample::empty(sample.n_total(), pair.iter().map(|&j| sample.thresholds()[j]).collect())
}

/// Binomial term plus per-row terms for one block of sites.
pub(crate) fn block_nll(sample: &ExceedanceSample, sigma: &Matrix<f64>, alpha: f64, integ: &MvtIntegrator<f64>, censor: bool) -> Result<f64> {
    let u = sample.thresholds();
    let v = exponent_v_corr(u, sigma, alpha, integ)?.probability;
    if v >= 1.0 {
        return Err(Error::ThresholdTooLow(v));
    }
    let binom = -((sample.n_total() - sample.len()) as f64) * (-v).ln_1p();
    let x = sample.x_star();
    let terms: Vec<Result<f64>> = (0..sample.len())
        .into_par_iter()
        .map(|k| {
            let row = x.row(k);
            if censor {
                let y: Vec<f64> = row.iter().zip(u).map(|(a, b)| a.max(*b)).collect();
                log_partial_v_with(&y, &sample.exceed_sets()[k], sigma, alpha, integ)
            } else {
                let positive: Vec<usize> = (0..row.len()).filter(|&j| row[j] > 0.0).collect();
                log_partial_v_with(row, &positive, sigma, alpha, integ)
            }
        })
        .collect();
    // sequential sum keeps the value independent of the thread count
    let mut total = binom;
    for t in terms {
        total -= t?;
    }
    Ok(total)
}

/// −log L₁: exceedances enter through the intensity λ(x*).
pub fn nll_uncensored(sample: &ExceedanceSample, sites: &Matrix<f64>, psi: &ParamVector<f64>, cfg: &QmcConfig) -> Result<f64> {
    Likelihood::new(sample, sites, LikelihoodKind::L1, cfg)?.nll(psi)
}

/// −log L₂: each row contributes −log{−V_{I_k}(max(x*_k, u))}.
pub fn nll_censored(sample: &ExceedanceSample, sites: &Matrix<f64>, psi: &ParamVector<f64>, cfg: &QmcConfig) -> Result<f64> {
    Likelihood::new(sample, sites, LikelihoodKind::L2, cfg)?.nll(psi)
}

/// Sum over site pairs of the bivariate censored negative log-likelihood,
/// each pair with its own exceedances and binomial term at the global
/// marginal thresholds.
pub fn nll_pairwise(sample: &ExceedanceSample, sites: &Matrix<f64>, psi: &ParamVector<f64>, cfg: &QmcConfig) -> Result<f64> {
    Likelihood::new(sample, sites, LikelihoodKind::Pairwise, cfg)?.nll(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_parsing_round_trips() {
        for k in LikelihoodKind::ALL {
            assert_eq!(k.name().parse::<LikelihoodKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
        assert!("l3".parse::<LikelihoodKind>().is_err());
    }
}
