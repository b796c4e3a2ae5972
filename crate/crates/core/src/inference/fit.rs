use serde::{Deserialize, Serialize};

use super::exceed::ExceedanceSample;
use super::likelihood::{Likelihood, LikelihoodKind};
use super::optim::{fd_hessian, nelder_mead, symmetric_inverse, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::exponent::{distance, ParamVector};
use crate::numerics::{Matrix, QmcConfig};

/// Admissible range of κ.
pub const KAPPA_BOX: (f64, f64) = (0.05, 2.0);
/// Admissible range of α.
pub const ALPHA_BOX: (f64, f64) = (0.1, 50.0);
/// Admissible range of log λ.
pub const LOG_LAMBDA_BOX: (f64, f64) = (-12.0, 12.0);

/// Maps ψ = (log λ, κ, α) to the unconstrained optimizer coordinates
/// (log λ, logit(κ/2), log α).
pub fn to_transformed(psi: &ParamVector<f64>) -> [f64; 3] {
    let h = psi.kappa / 2.0;
    [psi.log_lambda, (h / (1.0 - h)).ln(), psi.alpha.ln()]
}

/// Inverse of [`to_transformed`].
pub fn from_transformed(t: &[f64]) -> Result<ParamVector<f64>> {
    let kappa = 2.0 / (1.0 + (-t[1]).exp());
    ParamVector::new(t[0], kappa, t[2].exp())
}

/// Jacobian diagonal d ψ / d t of the coordinate map.
fn jacobian(psi: &ParamVector<f64>) -> [f64; 3] {
    [1.0, psi.kappa * (1.0 - psi.kappa / 2.0), psi.alpha]
}

fn in_box(psi: &ParamVector<f64>) -> bool {
    (LOG_LAMBDA_BOX.0..=LOG_LAMBDA_BOX.1).contains(&psi.log_lambda)
        && (KAPPA_BOX.0..=KAPPA_BOX.1).contains(&psi.kappa)
        && (ALPHA_BOX.0..=ALPHA_BOX.1).contains(&psi.alpha)
}

fn near_box_edge(psi: &ParamVector<f64>) -> bool {
    psi.kappa < KAPPA_BOX.0 * 1.1
        || psi.kappa > KAPPA_BOX.1 * 0.99
        || psi.alpha < ALPHA_BOX.0 * 1.1
        || psi.alpha > ALPHA_BOX.1 * 0.95
        || psi.log_lambda < LOG_LAMBDA_BOX.0 + 0.5
        || psi.log_lambda > LOG_LAMBDA_BOX.1 - 0.5
}

/// Default starting point: κ = 1, α = 2 and λ equal to the median
/// pairwise site distance.
pub fn default_init(sites: &Matrix<f64>) -> ParamVector<f64> {
    let n = sites.rows();
    let mut d: Vec<f64> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| distance(sites.row(i), sites.row(j))).filter(|h| *h > 0.0).collect();
    d.sort_by(f64::total_cmp);
    let lambda = if d.is_empty() { 1.0 } else { d[d.len() / 2] };
    ParamVector { log_lambda: lambda.ln(), kappa: 1.0, alpha: 2.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Point set for the multivariate t probabilities inside the likelihood.
    pub qmc: QmcConfig,
    pub max_evals: usize,
    /// Finite-difference step for the Hessian, in transformed coordinates.
    pub hessian_step: f64,
    pub initial_step: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { qmc: QmcConfig::for_fitting(0x5EED), max_evals: 2000, hessian_step: 1e-2, initial_step: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: LikelihoodKind,
    pub psi_hat: ParamVector<f64>,
    /// Estimate in (log λ, logit(κ/2), log α).
    pub transformed: [f64; 3],
    /// Covariance of ψ̂ = (log λ, κ, α) by the delta method; `None` when
    /// the Hessian could not be evaluated.
    pub cov: Option<[[f64; 3]; 3]>,
    /// Inverse Hessian in the transformed coordinates.
    pub cov_transformed: Option<[[f64; 3]; 3]>,
    pub nll: f64,
    pub aic: f64,
    pub n_evals: usize,
    /// False when the Hessian had non-positive eigenvalues and the
    /// covariance is a pseudo-inverse.
    pub hessian_pd: bool,
    /// The estimate lies at the edge of the parameter box.
    pub at_boundary: bool,
    pub n_exceed: usize,
    pub n_total: usize,
}

impl FitResult {
    /// Standard errors of (log λ, κ, α).
    pub fn se(&self) -> Option<[f64; 3]> {
        self.cov.map(|c| [c[0][0].sqrt(), c[1][1].sqrt(), c[2][2].sqrt()])
    }

    /// Standard errors in the transformed coordinates.
    pub fn se_transformed(&self) -> Option<[f64; 3]> {
        self.cov_transformed.map(|c| [c[0][0].sqrt(), c[1][1].sqrt(), c[2][2].sqrt()])
    }
}

/// Maximum likelihood fit of ψ by Nelder–Mead on the transformed
/// coordinates, with a finite-difference Hessian at the optimum.
pub fn fit_model(
    sample: &ExceedanceSample,
    sites: &Matrix<f64>,
    kind: LikelihoodKind,
    init: &ParamVector<f64>,
    cfg: &FitConfig,
) -> Result<FitResult> {
    init.validate()?;
    let lik = Likelihood::new(sample, sites, kind, &cfg.qmc)?;
    let objective = |t: &[f64]| -> f64 {
        match from_transformed(t) {
            Ok(psi) if in_box(&psi) => lik.nll(&psi).unwrap_or(f64::INFINITY),
            _ => f64::INFINITY,
        }
    };
    let start = to_transformed(init);
    if !objective(&start).is_finite() {
        return Err(Error::InvalidParameter(format!("likelihood is not finite at the initial value {init:?}")));
    }
    let opts = NelderMeadOptions { max_evals: cfg.max_evals, f_tol: 1e-10, x_tol: 1e-4, initial_step: cfg.initial_step };
    let m = nelder_mead(objective, &start, &opts);
    if !m.converged {
        return Err(Error::NonConvergence { evals: m.evals });
    }
    let psi_hat = from_transformed(&m.x)?;
    let at_boundary = near_box_edge(&psi_hat);
    if at_boundary {
        log::warn!("estimate {psi_hat:?} is at the edge of the parameter box");
    }

    let steps = [cfg.hessian_step; 3];
    let hess = fd_hessian(objective, &m.x, &steps);
    let finite = (0..3).all(|i| (0..3).all(|j| hess[(i, j)].is_finite()));
    let (cov_transformed, cov, hessian_pd) = if finite {
        let (inv, pd) = symmetric_inverse(&hess, 1e-10);
        if !pd {
            log::warn!("Hessian is not positive definite; reporting the pseudo-inverse");
        }
        let jac = jacobian(&psi_hat);
        let ct: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)]));
        let cn: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| jac[i] * inv[(i, j)] * jac[j]));
        (Some(ct), Some(cn), pd)
    } else {
        log::warn!("Hessian has non-finite entries; no covariance reported");
        (None, None, false)
    };

    Ok(FitResult {
        kind,
        psi_hat,
        transformed: [m.x[0], m.x[1], m.x[2]],
        cov,
        cov_transformed,
        nll: m.value,
        aic: 2.0 * m.value + 6.0,
        n_evals: m.evals,
        hessian_pd,
        at_boundary,
        n_exceed: sample.len(),
        n_total: sample.n_total(),
    })
}
