use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{CellSpec, StudyConfig};
use crate::exponent::ParamVector;
use crate::inference::{to_transformed, FitResult, LikelihoodKind};

/// Share of failed fits above which a cell is flagged invalid.
pub const MAX_FAILURE_SHARE: f64 = 0.1;

/// Empirical bias and covariance of a set of estimates around a truth.
/// Covariances use the divisor R (number of estimates), so
/// `mse = bias_sq + trace` holds up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: [f64; 3],
    pub bias: [f64; 3],
    pub cov: [[f64; 3]; 3],
    /// ‖bias‖²
    pub bias_sq: f64,
    /// trace of the covariance
    pub trace: f64,
    /// mean of ‖ψ̂ − ψ₀‖²
    pub mse: f64,
}

impl Moments {
    pub fn from_estimates(estimates: &[[f64; 3]], truth: [f64; 3]) -> Option<Self> {
        if estimates.is_empty() {
            return None;
        }
        let r = estimates.len() as f64;
        let mean: [f64; 3] = std::array::from_fn(|j| estimates.iter().map(|e| e[j]).sum::<f64>() / r);
        let bias: [f64; 3] = std::array::from_fn(|j| mean[j] - truth[j]);
        let cov: [[f64; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| estimates.iter().map(|e| (e[i] - mean[i]) * (e[j] - mean[j])).sum::<f64>() / r));
        let mse = estimates.iter().map(|e| (0..3).map(|j| (e[j] - truth[j]).powi(2)).sum::<f64>()).sum::<f64>() / r;
        Some(Self { mean, bias, cov, bias_sq: bias.iter().map(|b| b * b).sum(), trace: cov[0][0] + cov[1][1] + cov[2][2], mse })
    }
}

/// Results of one estimator on one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub kind: LikelihoodKind,
    pub n_ok: usize,
    pub n_failed: usize,
    /// More than 10% of the fits failed.
    pub invalid: bool,
    /// Moments of ψ̂ = (log λ, κ, α).
    pub natural: Option<Moments>,
    /// Moments of (log λ, logit(κ/2), log α).
    pub transformed: Option<Moments>,
    /// Mean reported standard errors in the transformed coordinates.
    pub mean_se_transformed: Option<[f64; 3]>,
    /// Share of successful fits whose transformed estimate lies within
    /// three reported standard errors of the truth in every coordinate.
    pub within_3se: f64,
    pub mean_n_exceed: f64,
}

impl EstimatorSummary {
    pub fn from_fits(kind: LikelihoodKind, fits: &[Option<FitResult>], truth: &ParamVector<f64>) -> Self {
        let ok: Vec<&FitResult> = fits.iter().flatten().collect();
        let n_failed = fits.len() - ok.len();
        let natural: Vec<[f64; 3]> = ok.iter().map(|f| f.psi_hat.to_array()).collect();
        let transformed: Vec<[f64; 3]> = ok.iter().map(|f| f.transformed).collect();
        let t0 = to_transformed(truth);
        let ses: Vec<[f64; 3]> = ok.iter().filter_map(|f| f.se_transformed()).collect();
        let mean_se = if ses.is_empty() {
            None
        } else {
            Some(std::array::from_fn(|j| ses.iter().map(|s| s[j]).sum::<f64>() / ses.len() as f64))
        };
        let covered = ok
            .iter()
            .filter(|f| match f.se_transformed() {
                Some(se) => (0..3).all(|j| (f.transformed[j] - t0[j]).abs() <= 3.0 * se[j]),
                None => false,
            })
            .count();
        let share = |k: usize| if ok.is_empty() { 0.0 } else { k as f64 / ok.len() as f64 };
        Self {
            kind,
            n_ok: ok.len(),
            n_failed,
            invalid: n_failed as f64 > MAX_FAILURE_SHARE * fits.len() as f64,
            natural: Moments::from_estimates(&natural, truth.to_array()),
            transformed: Moments::from_estimates(&transformed, t0),
            mean_se_transformed: mean_se,
            within_3se: share(covered),
            mean_n_exceed: if ok.is_empty() { 0.0 } else { ok.iter().map(|f| f.n_exceed as f64).sum::<f64>() / ok.len() as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub spec: CellSpec,
    pub threshold_quantile: f64,
    pub psi0: ParamVector<f64>,
    pub estimators: Vec<EstimatorSummary>,
    pub runtime_secs: f64,
}

impl CellReport {
    pub fn estimator(&self, kind: LikelihoodKind) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.kind == kind)
    }

    /// True when any estimator has too many failed fits.
    pub fn invalid(&self) -> bool {
        self.estimators.iter().any(|e| e.invalid)
    }

    /// trace(V_a)/trace(V_b) on the natural scale.
    pub fn trace_ratio(&self, a: LikelihoodKind, b: LikelihoodKind) -> Option<f64> {
        let ta = self.estimator(a)?.natural?.trace;
        let tb = self.estimator(b)?.natural?.trace;
        Some(ta / tb)
    }

    /// MSE_a/MSE_b on the natural scale.
    pub fn mse_ratio(&self, a: LikelihoodKind, b: LikelihoodKind) -> Option<f64> {
        let ma = self.estimator(a)?.natural?.mse;
        let mb = self.estimator(b)?.natural?.mse;
        Some(ma / mb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Recovery,
    Misspecified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub kind: StudyKind,
    pub config: StudyConfig,
    pub cells: Vec<CellReport>,
    pub runtime_secs: f64,
}

fn pct(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{:.0}", 100.0 * v),
        _ => "NA".into(),
    }
}

fn full(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.16e}"),
        None => "NA".into(),
    }
}

impl StudyReport {
    /// Long-format CSV: one row per cell, threshold and estimator, with the
    /// moments at full precision and the table entry (×100, slash
    /// separated) as the last column.
    pub fn to_csv(&self) -> String {
        use LikelihoodKind::*;
        let mut out = String::from(
            "kappa,alpha,theta,log_lambda0,quantile,estimator,n_ok,n_failed,invalid,bias_log_lambda,bias_kappa,bias_alpha,bias_sq,trace,mse,table_entry\n",
        );
        for cell in &self.cells {
            for e in &cell.estimators {
                let m = e.natural;
                let entry = match self.kind {
                    // bias/variance terms ×100
                    StudyKind::Misspecified => format!("{}/{}", pct(m.map(|m| m.bias_sq)), pct(m.map(|m| m.trace))),
                    StudyKind::Recovery => match e.kind {
                        L1 => pct(cell.trace_ratio(L1, L2)),
                        L2 => pct(cell.trace_ratio(L2, Pairwise)),
                        Pairwise => String::new(),
                    },
                };
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{},{},{},{},{},{},{},{}",
                    cell.spec.kappa,
                    cell.spec.alpha,
                    cell.spec.theta,
                    cell.psi0.log_lambda,
                    cell.threshold_quantile,
                    e.kind,
                    e.n_ok,
                    e.n_failed,
                    e.invalid,
                    full(m.map(|m| m.bias[0])),
                    full(m.map(|m| m.bias[1])),
                    full(m.map(|m| m.bias[2])),
                    full(m.map(|m| m.bias_sq)),
                    full(m.map(|m| m.trace)),
                    full(m.map(|m| m.mse)),
                    entry
                );
            }
        }
        out
    }

    /// The table layout: for the recovery study one line per cell with
    /// "uncensored/censored ÷ censored/pairwise" trace ratios; for the
    /// misspecified study the δ line "MSE(L2)/MSE(L1) / MSE(L2)/MSE(pw)".
    pub fn table(&self) -> String {
        use LikelihoodKind::*;
        let mut out = String::new();
        for cell in &self.cells {
            let (a, b) = match self.kind {
                StudyKind::Recovery => (cell.trace_ratio(L1, L2), cell.trace_ratio(L2, Pairwise)),
                StudyKind::Misspecified => (cell.mse_ratio(L2, L1), cell.mse_ratio(L2, Pairwise)),
            };
            let _ = writeln!(
                out,
                "kappa={} alpha={} theta={} q={}: {}/{}{}",
                cell.spec.kappa,
                cell.spec.alpha,
                cell.spec.theta,
                cell.threshold_quantile,
                pct(a),
                pct(b),
                if cell.invalid() { " (invalid: too many failed fits)" } else { "" }
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_decomposes() {
        let est = [[0.1, 1.2, 2.5], [0.3, 0.9, 1.7], [-0.2, 1.1, 2.2], [0.05, 1.0, 2.9]];
        let m = Moments::from_estimates(&est, [0.0, 1.0, 2.0]).unwrap();
        assert!((m.mse - m.bias_sq - m.trace).abs() < 1e-12);
        assert!(Moments::from_estimates(&[], [0.0; 3]).is_none());
    }
}
