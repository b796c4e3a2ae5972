//! Exponent function, intensity and partial derivatives of the extremal-t
//! exponent measure.
//!
//! Every density is assembled in log space. Conditional location and scale
//! blocks are formed from Cholesky solves against the conditioning block,
//! never from explicit inverses.

use crate::error::{Error, Result};
use crate::numerics::{ln_gamma, signed_power, signed_power_vec, t_cdf, Matrix, MvtEstimate, MvtIntegrator, PdMatrix, QmcConfig};
use crate::scalar::{c, Scalar};

use super::model::{corr_entries, EllipticalModel};
use crate::numerics::cholesky_pd;

/// Conditional variances below this are treated as point masses.
const DEGENERATE_VAR: f64 = 1e-12;

/// V(z) for the model's correlation matrix.
pub fn exponent_v<T: Scalar>(z: &[T], model: &EllipticalModel<T>, cfg: &QmcConfig) -> Result<T> {
    let integ = MvtIntegrator::new(*cfg)?;
    Ok(exponent_v_with(z, model, &integ)?.probability)
}

/// V(z) together with its Monte Carlo standard error, reusing an integrator.
pub fn exponent_v_with<T: Scalar>(z: &[T], model: &EllipticalModel<T>, integ: &MvtIntegrator<T>) -> Result<MvtEstimate<T>> {
    exponent_v_corr(z, model.sigma().entries(), model.alpha(), integ)
}

/// V(z) for an arbitrary correlation matrix, which may be singular.
///
/// Each term is z_j⁻¹ times a t_{α+1} probability. Coordinates whose
/// conditional scale vanishes (sites co-located with site j) are point
/// masses at their location; a tie with the upper limit counts one half,
/// which is the limit of the non-degenerate expression.
pub fn exponent_v_corr<T: Scalar>(z: &[T], sigma: &Matrix<T>, alpha: T, integ: &MvtIntegrator<T>) -> Result<MvtEstimate<T>> {
    let d = z.len();
    if sigma.rows() != d || sigma.cols() != d {
        return Err(Error::DimensionMismatch(format!("z has {d} entries, sigma is {}x{}", sigma.rows(), sigma.cols())));
    }
    if let Some(bad) = z.iter().find(|&&v| !(v > T::zero())) {
        return Err(Error::Domain(format!("exponent function needs z > 0, got {bad}")));
    }
    let inv_alpha = alpha.recip();
    let dof = alpha + T::one();
    let mut value = T::zero();
    let mut var = T::zero();
    for j in 0..d {
        let mut factor = T::one();
        let mut keep = Vec::with_capacity(d - 1);
        let mut upper = Vec::with_capacity(d - 1);
        let mut loc = Vec::with_capacity(d - 1);
        for i in (0..d).filter(|&i| i != j) {
            let u = (z[i] / z[j]).powf(inv_alpha);
            let m = sigma[(i, j)];
            let s = (sigma[(i, i)] - m * m) / dof;
            if s <= c(DEGENERATE_VAR) {
                let tie = c::<T>(1e-12) * m.abs().max(T::one());
                if u < m - tie {
                    factor = T::zero();
                } else if u <= m + tie {
                    factor *= c(0.5);
                }
                continue;
            }
            keep.push(i);
            upper.push(u);
            loc.push(m);
        }
        if factor == T::zero() {
            continue;
        }
        let scale = Matrix::from_fn(keep.len(), keep.len(), |a, b| {
            let (i, k) = (keep[a], keep[b]);
            (sigma[(i, k)] - sigma[(i, j)] * sigma[(k, j)]) / dof
        });
        let est = if keep.is_empty() {
            MvtEstimate { probability: T::one(), error: T::zero() }
        } else {
            integ.cdf_raw(&upper, dof, &loc, &scale.symmetrized())?
        };
        let w = factor / z[j];
        value += w * est.probability;
        var += w * w * est.error * est.error;
    }
    Ok(MvtEstimate { probability: value, error: var.sqrt() })
}

/// Density λ_s(y) of the exponent measure on ℝ^D.
pub fn intensity_lambda<T: Scalar>(y: &[T], model: &EllipticalModel<T>) -> Result<T> {
    Ok(log_intensity(y, model.sigma(), model.alpha())?.exp())
}

/// log λ_s(y) for a factorized correlation matrix.
pub fn log_intensity<T: Scalar>(y: &[T], sigma: &PdMatrix<T>, alpha: T) -> Result<T> {
    let d = y.len();
    if sigma.dim() != d {
        return Err(Error::DimensionMismatch(format!("y has {d} entries, sigma has dimension {}", sigma.dim())));
    }
    if y.iter().any(|&v| v == T::zero() || !v.is_finite()) {
        return Err(Error::Domain("intensity needs finite nonzero components; use partial_v for boundary points".into()));
    }
    let dd: T = c(d as f64);
    let w = signed_power_vec(y, alpha.recip());
    let q = sigma.quad_form(&w);
    let log_abs: T = y.iter().map(|v| v.abs().ln()).sum();
    Ok((T::one() - dd) * alpha.ln() + (T::one() - dd) * c(0.5) * T::PI().ln() - c::<T>(0.5) * sigma.log_det()
        - ln_gamma((alpha + T::one()) * c(0.5))
        + ln_gamma((alpha + dd) * c(0.5))
        + (alpha.recip() - T::one()) * log_abs
        - (alpha + dd) * c(0.5) * q.ln())
}

/// Multivariate t law of T_{1/α} of the non-conditioning coordinates given
/// the conditioning ones: X ~ t_{d+α}(μ̃, Σ̃) with
/// μ̃ = Σ_{J,I}Σ_I⁻¹w and Σ̃ = wᵀΣ_I⁻¹w/(d+α)·(Σ_J − Σ_{J,I}Σ_I⁻¹Σ_{I,J}),
/// w = T_{1/α}(y_I).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalT<T> {
    pub dof: T,
    pub location: Vec<T>,
    pub scale: PdMatrix<T>,
    pub alpha: T,
}

impl<T: Scalar> ConditionalT<T> {
    /// Builds the conditional law from a joint correlation matrix, the
    /// conditioning indices `cond`, target indices `target` and the
    /// conditioning values y_I on the standard scale.
    pub fn from_joint(sigma: &Matrix<T>, cond: &[usize], target: &[usize], y_cond: &[T], alpha: T) -> Result<Self> {
        let parts = conditional_parts(sigma, cond, target, y_cond, alpha)?;
        Ok(Self { dof: parts.dof, location: parts.location, scale: cholesky_pd(&parts.scale)?, alpha })
    }

    /// Conditional law at the model's sites given values at `cond_sites`.
    pub fn new(model: &EllipticalModel<T>, cond_sites: &Matrix<T>, cond_values: &[T]) -> Result<Self> {
        if cond_sites.rows() != cond_values.len() || cond_sites.rows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} conditioning sites, {} conditioning values",
                cond_sites.rows(),
                cond_values.len()
            )));
        }
        if cond_sites.cols() != model.sites().cols() {
            return Err(Error::DimensionMismatch("conditioning sites have a different coordinate dimension".into()));
        }
        if let Some(v) = cond_values.iter().find(|&&v| !(v > T::zero()) || !v.is_finite()) {
            return Err(Error::Domain(format!("conditioning values must be positive, got {v}")));
        }
        let m = model.dim();
        let d = cond_sites.rows();
        let joint = Matrix::from_fn(m + d, model.sites().cols(), |i, k| {
            if i < m {
                model.sites()[(i, k)]
            } else {
                cond_sites[(i - m, k)]
            }
        });
        let sigma = corr_entries(&joint, model.corr());
        let cond: Vec<usize> = (m..m + d).collect();
        let target: Vec<usize> = (0..m).collect();
        cholesky_pd(&sigma)?;
        Self::from_joint(&sigma, &cond, &target, cond_values, model.alpha())
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    /// log density of X at x.
    pub fn log_density_latent(&self, x: &[T]) -> T {
        let m: T = c(self.dim() as f64);
        let nu = self.dof;
        let diff: Vec<T> = x.iter().zip(&self.location).map(|(&a, &b)| a - b).collect();
        let q = self.scale.quad_form(&diff);
        ln_gamma((nu + m) * c(0.5)) - ln_gamma(nu * c(0.5)) - m * c(0.5) * (nu * T::PI()).ln()
            - c::<T>(0.5) * self.scale.log_det()
            - (nu + m) * c(0.5) * (q / nu).ln_1p()
    }

    /// log density of T_α(X) at y (all components nonzero).
    pub fn log_density(&self, y: &[T]) -> Result<T> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("y has {} entries, expected {}", y.len(), self.dim())));
        }
        if y.iter().any(|&v| v == T::zero() || !v.is_finite()) {
            return Err(Error::Domain("conditional density needs finite nonzero components".into()));
        }
        let inv = self.alpha.recip();
        let x = signed_power_vec(y, inv);
        let jac: T = y.iter().map(|v| (inv - T::one()) * v.abs().ln() - self.alpha.ln()).sum();
        Ok(self.log_density_latent(&x) + jac)
    }
}

struct Parts<T> {
    dof: T,
    location: Vec<T>,
    scale: Matrix<T>,
    cond_factor: PdMatrix<T>,
}

fn conditional_parts<T: Scalar>(sigma: &Matrix<T>, cond: &[usize], target: &[usize], y_cond: &[T], alpha: T) -> Result<Parts<T>> {
    if cond.len() != y_cond.len() {
        return Err(Error::DimensionMismatch(format!("{} conditioning indices, {} values", cond.len(), y_cond.len())));
    }
    let d = cond.len();
    let s_i = cholesky_pd(&sigma.select(cond, cond))?;
    let s_ij = sigma.select(cond, target);
    let b = s_i.solve_lower_mat(&s_ij);
    let v = s_i.solve_lower(&signed_power_vec(y_cond, alpha.recip()));
    let q: T = v.iter().map(|&x| x * x).sum();
    let dof = c::<T>(d as f64) + alpha;
    let bt = b.transpose();
    let location = bt.mul_vec(&v);
    let schur = sigma.select(target, target).sub(&bt.matmul(&b)?);
    let scale = schur.scaled(q / dof).symmetrized();
    Ok(Parts { dof, location, scale, cond_factor: s_i })
}

/// Value of −V_I(y): the derivative of the exponent function with respect
/// to the components in `exceed_idx`, for y_j ≥ 0 outside I. With y_j = 0
/// outside I this is the density of the measure on the corresponding face.
pub fn partial_v<T: Scalar>(y: &[T], exceed_idx: &[usize], model: &EllipticalModel<T>, cfg: &QmcConfig) -> Result<T> {
    let integ = MvtIntegrator::new(*cfg)?;
    Ok(log_partial_v_with(y, exceed_idx, model.sigma().entries(), model.alpha(), &integ)?.exp())
}

/// log(−V_I(y)) reusing an integrator.
pub fn log_partial_v_with<T: Scalar>(y: &[T], exceed_idx: &[usize], sigma: &Matrix<T>, alpha: T, integ: &MvtIntegrator<T>) -> Result<T> {
    let d = y.len();
    if sigma.rows() != d {
        return Err(Error::DimensionMismatch(format!("y has {d} entries, sigma has dimension {}", sigma.rows())));
    }
    if exceed_idx.is_empty() || exceed_idx.iter().any(|&i| i >= d) {
        return Err(Error::InvalidParameter("exceedance index set must be a nonempty subset of the sites".into()));
    }
    let mut in_i = vec![false; d];
    for &i in exceed_idx {
        if in_i[i] {
            return Err(Error::InvalidParameter(format!("index {i} repeated in exceedance set")));
        }
        in_i[i] = true;
    }
    let y_i: Vec<T> = exceed_idx.iter().map(|&i| y[i]).collect();
    if let Some(v) = y_i.iter().find(|&&v| !(v > T::zero()) || !v.is_finite()) {
        return Err(Error::Domain(format!("exceeding components must be positive, got {v}")));
    }
    let rest: Vec<usize> = (0..d).filter(|&j| !in_i[j]).collect();
    if rest.iter().any(|&j| y[j].is_nan()) {
        return Err(Error::Domain("NaN component".into()));
    }
    if rest.is_empty() {
        let s_i = cholesky_pd(&sigma.select(exceed_idx, exceed_idx))?;
        return log_intensity(&y_i, &s_i, alpha);
    }
    let parts = conditional_parts(sigma, exceed_idx, &rest, &y_i, alpha)?;
    let log_lambda = log_intensity(&y_i, &parts.cond_factor, alpha)?;
    let inv = alpha.recip();
    let upper: Vec<T> = rest.iter().map(|&j| signed_power(y[j], inv)).collect();
    let p = integ.cdf_raw(&upper, parts.dof, &parts.location, &parts.scale)?;
    Ok(log_lambda + p.probability.ln())
}

/// Conditional intensity of the process at the model's sites given values
/// at `cond_sites`: the density of T_α(X) for the conditional t vector X.
pub fn cond_intensity<T: Scalar>(y: &[T], cond_sites: &Matrix<T>, cond_values: &[T], model: &EllipticalModel<T>) -> Result<T> {
    Ok(ConditionalT::new(model, cond_sites, cond_values)?.log_density(y)?.exp())
}

/// Bivariate extremal coefficient θ = V(1, 1) at correlation ρ.
pub fn extremal_coeff_rho<T: Scalar>(rho: T, alpha: T) -> T {
    let a1 = alpha + T::one();
    let x = (a1 * (T::one() - rho) / (T::one() + rho)).max(T::zero()).sqrt();
    c::<T>(2.0) * t_cdf(x, a1)
}

/// Extremal coefficient of a two-site model.
pub fn extremal_coeff<T: Scalar>(model: &EllipticalModel<T>) -> Result<T> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("extremal coefficient needs 2 sites, model has {}", model.dim())));
    }
    Ok(extremal_coeff_rho(model.sigma().entries()[(0, 1)], model.alpha()))
}

/// Extremal coefficient as a function of separation distance.
pub fn extremal_coeff_at<T: Scalar>(corr: &super::CorrelationModel<T>, alpha: T, h: T) -> T {
    extremal_coeff_rho(corr.rho(h), alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::CorrelationModel;

    fn pair_sigma(rho: f64) -> Matrix<f64> {
        Matrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap()
    }

    fn integ() -> MvtIntegrator<f64> {
        MvtIntegrator::new(QmcConfig::default()).unwrap()
    }

    #[test]
    fn independent_pair_cauchy_case() {
        let v = exponent_v_corr(&[1.0, 1.0], &pair_sigma(0.0), 1.0, &integ()).unwrap();
        let expect = 2.0 * (0.5 + 2f64.sqrt() / (2.0 * 2.0));
        assert!((v.probability - expect).abs() < 1e-12);
        assert!((v.probability - 1.707107).abs() < 1e-6);
    }

    #[test]
    fn co_located_pair_is_complete_dependence() {
        let v = exponent_v_corr(&[1.0, 1.0], &pair_sigma(1.0), 2.5, &integ()).unwrap();
        assert!((v.probability - 1.0).abs() < 1e-12);
        // unequal z: V = 1/min z
        let v = exponent_v_corr(&[2.0, 4.0], &pair_sigma(1.0), 2.5, &integ()).unwrap();
        assert!((v.probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_site_intensity_is_pareto() {
        let sigma = cholesky_pd(&Matrix::identity(1)).unwrap();
        for alpha in [1.0f64, 5.0] {
            for y in [0.5f64, 1.0, 7.0] {
                let l = log_intensity(&[y], &sigma, alpha).unwrap().exp();
                assert!((l - y.powi(-2)).abs() < 1e-13 * y.powi(-2));
            }
        }
    }

    #[test]
    fn intensity_rejects_zero() {
        let sigma = cholesky_pd(&pair_sigma(0.3)).unwrap();
        assert!(matches!(log_intensity(&[1.0, 0.0], &sigma, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn extremal_coeff_closed_forms() {
        assert!((extremal_coeff_rho(1.0f64, 3.0) - 1.0).abs() < 1e-15);
        assert!((extremal_coeff_rho(0.0f64, 1.0) - 1.7071067811865475).abs() < 1e-12);
        let corr = CorrelationModel::new(1.0, 1.0).unwrap();
        let sites = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.5, 0.0]]).unwrap();
        let model = EllipticalModel::new(sites, corr, 1.0).unwrap();
        let direct = extremal_coeff_rho((-0.5f64).exp(), 1.0);
        assert_eq!(extremal_coeff(&model).unwrap(), direct);
        assert_eq!(extremal_coeff_at(&corr, 1.0, 0.5), direct);
    }
}
