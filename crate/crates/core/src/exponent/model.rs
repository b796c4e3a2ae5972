//! Stable correlation family and the elliptical dependence model built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cholesky_pd, Matrix, PdMatrix};
use crate::scalar::{c, Scalar};

/// Stable correlation function ϱ(h) = exp{−(‖h‖/λ)^κ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel<T> {
    lambda: T,
    kappa: T,
}

impl<T: Scalar> CorrelationModel<T> {
    pub fn new(lambda: T, kappa: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("range lambda = {lambda} must be positive")));
        }
        if !(kappa > T::zero() && kappa <= c(2.0)) {
            return Err(Error::InvalidParameter(format!("smoothness kappa = {kappa} outside (0, 2]")));
        }
        Ok(Self { lambda, kappa })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    /// Correlation at separation distance `h ≥ 0`.
    pub fn rho(&self, h: T) -> T {
        if h <= T::zero() {
            return T::one();
        }
        (-(h / self.lambda).powf(self.kappa)).exp()
    }
}

/// Dependence parameters ψ = (log λ, κ, α).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamVector<T> {
    pub log_lambda: T,
    pub kappa: T,
    pub alpha: T,
}

impl<T: Scalar> ParamVector<T> {
    pub fn new(log_lambda: T, kappa: T, alpha: T) -> Result<Self> {
        let p = Self { log_lambda, kappa, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.log_lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("log_lambda = {}", self.log_lambda)));
        }
        if !(self.kappa > T::zero() && self.kappa <= c(2.0)) {
            return Err(Error::InvalidParameter(format!("kappa = {} outside (0, 2]", self.kappa)));
        }
        if !(self.alpha > T::zero()) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {} must be positive", self.alpha)));
        }
        Ok(())
    }

    pub fn lambda(&self) -> T {
        self.log_lambda.exp()
    }

    pub fn correlation(&self) -> Result<CorrelationModel<T>> {
        CorrelationModel::new(self.lambda(), self.kappa)
    }

    pub fn to_array(&self) -> [T; 3] {
        [self.log_lambda, self.kappa, self.alpha]
    }

    pub fn from_array(a: [T; 3]) -> Result<Self> {
        Self::new(a[0], a[1], a[2])
    }
}

pub(crate) fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

/// Correlation matrix Σ = {ϱ(s_i, s_j)} for sites given as matrix rows.
pub fn corr_matrix<T: Scalar>(sites: &Matrix<T>, corr: &CorrelationModel<T>) -> Result<PdMatrix<T>> {
    cholesky_pd(&corr_entries(sites, corr))
}

pub(crate) fn corr_entries<T: Scalar>(sites: &Matrix<T>, corr: &CorrelationModel<T>) -> Matrix<T> {
    let n = sites.rows();
    let mut m = Matrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            let r = corr.rho(distance(sites.row(i), sites.row(j)));
            m[(i, j)] = r;
            m[(j, i)] = r;
        }
    }
    m
}

/// Extremal-t dependence model on a fixed set of sites. Immutable once
/// built; Σ and its Cholesky root are computed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticalModel<T> {
    corr: CorrelationModel<T>,
    alpha: T,
    sites: Matrix<T>,
    sigma: PdMatrix<T>,
}

impl<T: Scalar> EllipticalModel<T> {
    pub fn new(sites: Matrix<T>, corr: CorrelationModel<T>, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
        }
        if sites.rows() == 0 {
            return Err(Error::DimensionMismatch("no sites".into()));
        }
        let sigma = corr_matrix(&sites, &corr)?;
        Ok(Self { corr, alpha, sites, sigma })
    }

    pub fn from_params(sites: Matrix<T>, psi: &ParamVector<T>) -> Result<Self> {
        psi.validate()?;
        Self::new(sites, psi.correlation()?, psi.alpha)
    }

    pub fn dim(&self) -> usize {
        self.sites.rows()
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn corr(&self) -> &CorrelationModel<T> {
        &self.corr
    }

    pub fn sites(&self) -> &Matrix<T> {
        &self.sites
    }

    pub fn sigma(&self) -> &PdMatrix<T> {
        &self.sigma
    }

    pub fn params(&self) -> ParamVector<T> {
        ParamVector { log_lambda: self.corr.lambda().ln(), kappa: self.corr.kappa(), alpha: self.alpha }
    }

    /// Model restricted to a subset of sites, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let cols: Vec<usize> = (0..self.sites.cols()).collect();
        Self::new(self.sites.select(idx, &cols), self.corr, self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Matrix<f64> {
        Matrix::from_fn(xs.len(), 2, |i, j| if j == 0 { xs[i] } else { 0.0 })
    }

    #[test]
    fn one_site_is_unit() {
        let corr = CorrelationModel::new(0.7, 1.3).unwrap();
        let s = corr_matrix(&line(&[0.2]), &corr).unwrap();
        assert_eq!(s.entries()[(0, 0)], 1.0);
    }

    #[test]
    fn distance_lambda_gives_inverse_e() {
        for kappa in [0.3, 1.0, 2.0] {
            let corr = CorrelationModel::new(0.8, kappa).unwrap();
            let s = corr_matrix(&line(&[0.0, 0.8]), &corr).unwrap();
            assert!((s.entries()[(0, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_case_taylor_bound() {
        let corr = CorrelationModel::new(1.5, 2.0).unwrap();
        for h in [1e-3, 1e-2, 0.1, 0.3] {
            assert!(corr.rho(h) >= 1.0 - (h / 1.5f64).powi(2));
        }
    }

    #[test]
    fn duplicated_sites_rejected() {
        let corr = CorrelationModel::new(1.0, 1.0).unwrap();
        let err = corr_matrix(&line(&[0.0, 0.5, 0.5]), &corr).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn parameter_validation() {
        assert!(CorrelationModel::new(0.0, 1.0).is_err());
        assert!(CorrelationModel::new(1.0, 2.5).is_err());
        assert!(ParamVector::new(0.0, 1.0, -1.0).is_err());
        assert!(ParamVector::new(f64::NAN, 1.0, 1.0).is_err());
        let p = ParamVector::new(0.3, 1.0, 2.0).unwrap();
        assert_eq!(ParamVector::from_array(p.to_array()).unwrap(), p);
    }

    #[test]
    fn subset_keeps_order() {
        let corr = CorrelationModel::new(1.0, 1.0).unwrap();
        let m = EllipticalModel::new(line(&[0.0, 0.4, 1.0]), corr, 2.0).unwrap();
        let sub = m.subset(&[2, 0]).unwrap();
        assert_eq!(sub.sigma().entries()[(0, 1)], m.sigma().entries()[(2, 0)]);
    }
}
