//! Conditional simulation through the transformed t process, and the plain
//! multivariate t process used as a misspecified data source.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use super::spectral::SimBatch;
use crate::error::{Error, Result};
use crate::exponent::{ConditionalT, EllipticalModel};
use crate::numerics::{rng_stream, signed_power, Matrix, PdMatrix};

fn t_vector<R: Rng + ?Sized>(rng: &mut R, scale: &PdMatrix<f64>, location: &[f64], chi: &ChiSquared<f64>, dof: f64) -> Vec<f64> {
    let z: Vec<f64> = (0..scale.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let w = (dof / chi.sample(rng)).sqrt();
    scale.chol().mul_vec(&z).into_iter().zip(location).map(|(x, m)| m + w * x).collect()
}

/// Draws T_α(X) for X from a conditional t law; `clamp` sets negative
/// components to zero (the projection onto nonnegative functions).
pub fn sample_conditional(cond: &ConditionalT<f64>, n: usize, seed: u64, clamp: bool) -> Result<SimBatch> {
    let chi = ChiSquared::new(cond.dof).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let dim = cond.dim();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_stream(seed, i as u64);
            t_vector(&mut rng, &cond.scale, &cond.location, &chi, cond.dof)
                .into_iter()
                .map(|x| {
                    let y = signed_power(x, cond.alpha);
                    if clamp {
                        y.max(0.0)
                    } else {
                        y
                    }
                })
                .collect()
        })
        .collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(SimBatch {
        draws: Matrix::from_fn(n, dim, |i, j| flat[i * dim + j]),
        seed,
        points: 0,
        proposals: 0,
        accepted: 0,
    })
}

/// Conditional draws at the model's sites given standard-scale values at
/// `cond_sites`.
pub fn simulate_conditional(
    model: &EllipticalModel<f64>,
    cond_sites: &Matrix<f64>,
    cond_values: &[f64],
    n: usize,
    seed: u64,
    clamp: bool,
) -> Result<SimBatch> {
    let cond = ConditionalT::new(model, cond_sites, cond_values)?;
    sample_conditional(&cond, n, seed, clamp)
}

/// Draws of the multivariate t vector with α degrees of freedom and scale
/// Σ at the model's sites (a Gaussian vector divided by a scaled chi).
pub fn simulate_t_process(model: &EllipticalModel<f64>, n: usize, seed: u64) -> Result<Matrix<f64>> {
    let alpha = model.alpha();
    let chi = ChiSquared::new(alpha).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let dim = model.dim();
    let zero = vec![0.0; dim];
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_stream(seed, i as u64);
            t_vector(&mut rng, model.sigma(), &zero, &chi, alpha)
        })
        .collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(Matrix::from_fn(n, dim, |i, j| flat[i * dim + j]))
}
