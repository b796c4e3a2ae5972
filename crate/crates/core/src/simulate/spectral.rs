//! Exact samplers built on the spectral representation
//! P_i = b·(A U_i)₊^α / Q_i of the extremal-t exponent measure.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::risk::RiskFunctional;
use crate::error::{Error, Result};
use crate::exponent::EllipticalModel;
use crate::numerics::{ln_gamma, rng_stream, Matrix};

/// Rounds of the Poisson-points sampler evaluated per parallel batch.
const ROUND_BATCH: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Largest number of Poisson points per draw (or per round).
    pub iteration_cap: u64,
    /// Largest number of acceptance-rejection proposals per draw.
    pub proposal_cap: u64,
    /// Threshold u₀ for the Poisson-points ℓ-Pareto sampler.
    pub u0: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { iteration_cap: 10_000_000, proposal_cap: 10_000_000, u0: 1.0 }
    }
}

/// Draws together with bookkeeping about how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SimBatch {
    pub draws: Matrix<f64>,
    pub seed: u64,
    /// Poisson points generated.
    pub points: u64,
    /// Acceptance-rejection proposals and acceptances.
    pub proposals: u64,
    pub accepted: u64,
}

impl SimBatch {
    pub fn len(&self) -> usize {
        self.draws.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.rows() == 0
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.proposals > 0).then(|| self.accepted as f64 / self.proposals as f64)
    }

    fn from_rows(rows: Vec<Vec<f64>>, dim: usize, seed: u64) -> Self {
        let n = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let draws = Matrix::from_fn(n, dim, |i, j| flat[i * dim + j]);
        Self { draws, seed, points: 0, proposals: 0, accepted: 0 }
    }
}

/// b = {E(U₁)₊^α}⁻¹ = 2π^{1/2} Γ{(D+α)/2} / [Γ{(α+1)/2} Γ(D/2)] for U
/// uniform on the unit sphere of ℝ^D.
pub fn bound_b(dim: usize, alpha: f64) -> f64 {
    let d = dim as f64;
    (std::f64::consts::LN_2 + 0.5 * std::f64::consts::PI.ln() + ln_gamma(0.5 * (d + alpha))
        - ln_gamma(0.5 * (alpha + 1.0))
        - ln_gamma(0.5 * d))
        .exp()
}

/// Uniform point on the unit sphere of ℝ^dim.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let mut u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            u.iter_mut().for_each(|x| *x /= norm);
            return u;
        }
    }
}

/// Angular part (A U)₊^α; every component lies in [0, 1].
pub(crate) fn spectral_vector<R: Rng + ?Sized>(rng: &mut R, chol: &Matrix<f64>, alpha: f64) -> Vec<f64> {
    let u = sphere_point(rng, chol.cols());
    chol.mul_vec(&u).into_iter().map(|x| if x > 0.0 { x.powf(alpha) } else { 0.0 }).collect()
}

/// Exact draws of the extremal-t max-stable vector with unit Fréchet
/// margins. Draw `i` uses random stream `(seed, i)`.
pub fn simulate_extremal_t(model: &EllipticalModel<f64>, n: usize, seed: u64, opts: &SimOptions) -> Result<SimBatch> {
    let dim = model.dim();
    let alpha = model.alpha();
    let b = bound_b(dim, alpha);
    let chol = model.sigma().chol();
    let results: Vec<Result<(Vec<f64>, u64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_stream(seed, i as u64);
            let mut z = vec![0.0; dim];
            let mut q = 0.0;
            let mut count = 0u64;
            loop {
                q += rng.sample::<f64, _>(Exp1);
                let zmin = z.iter().copied().fold(f64::INFINITY, f64::min);
                // every later point satisfies P ≤ b/Q componentwise
                if b / q <= zmin {
                    break;
                }
                count += 1;
                if count > opts.iteration_cap {
                    return Err(Error::IterationCap { cap: opts.iteration_cap });
                }
                let w = spectral_vector(&mut rng, chol, alpha);
                for (zj, wj) in z.iter_mut().zip(&w) {
                    *zj = zj.max(b * wj / q);
                }
            }
            Ok((z, count))
        })
        .collect();
    let mut rows = Vec::with_capacity(n);
    let mut points = 0;
    for r in results {
        let (z, c) = r?;
        rows.push(z);
        points += c;
    }
    let mut batch = SimBatch::from_rows(rows, dim, seed);
    batch.points = points;
    Ok(batch)
}

fn check_dims(model: &EllipticalModel<f64>, ell: &RiskFunctional) -> Result<()> {
    if model.dim() != ell.dim() {
        return Err(Error::DimensionMismatch(format!("model has {} sites, risk functional {}", model.dim(), ell.dim())));
    }
    Ok(())
}

/// Standard ℓ-Pareto draws from the Poisson points with ℓ(P) ≥ u₀. Round
/// `r` uses stream `(seed, r)` and generates every point with
/// Q ≤ b·c_ℓ/u₀, which captures all points that can qualify.
pub fn simulate_pareto_poisson(
    model: &EllipticalModel<f64>,
    ell: &RiskFunctional,
    n: usize,
    seed: u64,
    opts: &SimOptions,
) -> Result<SimBatch> {
    check_dims(model, ell)?;
    if !(opts.u0 > 0.0) {
        return Err(Error::InvalidParameter(format!("u0 = {} must be positive", opts.u0)));
    }
    let dim = model.dim();
    let alpha = model.alpha();
    let b = bound_b(dim, alpha);
    let chol = model.sigma().chol();
    let q_max = b * ell.bound_coeff() / opts.u0;
    if q_max > opts.iteration_cap as f64 {
        return Err(Error::IterationCap { cap: opts.iteration_cap });
    }
    let round = |r: u64| -> (Vec<Vec<f64>>, u64) {
        let mut rng = rng_stream(seed, r);
        let mut kept = Vec::new();
        let mut q = 0.0;
        let mut count = 0;
        loop {
            q += rng.sample::<f64, _>(Exp1);
            if q > q_max {
                break;
            }
            count += 1;
            let p: Vec<f64> = spectral_vector(&mut rng, chol, alpha).into_iter().map(|w| b * w / q).collect();
            if ell.eval(&p) >= opts.u0 {
                kept.push(p.into_iter().map(|x| x / opts.u0).collect());
            }
        }
        // points arrive in decreasing radial order; shuffle before truncation
        kept.shuffle(&mut rng);
        (kept, count)
    };
    let mut rows = Vec::with_capacity(n);
    let mut points = 0;
    let mut start = 0u64;
    let mut empty_rounds = 0u64;
    while rows.len() < n {
        let batch: Vec<(Vec<Vec<f64>>, u64)> = (start..start + ROUND_BATCH).into_par_iter().map(round).collect();
        for (kept, c) in batch {
            points += c;
            if kept.is_empty() {
                empty_rounds += 1;
            }
            rows.extend(kept);
        }
        start += ROUND_BATCH;
        if rows.is_empty() && empty_rounds >= 100_000 {
            return Err(Error::IterationCap { cap: points });
        }
    }
    rows.truncate(n);
    let mut out = SimBatch::from_rows(rows, dim, seed);
    out.points = points;
    Ok(out)
}

/// Standard ℓ-Pareto draws by acceptance-rejection: propose R·(A U)₊^α
/// with R standard Pareto, accept when ℓ ≥ u₀ = c_ℓ and return the
/// proposal divided by u₀. Draw `i` uses stream `(seed, i)`.
pub fn simulate_pareto_ar(model: &EllipticalModel<f64>, ell: &RiskFunctional, n: usize, seed: u64, opts: &SimOptions) -> Result<SimBatch> {
    check_dims(model, ell)?;
    let dim = model.dim();
    let alpha = model.alpha();
    let chol = model.sigma().chol();
    // (A U)₊^α ≤ 1 componentwise, so ℓ(v) ≥ c_ℓ forces R ≥ 1
    let u0 = ell.bound_coeff();
    let results: Vec<Result<(Vec<f64>, u64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_stream(seed, i as u64);
            for tries in 1..=opts.proposal_cap {
                let r = 1.0 / (1.0 - rng.random::<f64>());
                let w = spectral_vector(&mut rng, chol, alpha);
                let v: Vec<f64> = w.into_iter().map(|x| r * x).collect();
                if ell.eval(&v) >= u0 {
                    return Ok((v.into_iter().map(|x| x / u0).collect(), tries));
                }
            }
            Err(Error::RejectionCap { rate: 1.0 / opts.proposal_cap as f64, proposals: opts.proposal_cap })
        })
        .collect();
    let mut rows = Vec::with_capacity(n);
    let mut proposals = 0;
    for r in results {
        let (v, tries) = r?;
        rows.push(v);
        proposals += tries;
    }
    let mut out = SimBatch::from_rows(rows, dim, seed);
    out.proposals = proposals;
    out.accepted = n as u64;
    Ok(out)
}
