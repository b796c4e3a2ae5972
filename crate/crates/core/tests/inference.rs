mod common;

use common::{integrate_half_line, ks_one_sample};
use elliptical_pareto::exponent::{exponent_v, exponent_v_corr, CorrelationModel, EllipticalModel, ParamVector};
use elliptical_pareto::inference::*;
use elliptical_pareto::numerics::{rng_stream, Matrix, MvtIntegrator, QmcConfig};
use elliptical_pareto::simulate::{simulate_pareto_ar, RiskFunctional, SimOptions};
use elliptical_pareto::study::{cell_model, exceedance_probability, pareto_exceedances, site_grid};
use elliptical_pareto::Error;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

fn sites(coords: &[(f64, f64)]) -> Matrix<f64> {
    Matrix::from_fn(coords.len(), 2, |i, j| if j == 0 { coords[i].0 } else { coords[i].1 })
}

fn exp1(rng: &mut impl Rng) -> f64 {
    Exp1.sample(rng)
}

fn qmc() -> QmcConfig {
    QmcConfig::for_fitting(17)
}

fn triangle() -> Matrix<f64> {
    sites(&[(0.0, 0.0), (0.6, 0.1), (0.2, 0.7)])
}

/// Exceedances from the model itself: N_u ~ Bin(n, V(u)) exact ℓ-Pareto draws.
fn model_sample(s: &Matrix<f64>, psi: &ParamVector<f64>, u: f64, n: usize, seed: u64) -> ExceedanceSample {
    let model = cell_model(s, psi).unwrap();
    let u = vec![u; s.rows()];
    let v0 = exceedance_probability(&model, &u, &QmcConfig::default()).unwrap();
    pareto_exceedances(&model, &u, n, v0, seed).unwrap()
}

#[test]
fn gpd_recovers_exponential_tail() {
    let mut rng = rng_stream(1, 0);
    let data: Vec<f64> = (0..10_000).map(|_| 5.0 + exp1(&mut rng)).collect();
    let fit = fit_gpd_site(&data, 5.0).unwrap();
    assert!(fit.shape.abs() < 0.1, "{fit:?}");
    assert!((fit.scale - 1.0).abs() < 0.05, "{fit:?}");
    assert!(!fit.near_boundary);
    assert!(fit.se_shape.unwrap() < 0.05);
}

#[test]
fn gpd_flags_pareto_tail_at_the_shape_bound() {
    let mut rng = rng_stream(2, 0);
    let data: Vec<f64> = (0..20_000).map(|_| 1.0 / (1.0 - rng.random::<f64>())).collect();
    let fit = fit_gpd_site(&data, 2.0).unwrap();
    assert!(fit.shape > 0.9, "{fit:?}");
    assert!(fit.near_boundary);
}

#[test]
fn gpd_rejects_constant_data() {
    let data = vec![3.0; 500];
    assert!(matches!(fit_gpd_site(&data, 3.0), Err(Error::TooFewExceedances { .. })));
    assert!(MarginalFit::fit(&data, 0.95).is_err());
}

#[test]
fn margins_map_threshold_to_twenty_and_are_monotone() {
    let mut rng = rng_stream(3, 0);
    let data: Vec<f64> = (0..4000).map(|_| rng.random::<f64>().ln_1p() * 10.0 + exp1(&mut rng) * 2.0).collect();
    let fit = MarginalFit::fit(&data, 0.95).unwrap();
    assert!((fit.to_pareto(fit.threshold) - 20.0).abs() < 1e-12);
    let above = data.iter().filter(|&&x| x > fit.threshold).count() as f64 / data.len() as f64;
    assert!((above - 0.05).abs() <= 1.0 / data.len() as f64);

    let mut sorted = data.clone();
    sorted.sort_by(f64::total_cmp);
    let mapped: Vec<f64> = sorted.iter().map(|&x| fit.to_pareto(x)).collect();
    assert!(mapped.windows(2).all(|w| w[0] <= w[1]));
    assert!(mapped.iter().all(|&x| x >= 1.0));
    for &x in &[fit.threshold * 0.5, fit.threshold, fit.threshold * 1.7] {
        assert!((fit.from_pareto(fit.to_pareto(x)) - x).abs() <= 1e-9 * x.abs().max(1.0) || x < fit.threshold);
    }
}

#[test]
fn standardized_gpd_tail_is_pareto() {
    let mut rng = rng_stream(4, 0);
    // exact GPD(σ=2, ξ=0.2) excesses over 10 for 5% of the data
    let n = 40_000;
    let data: Vec<f64> = (0..n)
        .map(|_| {
            let v: f64 = rng.random();
            if v < 0.95 {
                10.0 * v / 0.95
            } else {
                let p = (1.0 - v) / 0.05;
                10.0 + 2.0 * (p.powf(-0.2) - 1.0) / 0.2
            }
        })
        .collect();
    let raw = Matrix::from_fn(n, 1, |i, _| data[i]);
    let fits = fit_margins(&raw, 0.95).unwrap();
    let x = standardize_margins(&raw, &fits).unwrap();
    let tail: Vec<f64> = (0..n).map(|i| x[(i, 0)]).filter(|&v| v > 20.0).map(|v| v / 20.0).collect();
    assert!(tail.len() > 1500);
    let p = ks_one_sample(&tail, |y| 1.0 - 1.0 / y);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn standardize_propagates_missing_values() {
    let mut rng = rng_stream(5, 0);
    let mut col: Vec<f64> = (0..1000).map(|_| exp1(&mut rng)).collect();
    col[3] = f64::NAN;
    let raw = Matrix::from_fn(1000, 1, |i, _| col[i]);
    let fits = fit_margins(&raw, 0.9).unwrap();
    let x = standardize_margins(&raw, &fits).unwrap();
    assert!(x[(3, 0)].is_nan());
    assert_eq!(fits[0].n, 999);
    assert!(standardize_margins(&raw, &[]).is_err());
}

#[test]
fn radial_exceedance_fraction_is_one_over_t() {
    let s = triangle();
    let model = EllipticalModel::new(s, CorrelationModel::new(0.5, 1.0).unwrap(), 2.0).unwrap();
    let ell = RiskFunctional::weighted_max(vec![1.0; 3]).unwrap();
    let n = 20_000;
    let draws = simulate_pareto_ar(&model, &ell, n, 6, &SimOptions::default()).unwrap().draws;
    for t in [1.0, 2.0, 5.0] {
        let kept = match extract_exceedances(&draws, &[t; 3]) {
            Ok(s) => s.len(),
            Err(_) => 0,
        };
        let p = 1.0 / t;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((kept as f64 / n as f64 - p).abs() <= 4.0 * se + 1e-12, "t = {t}: {kept}");
    }
}

#[test]
fn empty_sample_gives_binomial_term_only() {
    let s = triangle();
    let psi = ParamVector::new(0.0, 1.0, 2.0).unwrap();
    let sample = ExceedanceSample::empty(300, vec![20.0; 3]);
    let nll = nll_uncensored(&sample, &s, &psi, &qmc()).unwrap();
    let integ = MvtIntegrator::new(qmc()).unwrap();
    let model = EllipticalModel::from_params(s.clone(), &psi).unwrap();
    let v = exponent_v_corr(&[20.0; 3], model.sigma().entries(), 2.0, &integ).unwrap().probability;
    assert!((nll + 300.0 * (1.0 - v).ln()).abs() < 1e-9 * nll.abs());
}

#[test]
fn one_site_reduces_to_pareto_likelihood() {
    let s = sites(&[(0.0, 0.0)]);
    let x = [25.0, 40.0, 21.0, 300.0];
    let sample = ExceedanceSample::new(Matrix::from_fn(4, 1, |i, _| x[i]), 50, vec![20.0]).unwrap();
    let psi = ParamVector::new(0.0, 1.0, 3.0).unwrap();
    let expect = -46.0 * (1.0 - 1.0 / 20.0f64).ln() + x.iter().map(|v| 2.0 * v.ln()).sum::<f64>();
    for kind in [LikelihoodKind::L1, LikelihoodKind::L2] {
        let nll = Likelihood::new(&sample, &s, kind, &qmc()).unwrap().nll(&psi).unwrap();
        assert!((nll - expect).abs() < 1e-10 * expect.abs(), "{kind}: {nll} vs {expect}");
    }
}

#[test]
fn likelihoods_ignore_row_order() {
    let s = triangle();
    let psi = ParamVector::new(-0.5, 1.2, 2.0).unwrap();
    let sample = model_sample(&s, &psi, 10.0, 400, 7);
    let rows = sample.x_star().to_rows();
    let rev: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
    let reversed = ExceedanceSample::new(Matrix::from_rows(&rev).unwrap(), sample.n_total(), sample.thresholds().to_vec()).unwrap();
    for kind in LikelihoodKind::ALL {
        let a = Likelihood::new(&sample, &s, kind, &qmc()).unwrap().nll(&psi).unwrap();
        let b = Likelihood::new(&reversed, &s, kind, &qmc()).unwrap().nll(&psi).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs(), "{kind}");
    }
}

#[test]
fn censoring_without_censored_components_changes_nothing() {
    let s = triangle();
    let psi = ParamVector::new(-0.2, 1.0, 1.5).unwrap();
    let x = Matrix::from_rows(&[vec![25.0, 30.0, 21.0], vec![50.0, 22.0, 80.0]]).unwrap();
    let sample = ExceedanceSample::new(x, 100, vec![20.0; 3]).unwrap();
    let a = nll_censored(&sample, &s, &psi, &qmc()).unwrap();
    let b = nll_uncensored(&sample, &s, &psi, &qmc()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn one_exceeding_component_matches_derivative_of_v() {
    let s = sites(&[(0.0, 0.0), (0.4, 0.0)]);
    let psi = ParamVector::new(0.0, 1.0, 2.5).unwrap();
    let (x1, u) = (35.0, 20.0);
    let sample = ExceedanceSample::new(Matrix::from_rows(&[vec![x1, 4.0]]).unwrap(), 1, vec![u, u]).unwrap();
    let nll = nll_censored(&sample, &s, &psi, &qmc()).unwrap();
    let model = EllipticalModel::from_params(s, &psi).unwrap();
    let cfg = QmcConfig::default();
    let h = 1e-3 * x1;
    let d = (exponent_v(&[x1 + h, u], &model, &cfg).unwrap() - exponent_v(&[x1 - h, u], &model, &cfg).unwrap()) / (2.0 * h);
    assert!(((-nll).exp() / -d - 1.0).abs() < 1e-5, "{} vs {}", (-nll).exp(), -d);
}

#[test]
fn censored_density_integrates_to_v() {
    // mass of the censored exceedance density over {ℓ ≥ 1} in two dimensions
    let s = sites(&[(0.0, 0.0), (0.3, 0.0)]);
    let psi = ParamVector::new(0.0, 1.0, 2.0).unwrap();
    let u = [5.0, 8.0];
    let term = |x: [f64; 2], set: Vec<usize>| -> f64 {
        let sample = ExceedanceSample::new(Matrix::from_rows(&[x.to_vec()]).unwrap(), 1, u.to_vec()).unwrap();
        assert_eq!(sample.exceed_sets()[0], set);
        (-nll_censored(&sample, &s, &psi, &QmcConfig::default()).unwrap()).exp()
    };
    let tol = 1e-9;
    let edge0 = integrate_half_line(&mut |t| term([u[0] + t, 1.0], vec![0]), tol);
    let edge1 = integrate_half_line(&mut |t| term([1.0, u[1] + t], vec![1]), tol);
    let inner = integrate_half_line(
        &mut |t| integrate_half_line(&mut |r| term([u[0] + t, u[1] + r], vec![0, 1]), tol * 1e-2),
        tol,
    );
    let model = EllipticalModel::from_params(s.clone(), &psi).unwrap();
    let v = exponent_v(&u, &model, &QmcConfig::default()).unwrap();
    assert!(((edge0 + edge1 + inner) / v - 1.0).abs() < 1e-4, "{} vs {v}", edge0 + edge1 + inner);
}

#[test]
fn binomial_and_poisson_forms_agree() {
    let s = sites(&[(0.0, 0.0), (0.5, 0.0)]);
    let psi = ParamVector::new(0.0, 1.0, 2.0).unwrap();
    let model = EllipticalModel::from_params(s.clone(), &psi).unwrap();
    let theta = exponent_v(&[1.0, 1.0], &model, &QmcConfig::default()).unwrap();
    // V(u) = θ/u = 0.05
    let u = theta / 0.05;
    let sample = model_sample(&s, &psi, u, 10_000, 8);
    let n = sample.n_total() as f64;
    let nu = sample.len() as f64;
    let binomial = nll_censored(&sample, &s, &psi, &qmc()).unwrap();
    let v: f64 = 0.05;
    let poisson = binomial + (n - nu) * (1.0 - v).ln() + n * v;
    assert!(((binomial - poisson) / binomial).abs() < 2e-3, "{binomial} vs {poisson}");
}

#[test]
fn pairwise_in_two_dimensions_is_censored() {
    let s = sites(&[(0.0, 0.0), (0.5, 0.2)]);
    let psi = ParamVector::new(0.1, 0.8, 3.0).unwrap();
    let sample = model_sample(&s, &psi, 10.0, 2000, 9);
    let a = nll_pairwise(&sample, &s, &psi, &qmc()).unwrap();
    let b = nll_censored(&sample, &s, &psi, &qmc()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn likelihoods_are_invariant_to_site_relabeling() {
    let s = triangle();
    let psi = ParamVector::new(-0.3, 1.3, 2.0).unwrap();
    let sample = model_sample(&s, &psi, 10.0, 1000, 10);
    let perm = [2, 0, 1];
    let s2 = Matrix::from_fn(3, 2, |i, j| s[(perm[i], j)]);
    let x2 = Matrix::from_fn(sample.len(), 3, |k, j| sample.x_star()[(k, perm[j])]);
    let sample2 = ExceedanceSample::new(x2, sample.n_total(), vec![10.0; 3]).unwrap();
    // the integrator is run with the same variable order, so agreement is
    // up to quasi-Monte Carlo error
    let cfg = QmcConfig::default();
    for kind in LikelihoodKind::ALL {
        let a = Likelihood::new(&sample, &s, kind, &cfg).unwrap().nll(&psi).unwrap();
        let b = Likelihood::new(&sample2, &s2, kind, &cfg).unwrap().nll(&psi).unwrap();
        let tol = if kind == LikelihoodKind::L2 { 1e-4 } else { 1e-9 };
        assert!((a - b).abs() < tol * a.abs(), "{kind}: {a} vs {b}");
    }
}

#[test]
fn threshold_too_low_is_reported() {
    let s = triangle();
    let psi = ParamVector::new(0.0, 1.0, 2.0).unwrap();
    let x = Matrix::from_rows(&[vec![1.5, 1.2, 1.0]]).unwrap();
    let sample = ExceedanceSample::new(x, 10, vec![1.0; 3]).unwrap();
    assert!(matches!(nll_censored(&sample, &s, &psi, &qmc()), Err(Error::ThresholdTooLow(_))));
}

#[test]
fn fit_descends_and_reports_consistent_diagnostics() {
    let s = site_grid(2);
    let psi0 = ParamVector::new(0.0, 1.0, 2.0).unwrap();
    let sample = model_sample(&s, &psi0, 20.0, 3000, 11);
    let init = default_init(&s);
    for kind in LikelihoodKind::ALL {
        let fit = fit_model(&sample, &s, kind, &init, &FitConfig::default()).unwrap();
        let lik = Likelihood::new(&sample, &s, kind, &FitConfig::default().qmc).unwrap();
        assert!(fit.nll <= lik.nll(&init).unwrap());
        assert!((fit.aic - (2.0 * fit.nll + 6.0)).abs() < 1e-9);
        let cov = fit.cov.unwrap();
        for i in 0..3 {
            assert!(cov[i][i] >= 0.0);
            for j in 0..3 {
                assert!((cov[i][j] - cov[j][i]).abs() <= 1e-12 * (cov[i][i] * cov[j][j]).sqrt());
            }
        }
        assert!(fit.hessian_pd);
        let json = serde_json::to_string(&fit).unwrap();
        assert_eq!(serde_json::from_str::<FitResult>(&json).unwrap(), fit);
    }
}

#[test]
fn fit_rejects_invalid_start() {
    let s = site_grid(2);
    let psi0 = ParamVector::new(0.0, 1.0, 2.0).unwrap();
    let sample = model_sample(&s, &psi0, 20.0, 500, 12);
    let bad = ParamVector { log_lambda: 0.0, kappa: 3.0, alpha: 2.0 };
    assert!(fit_model(&sample, &s, LikelihoodKind::L2, &bad, &FitConfig::default()).is_err());
}

#[test]
fn standard_errors_shrink_like_root_n() {
    let s = site_grid(2);
    let psi0 = ParamVector::new(0.0, 1.0, 2.0).unwrap();
    let mean_se = |n: usize| -> [f64; 3] {
        let mut acc = [0.0; 3];
        let reps = 6;
        for r in 0..reps {
            let sample = model_sample(&s, &psi0, 20.0, n, 100 + r);
            let se = fit_model(&sample, &s, LikelihoodKind::L1, &psi0, &FitConfig::default()).unwrap().se_transformed().unwrap();
            for j in 0..3 {
                acc[j] += se[j] / reps as f64;
            }
        }
        acc
    };
    let small = mean_se(4000);
    let large = mean_se(8000);
    for j in 0..3 {
        let ratio = small[j] / large[j];
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.15, "coordinate {j}: ratio {ratio}");
    }
}

#[test]
fn self_consistency_of_reported_standard_errors() {
    let s = site_grid(2);
    let psi0 = ParamVector::new(0.0, 1.0, 2.0).unwrap();
    let model = cell_model(&s, &psi0).unwrap();
    let u = vec![20.0; 4];
    let v0 = exceedance_probability(&model, &u, &QmcConfig::default()).unwrap();
    let n = (400.0 / v0).round() as usize;
    let t0 = to_transformed(&psi0);
    let mut covered = 0;
    let reps = 50;
    for r in 0..reps {
        let sample = pareto_exceedances(&model, &u, n, v0, 500 + r).unwrap();
        let fit = fit_model(&sample, &s, LikelihoodKind::L1, &psi0, &FitConfig::default()).unwrap();
        let se = fit.se_transformed().unwrap();
        if (0..3).all(|j| (fit.transformed[j] - t0[j]).abs() <= 3.0 * se[j]) {
            covered += 1;
        }
    }
    assert!(covered as f64 >= 0.9 * reps as f64, "{covered}/{reps}");
}
