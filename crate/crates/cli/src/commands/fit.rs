use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use elliptical_pareto::exponent::extremal_coeff_at;
use elliptical_pareto::inference::{default_init, extract_exceedances, fit_model, standardize_margins, FitConfig, LikelihoodKind, MarginalFit};
use elliptical_pareto::numerics::QmcConfig;
use elliptical_pareto::ParamVector;

use super::{model_params, output_dir, site_margins};
use crate::config::{check_quantile, required_path, DEFAULT_QUANTILE};
use crate::error::{Classify, CliResult};
use crate::input::{read_data, read_sites};
use crate::output::{ensure_dir, full, full_opt, in_dir, write_csv, write_json};
use crate::Globals;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Site table: id,x,y[,elev].
    #[arg(long)]
    pub sites: Option<PathBuf>,
    /// Observations: date,site_id,value.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Marginal threshold probability, in (0.5, 1).
    #[arg(long)]
    pub quantile: Option<f64>,
    /// l1 (uncensored), l2 (censored) or pairwise.
    #[arg(long)]
    pub likelihood: Option<LikelihoodKind>,
    /// Starting point log_lambda,kappa,alpha.
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    /// Number of distances in the extremal coefficient curve.
    #[arg(long, default_value_t = 101)]
    pub curve_points: usize,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Contents of fit.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub likelihood: LikelihoodKind,
    pub threshold_quantile: f64,
    pub site_ids: Vec<String>,
    /// Standard-scale thresholds 1/(1 − q).
    pub thresholds: Vec<f64>,
    pub seed: u64,
    pub init: ParamVector,
    pub psi_hat: ParamVector,
    pub lambda: f64,
    /// Standard errors of (log λ, κ, α).
    pub se: Option<[f64; 3]>,
    /// Standard errors of (log λ, logit(κ/2), log α).
    pub se_transformed: Option<[f64; 3]>,
    pub cov: Option<[[f64; 3]; 3]>,
    pub nll: f64,
    pub aic: f64,
    pub n_exceed: usize,
    pub n_total: usize,
    pub n_evals: usize,
    pub hessian_pd: bool,
    pub at_boundary: bool,
}

impl FitOutput {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).config_err(format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).config_err(format!("{}: not a fit file", path.display()))
    }
}

pub fn run(args: &FitArgs, g: &Globals) -> CliResult<()> {
    let cfg = &g.config;
    let sites = read_sites(&required_path(args.sites.clone(), &cfg.sites_file, "sites")?)?;
    let obs = read_data(&required_path(args.data.clone(), &cfg.data_file, "data")?, &sites)?;
    let q = check_quantile(args.quantile.or(cfg.threshold_quantile).unwrap_or(DEFAULT_QUANTILE))?;
    let kind = args.likelihood.or(cfg.likelihood).unwrap_or(LikelihoodKind::L2);
    let coords = sites.coords();
    let init = match &args.init {
        Some(s) => model_params(Some(s), None)?,
        None => cfg.init.unwrap_or_else(|| default_init(&coords)),
    };
    let out = output_dir(&args.out, g);
    ensure_dir(&out)?;

    log::info!("{} days from {} to {}", obs.dates.len(), obs.dates[0], obs.dates[obs.dates.len() - 1]);
    let margins = site_margins(&obs, &sites, q)?;
    let x_star = standardize_margins(&obs.values, &margins)?;
    let u = vec![1.0 / (1.0 - q); sites.len()];
    let sample = extract_exceedances(&x_star, &u).model_err("selecting exceedances")?;
    log::info!("{} exceedances among {} complete days", sample.len(), sample.n_total());

    let fit_cfg = FitConfig { qmc: cfg.qmc.unwrap_or_else(|| QmcConfig::for_fitting(g.seed)), ..FitConfig::default() };
    let fit = fit_model(&sample, &coords, kind, &init, &fit_cfg).model_err(format!("{kind} fit"))?;
    if fit.at_boundary {
        log::warn!("estimate lies at the edge of the parameter box");
    }

    let result = FitOutput {
        likelihood: kind,
        threshold_quantile: q,
        site_ids: sites.ids().iter().map(|s| s.to_string()).collect(),
        thresholds: u,
        seed: g.seed,
        init,
        psi_hat: fit.psi_hat,
        lambda: fit.psi_hat.lambda(),
        se: fit.se(),
        se_transformed: fit.se_transformed(),
        cov: fit.cov,
        nll: fit.nll,
        aic: fit.aic,
        n_exceed: fit.n_exceed,
        n_total: fit.n_total,
        n_evals: fit.n_evals,
        hessian_pd: fit.hessian_pd,
        at_boundary: fit.at_boundary,
    };
    write_json(&in_dir(&out, "fit.json"), &result)?;
    write_margins(&out, sites.ids(), &margins)?;
    write_theta_curve(&out, &sites, &fit.psi_hat, args.curve_points)?;

    println!(
        "{kind}: log_lambda={:.6} kappa={:.6} alpha={:.6} nll={:.6} aic={:.6} ({} exceedances)",
        fit.psi_hat.log_lambda, fit.psi_hat.kappa, fit.psi_hat.alpha, fit.nll, fit.aic, fit.n_exceed
    );
    Ok(())
}

/// margins.csv for reading, margins.json with the full semiparametric fits
/// for later back-transformation.
fn write_margins(out: &Path, ids: Vec<&str>, margins: &[MarginalFit]) -> CliResult<()> {
    let rows = ids.iter().zip(margins).map(|(id, m)| {
        vec![
            id.to_string(),
            m.n.to_string(),
            full(m.quantile),
            full(m.threshold),
            full(m.gpd.scale),
            full(m.gpd.shape),
            full_opt(m.gpd.se_scale),
            full_opt(m.gpd.se_shape),
            m.gpd.n_exceed.to_string(),
            m.gpd.near_boundary.to_string(),
        ]
    });
    write_csv(
        &in_dir(out, "margins.csv"),
        &["site_id", "n", "quantile", "threshold", "scale", "shape", "se_scale", "se_shape", "n_exceed", "near_boundary"],
        rows,
    )?;
    let named: Vec<SiteMargin> = ids.iter().zip(margins).map(|(id, m)| SiteMargin { site_id: id.to_string(), fit: m.clone() }).collect();
    write_json(&in_dir(out, "margins.json"), &named)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiteMargin {
    pub site_id: String,
    pub fit: MarginalFit,
}

/// Model extremal coefficient θ(h) from 0 to the largest site distance.
fn write_theta_curve(out: &Path, sites: &crate::input::Sites, psi: &ParamVector, points: usize) -> CliResult<()> {
    let n = sites.len();
    let hmax = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| sites.distance(a, b)).fold(0.0, f64::max);
    let corr = psi.correlation()?;
    let points = points.max(2);
    let rows = (0..points).map(|i| {
        let h = hmax * i as f64 / (points - 1) as f64;
        vec![full(h), full(corr.rho(h)), full(extremal_coeff_at(&corr, psi.alpha, h))]
    });
    write_csv(&in_dir(out, "theta_curve.csv"), &["distance", "rho", "theta"], rows)
}
