use std::path::PathBuf;

use clap::Args;

use elliptical_pareto::exponent::extremal_coeff_at;
use elliptical_pareto::inference::standardize_margins;
use elliptical_pareto::study::{empirical_extremal_coeff, ExtCoefOptions};

use super::{model_params, site_margins};
use crate::config::{check_quantile, required_path, DEFAULT_QUANTILE};
use crate::error::{CliError, CliResult};
use crate::input::{read_data, read_sites};
use crate::output::{full, write_csv};
use crate::Globals;

#[derive(Debug, Args)]
pub struct ExtcoefArgs {
    #[arg(long)]
    pub sites: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub quantile: Option<f64>,
    /// Site pairs as a:b, comma separated (default: all pairs).
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Adds the fitted model's coefficient at each pair distance.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[arg(long, default_value = "extcoef.csv")]
    pub out: PathBuf,
}

pub fn run(args: &ExtcoefArgs, g: &Globals) -> CliResult<()> {
    let cfg = &g.config;
    let sites = read_sites(&required_path(args.sites.clone(), &cfg.sites_file, "sites")?)?;
    let obs = read_data(&required_path(args.data.clone(), &cfg.data_file, "data")?, &sites)?;
    let q = check_quantile(args.quantile.or(cfg.threshold_quantile).unwrap_or(DEFAULT_QUANTILE))?;
    let model = match &args.fit {
        Some(path) => Some(model_params(None, Some(path))?),
        None => None,
    };
    let pairs: Vec<(usize, usize)> = match &args.pairs {
        Some(spec) => spec
            .split(',')
            .map(|p| {
                let (a, b) = p.split_once(':').ok_or_else(|| CliError::config(format!("expected a:b, got '{p}'")))?;
                let idx = sites.positions(&[a.trim().to_string(), b.trim().to_string()])?;
                if idx[0] == idx[1] {
                    return Err(CliError::config(format!("pair '{p}' repeats a site")));
                }
                Ok((idx[0], idx[1]))
            })
            .collect::<CliResult<_>>()?,
        None => (0..sites.len()).flat_map(|a| (a + 1..sites.len()).map(move |b| (a, b))).collect(),
    };
    if pairs.is_empty() {
        return Err(CliError::config("need at least two sites"));
    }

    let margins = site_margins(&obs, &sites, q)?;
    let x = standardize_margins(&obs.values, &margins)?;
    let u = 1.0 / (1.0 - q);
    let mut rows = Vec::new();
    let mut ok = 0;
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let opts = ExtCoefOptions { bootstrap: args.bootstrap, level: args.level, seed: g.seed.wrapping_add(k as u64) };
        let col = |j: usize| (0..x.rows()).map(|i| x[(i, j)]).collect::<Vec<f64>>();
        let h = sites.distance(a, b);
        let model_theta = match &model {
            Some(psi) => full(extremal_coeff_at(&psi.correlation()?, psi.alpha, h)),
            None => "NA".into(),
        };
        let mut row = vec![sites.sites[a].id.clone(), sites.sites[b].id.clone(), full(h)];
        match empirical_extremal_coeff(&col(a), &col(b), u, &opts) {
            Ok(e) => {
                ok += 1;
                row.extend([full(e.theta), full(e.ci[0]), full(e.ci[1]), e.n_exceed.to_string(), e.n_total.to_string()]);
            }
            Err(e) => {
                log::warn!("pair {}:{}: {e}", sites.sites[a].id, sites.sites[b].id);
                row.extend(["NA".into(), "NA".into(), "NA".into(), "NA".into(), "NA".into()]);
            }
        }
        row.push(model_theta);
        rows.push(row);
    }
    write_csv(&args.out, &["site_a", "site_b", "distance", "theta", "ci_lower", "ci_upper", "n_exceed", "n_total", "theta_model"], rows)?;
    if ok == 0 {
        return Err(CliError::Model(anyhow::anyhow!("no pair had enough joint exceedances for a fit")));
    }
    println!("estimated {ok} of {} pairs, written to {}", pairs.len(), args.out.display());
    Ok(())
}
