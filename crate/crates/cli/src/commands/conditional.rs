use std::path::PathBuf;

use clap::Args;

use elliptical_pareto::simulate::simulate_conditional;
use elliptical_pareto::EllipticalModel;

use super::fit::SiteMargin;
use super::{model_params, output_dir};
use crate::config::required_path;
use crate::error::{Classify, CliError, CliResult};
use crate::input::{parse_assignments, read_sites};
use crate::output::{ensure_dir, full, in_dir, write_csv};
use crate::Globals;

#[derive(Debug, Args)]
pub struct ConditionalArgs {
    #[arg(long)]
    pub sites: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Conditioning values as id=value pairs, comma separated.
    #[arg(long)]
    pub cond: String,
    /// Target site ids, comma separated (default: every other site).
    #[arg(long)]
    pub targets: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// margins.json from `fit`: conditioning values are then on the data
    /// scale and draws are transformed back to it.
    #[arg(long)]
    pub margins: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Mean, standard deviation (divisor n) and 2.5/50/97.5% quantiles.
pub fn summarize(values: &mut [f64]) -> [f64; 5] {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    values.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (values.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(values.len() - 1);
        values[lo] + (h - lo as f64) * (values[hi] - values[lo])
    };
    [mean, sd, q(0.025), q(0.5), q(0.975)]
}

fn load_margins(path: &PathBuf) -> CliResult<Vec<SiteMargin>> {
    let text = std::fs::read_to_string(path).config_err(format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).config_err(format!("{}: not a margins file", path.display()))
}

pub fn run(args: &ConditionalArgs, g: &Globals) -> CliResult<()> {
    let sites = read_sites(&required_path(args.sites.clone(), &g.config.sites_file, "sites")?)?;
    let psi = model_params(args.params.as_deref(), args.fit.as_deref())?;
    if args.n == 0 {
        return Err(CliError::config("--n must be positive"));
    }
    let cond = parse_assignments(&args.cond)?;
    let cond_ids: Vec<String> = cond.iter().map(|(id, _)| id.clone()).collect();
    let cond_idx = sites.positions(&cond_ids)?;
    let target_ids: Vec<String> = match &args.targets {
        Some(t) => t.split(',').map(|s| s.trim().to_string()).collect(),
        None => sites.ids().into_iter().filter(|id| !cond_ids.iter().any(|c| c == id)).map(String::from).collect(),
    };
    if let Some(dup) = target_ids.iter().find(|t| cond_ids.contains(t)) {
        return Err(CliError::config(format!("site '{dup}' is both a conditioning and a target site")));
    }
    if target_ids.is_empty() {
        return Err(CliError::config("no target sites"));
    }
    let target_idx = sites.positions(&target_ids)?;

    let margins = match &args.margins {
        Some(path) => {
            let m = load_margins(path)?;
            let lookup = |id: &str| {
                m.iter().find(|s| s.site_id == id).map(|s| s.fit.clone()).ok_or_else(|| CliError::config(format!("{}: no margin for site '{id}'", path.display())))
            };
            let c: CliResult<Vec<_>> = cond_ids.iter().map(|id| lookup(id)).collect();
            let t: CliResult<Vec<_>> = target_ids.iter().map(|id| lookup(id)).collect();
            Some((c?, t?))
        }
        None => None,
    };
    let values: Vec<f64> = match &margins {
        Some((cm, _)) => cond.iter().zip(cm).map(|((_, v), m)| m.to_pareto(*v)).collect(),
        None => cond.iter().map(|(_, v)| *v).collect(),
    };

    let model = EllipticalModel::from_params(sites.subset_coords(&target_idx), &psi)?;
    let batch = simulate_conditional(&model, &sites.subset_coords(&cond_idx), &values, args.n, g.seed, true)?;
    let mut draws = batch.draws;
    if let Some((_, tm)) = &margins {
        for i in 0..draws.rows() {
            for (j, m) in tm.iter().enumerate() {
                draws[(i, j)] = m.from_pareto(draws[(i, j)]);
            }
        }
    }

    let out = output_dir(&args.out, g);
    ensure_dir(&out)?;
    let header: Vec<&str> = target_ids.iter().map(String::as_str).collect();
    write_csv(&in_dir(&out, "cond_draws.csv"), &header, (0..draws.rows()).map(|i| draws.row(i).iter().map(|&x| full(x)).collect()))?;
    let rows = target_ids.iter().enumerate().map(|(j, id)| {
        let mut col: Vec<f64> = (0..draws.rows()).map(|i| draws[(i, j)]).collect();
        let s = summarize(&mut col);
        let mut row = vec![id.clone()];
        row.extend(s.iter().map(|&v| full(v)));
        row
    });
    write_csv(&in_dir(&out, "summary.csv"), &["site_id", "mean", "sd", "q025", "q500", "q975"], rows)?;
    println!("wrote {} conditional draws at {} target sites to {}", draws.rows(), draws.cols(), out.display());
    Ok(())
}
