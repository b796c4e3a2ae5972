use std::path::PathBuf;

use clap::{Args, ValueEnum};

use elliptical_pareto::simulate::{simulate_extremal_t, simulate_pareto_ar, simulate_pareto_poisson, RiskFunctional, RiskKind, SimOptions};
use elliptical_pareto::EllipticalModel;

use super::model_params;
use crate::config::required_path;
use crate::error::{Classify, CliError, CliResult};
use crate::input::{parse_list, read_sites};
use crate::output::{full, write_csv};
use crate::Globals;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    /// Max-stable extremal-t vectors with unit Fréchet margins.
    ExtremalT,
    /// ℓ-Pareto vectors above the risk threshold.
    Pareto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ell {
    Max,
    Min,
    Sum,
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sampler {
    /// Acceptance-rejection from the spectral representation.
    Ar,
    /// Poisson points of the max-stable construction.
    Poisson,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub sites: Option<PathBuf>,
    /// Dependence parameters log_lambda,kappa,alpha.
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Take the parameters from a fit.json.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SimKind::ExtremalT)]
    pub kind: SimKind,
    /// Number of draws.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Risk functional for ℓ-Pareto draws.
    #[arg(long, value_enum)]
    pub ell: Option<Ell>,
    /// Thresholds u of the risk functional: one value or one per site.
    #[arg(long, allow_hyphen_values = true)]
    pub thresholds: Option<String>,
    #[arg(long, value_enum, default_value_t = Sampler::Ar)]
    pub sampler: Sampler,
    /// Output CSV file.
    #[arg(long, default_value = "draws.csv")]
    pub out: PathBuf,
}

fn risk_functional(args: &SimulateArgs, g: &Globals, d: usize) -> CliResult<RiskFunctional> {
    let spec = g.config.risk.as_ref();
    let kind = match args.ell {
        Some(Ell::Max) => RiskKind::WeightedMax,
        Some(Ell::Min) => RiskKind::WeightedMin,
        Some(Ell::Sum) => RiskKind::WeightedSum,
        Some(Ell::Sup) => RiskKind::Sup,
        None => spec.map_or(RiskKind::WeightedMax, |s| s.kind),
    };
    let mut u = match &args.thresholds {
        Some(t) => parse_list(t, "--thresholds")?,
        None => spec.map(|s| s.thresholds.clone()).filter(|t| !t.is_empty()).unwrap_or_else(|| vec![1.0]),
    };
    if u.len() == 1 {
        u = vec![u[0]; d];
    }
    if u.len() != d {
        return Err(CliError::config(format!("{} thresholds for {d} sites", u.len())));
    }
    RiskFunctional::new(kind, u).config_err("risk functional")
}

pub fn run(args: &SimulateArgs, g: &Globals) -> CliResult<()> {
    let sites = read_sites(&required_path(args.sites.clone(), &g.config.sites_file, "sites")?)?;
    let psi = model_params(args.params.as_deref(), args.fit.as_deref())?;
    if args.n == 0 {
        return Err(CliError::config("--n must be positive"));
    }
    let model = EllipticalModel::from_params(sites.coords(), &psi)?;
    let opts = SimOptions::default();
    let batch = match args.kind {
        SimKind::ExtremalT => simulate_extremal_t(&model, args.n, g.seed, &opts)?,
        SimKind::Pareto => {
            let ell = risk_functional(args, g, sites.len())?;
            match args.sampler {
                Sampler::Ar => simulate_pareto_ar(&model, &ell, args.n, g.seed, &opts)?,
                Sampler::Poisson => simulate_pareto_poisson(&model, &ell, args.n, g.seed, &opts)?,
            }
        }
    };
    let d = batch.draws;
    write_csv(&args.out, &sites.ids(), (0..d.rows()).map(|i| d.row(i).iter().map(|&x| full(x)).collect()))?;
    println!("wrote {} draws at {} sites to {}", d.rows(), d.cols(), args.out.display());
    Ok(())
}
