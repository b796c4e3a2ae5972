use std::path::PathBuf;

use clap::{Args, ValueEnum};

use elliptical_pareto::study::{run_misspec_study, run_recovery_study, Preset, StudyConfig};

use super::output_dir;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, in_dir, write_json, write_text};
use crate::Globals;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyChoice {
    /// Well-specified ℓ-Pareto data (efficiency table).
    Recovery,
    /// t-process data (bias/variance table).
    Misspecified,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// smoke, desk, paper or table1-cell. Ignored when the config file has
    /// a `study` section.
    #[arg(long, default_value = "desk")]
    pub preset: Preset,
    #[arg(long, value_enum, default_value_t = StudyChoice::Recovery)]
    pub kind: StudyChoice,
    /// Run the single cell (kappa, alpha, theta).
    #[arg(long, requires_all = ["alpha", "theta"])]
    pub kappa: Option<f64>,
    #[arg(long, requires_all = ["kappa", "theta"])]
    pub alpha: Option<f64>,
    #[arg(long, requires_all = ["kappa", "alpha"])]
    pub theta: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &StudyArgs, g: &Globals) -> CliResult<()> {
    let mut cfg = g.config.study.clone().unwrap_or_else(|| StudyConfig::preset(args.preset));
    if let (Some(k), Some(a), Some(t)) = (args.kappa, args.alpha, args.theta) {
        cfg = cfg.with_cell(k, a, t);
    }
    if let Some(r) = args.reps {
        cfg.reps = r;
    }
    if let Some(n) = args.sample_size {
        cfg.sample_size = n;
    }
    cfg.seed = g.seed;
    cfg.validate().map_err(|e| CliError::config(format!("study configuration: {e}")))?;
    let out = output_dir(&args.out, g);
    ensure_dir(&out)?;

    let report = match args.kind {
        StudyChoice::Recovery => run_recovery_study(&cfg)?,
        StudyChoice::Misspecified => run_misspec_study(&cfg)?,
    };
    write_text(&in_dir(&out, "study.csv"), &report.to_csv())?;
    write_json(&in_dir(&out, "study.json"), &report)?;
    let table = report.table();
    write_text(&in_dir(&out, "table.txt"), &table)?;
    print!("{table}");
    let invalid = report.cells.iter().filter(|c| c.invalid()).count();
    if invalid > 0 {
        log::warn!("{invalid} cell(s) flagged invalid: more than 10% of fits failed");
    }
    println!("finished in {:.1}s, results in {}", report.runtime_secs, out.display());
    Ok(())
}
