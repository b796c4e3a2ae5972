use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::extremal_coeff_rho;
use crate::inference::{FitConfig, LikelihoodKind};
use crate::numerics::{Matrix, QmcConfig};

/// One parameter configuration: the range λ is calibrated so that the
/// pairwise extremal coefficient at `distance` equals `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub kappa: f64,
    pub alpha: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Two repetitions on four sites; checks the pipeline end to end.
    Smoke,
    /// Nine sites, 200 repetitions of 500 observations.
    Desk,
    /// Sixteen sites, 1000 repetitions of 1000 observations, full grid.
    Paper,
    /// A single cell at desk scale.
    Table1Cell,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Preset::Smoke),
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            "table1-cell" => Ok(Preset::Table1Cell),
            other => Err(Error::InvalidParameter(format!("unknown preset '{other}', expected smoke, desk, paper or table1-cell"))),
        }
    }
}

/// What `sample_size` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleUnit {
    /// Observations n; the number of exceedances is random.
    #[default]
    Observations,
    /// Expected number of exceedances m; each repetition uses
    /// n = round(m / V(u)) observations with V(u) from the limit model.
    Exceedances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Sites form a `grid_side`×`grid_side` grid on the unit square.
    pub grid_side: usize,
    pub cells: Vec<CellSpec>,
    pub reps: usize,
    /// Number of observations n per repetition; the exceedances are the
    /// observations above the thresholds.
    pub sample_size: usize,
    #[serde(default)]
    pub sample_unit: SampleUnit,
    /// Marginal threshold levels; the recovery study uses the first.
    pub threshold_quantiles: Vec<f64>,
    pub estimators: Vec<LikelihoodKind>,
    pub seed: u64,
    /// Distance at which θ is calibrated.
    #[serde(default = "default_distance")]
    pub theta_distance: f64,
    #[serde(default)]
    pub fit: FitConfig,
    /// Point set for the exceedance probability V(u) of the data generator.
    #[serde(default = "default_v0_qmc")]
    pub v0_qmc: QmcConfig,
}

fn default_distance() -> f64 {
    0.5
}

fn default_v0_qmc() -> QmcConfig {
    QmcConfig { n_points: 1 << 16, seed: 0xDA7A, n_shifts: 16, reorder: true }
}

/// The κ, α and θ values of the efficiency table.
pub fn table1_cells() -> Vec<CellSpec> {
    let mut cells = Vec::new();
    for kappa in [0.5, 1.0, 1.5] {
        for theta in [1.2, 1.4, 1.6] {
            for alpha in [1.0, 2.0, 5.0, 10.0] {
                cells.push(CellSpec { kappa, alpha, theta });
            }
        }
    }
    cells
}

/// The α values of the misspecification table (κ = 1, θ = 1.4).
pub fn table2_cells() -> Vec<CellSpec> {
    (1..=10).map(|a| CellSpec { kappa: 1.0, alpha: a as f64, theta: 1.4 }).collect()
}

impl StudyConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = Self {
            grid_side: 3,
            cells: vec![CellSpec { kappa: 1.0, alpha: 1.0, theta: 1.4 }],
            reps: 200,
            sample_size: 500,
            sample_unit: SampleUnit::Observations,
            threshold_quantiles: vec![0.95],
            estimators: LikelihoodKind::ALL.to_vec(),
            seed: 2015,
            theta_distance: default_distance(),
            fit: FitConfig::default(),
            v0_qmc: default_v0_qmc(),
        };
        match preset {
            Preset::Smoke => Self { grid_side: 2, reps: 2, sample_size: 300, ..base },
            Preset::Desk | Preset::Table1Cell => base,
            Preset::Paper => Self {
                grid_side: 4,
                cells: table1_cells(),
                reps: 1000,
                sample_size: 1000,
                threshold_quantiles: vec![0.95, 0.98, 0.99],
                ..base
            },
        }
    }

    pub fn with_cell(mut self, kappa: f64, alpha: f64, theta: f64) -> Self {
        self.cells = vec![CellSpec { kappa, alpha, theta }];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_side < 2 {
            return Err(Error::InvalidParameter(format!("grid side {} too small", self.grid_side)));
        }
        if self.reps < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 repetitions, got {}", self.reps)));
        }
        if self.sample_size == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        if self.cells.is_empty() || self.estimators.is_empty() || self.threshold_quantiles.is_empty() {
            return Err(Error::InvalidParameter("cells, estimators and threshold quantiles must be nonempty".into()));
        }
        if let Some(q) = self.threshold_quantiles.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
            return Err(Error::InvalidParameter(format!("threshold quantile {q} outside (0, 1)")));
        }
        for cell in &self.cells {
            let hi = extremal_coeff_rho(0.0, cell.alpha);
            if !(cell.theta > 1.0 && cell.theta < hi) {
                return Err(Error::Unattainable { target: cell.theta, lo: 1.0, hi });
            }
            if !(cell.kappa > 0.0 && cell.kappa <= 2.0) {
                return Err(Error::InvalidParameter(format!("kappa = {}", cell.kappa)));
            }
        }
        if !(self.theta_distance > 0.0) {
            return Err(Error::InvalidParameter(format!("theta distance {}", self.theta_distance)));
        }
        self.fit.qmc.validate()?;
        self.v0_qmc.validate()
    }

    pub fn sites(&self) -> Matrix<f64> {
        site_grid(self.grid_side)
    }
}

/// `side`×`side` regular grid on [0, 1]², row-major.
pub fn site_grid(side: usize) -> Matrix<f64> {
    let step = if side > 1 { 1.0 / (side - 1) as f64 } else { 0.0 };
    Matrix::from_fn(side * side, 2, |i, j| if j == 0 { (i % side) as f64 * step } else { (i / side) as f64 * step })
}
