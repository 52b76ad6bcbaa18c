use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, SearchConfig, SetClass};
use crate::limit::{BallGrid, WienerGrid};
use crate::models::{builtin_model, DensityModel};

/// Estimator families run by an experiment; their parameters come from the
/// model's level-set oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorChoice {
    ExcessMass,
    MinVolume,
    MaxProb,
    MaxProbEqualVol,
}

impl EstimatorChoice {
    pub const ALL: [EstimatorChoice; 4] = [
        EstimatorChoice::ExcessMass,
        EstimatorChoice::MinVolume,
        EstimatorChoice::MaxProb,
        EstimatorChoice::MaxProbEqualVol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorChoice::ExcessMass => "excess-mass",
            EstimatorChoice::MinVolume => "min-volume",
            EstimatorChoice::MaxProb => "max-prob",
            EstimatorChoice::MaxProbEqualVol => "max-prob-equal-vol",
        }
    }

    /// Estimator targeting the model's level set.
    pub fn kind(self, model: &DensityModel) -> EstimatorKind {
        let o = &model.oracle;
        match self {
            EstimatorChoice::ExcessMass => EstimatorKind::ExcessMass { lambda: o.lambda },
            EstimatorChoice::MinVolume => EstimatorKind::MinVolume {
                p_lambda: o.p_lambda,
            },
            EstimatorChoice::MaxProb => EstimatorKind::MaxProb {
                v_lambda: o.v_lambda,
            },
            EstimatorChoice::MaxProbEqualVol => EstimatorKind::MaxProbEqualVol {
                v_lambda: o.v_lambda,
            },
        }
    }
}

impl std::str::FromStr for EstimatorChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EstimatorChoice::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown estimator `{s}`")))
    }
}

/// Parameters of the limit simulator used by comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimitConfig {
    pub draws: usize,
    pub grid: WienerGrid,
    pub ball: BallGrid,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            draws: 10_000,
            grid: WienerGrid::default(),
            ball: BallGrid::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub model: String,
    pub lambda: f64,
    pub estimators: Vec<EstimatorChoice>,
    pub class: SetClass,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub limit: LimitConfig,
    pub search: SearchConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[serde(skip)]
    pub force: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment_id: "rates".into(),
            model: "triangular1d".into(),
            lambda: 0.5,
            estimators: vec![
                EstimatorChoice::ExcessMass,
                EstimatorChoice::MinVolume,
                EstimatorChoice::MaxProb,
            ],
            class: SetClass::Intervals,
            n_grid: vec![1000, 8000, 64000],
            replications: 500,
            seed: 1,
            limit: LimitConfig::default(),
            search: SearchConfig::default(),
            output_dir: None,
            force: false,
        }
    }
}

/// Magnification scale `n^(-1/3)`.
pub fn epsilon(n: usize) -> f64 {
    (n as f64).powf(-1.0 / 3.0)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<DensityModel> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.experiment_id.is_empty() {
            return bad("experiment_id must not be empty".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return bad("n_grid must be non-empty with positive sizes".into());
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n_grid must be strictly increasing".into());
        }
        if self.estimators.is_empty() {
            return bad("at least one estimator is required".into());
        }
        let model = builtin_model(&self.model, self.lambda)?;
        let ok_class = match model.dimension() {
            1 => self.class == SetClass::Intervals,
            _ => self.class != SetClass::Intervals,
        };
        if !ok_class {
            return bad(format!(
                "set class {:?} does not match the {}-dimensional model {}",
                self.class,
                model.dimension(),
                self.model
            ));
        }
        if model.dimension() == 2 && self.n_grid[0] < 3 {
            return bad("planar experiments need n >= 3".into());
        }
        self.limit.grid.validate()?;
        Ok(model)
    }
}
