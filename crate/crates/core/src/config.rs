//! TOML run configuration shared by every CLI subcommand.
//!
//! Every section is optional and unknown keys are rejected. A fully
//! defaulted file reads:
//!
//! ```toml
//! planner = "oracle"
//! max_steps = 30          # evaluation step budget
//!
//! [profile]               # house generator
//! min_rooms = 3
//! max_rooms = 8
//!
//! [reward]
//! lambda_efficiency = 0.3
//!
//! [train]
//! num_epochs = 4
//!
//! [eval]
//! scene_seeds = [1001, 1002, 1003, 1004, 1005, 1006, 1007]
//! runs_per_scene = 25
//! parallel = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{EpisodeConfig, SuiteConfig};
use crate::planner::PlannerRef;
use crate::reward::RewardParams;
use crate::trainer::TrainConfig;
use crate::world::GenProfile;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
    #[error("parsing {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub scene_seeds: Vec<u64>,
    pub runs_per_scene: u64,
    pub parallel: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        let suite = SuiteConfig::default();
        EvalSection {
            scene_seeds: suite.scene_seeds,
            runs_per_scene: suite.runs_per_scene,
            parallel: suite.parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub planner: PlannerRef,
    /// Step budget for evaluation episodes. Training rollouts use
    /// `train.max_steps`.
    pub max_steps: u32,
    pub profile: GenProfile,
    pub reward: RewardParams,
    pub train: TrainConfig,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            planner: PlannerRef::Oracle,
            max_steps: 30,
            profile: GenProfile::default(),
            reward: RewardParams::default(),
            train: TrainConfig::default(),
            eval: EvalSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.profile.validate().map_err(|e| invalid(&e))?;
        self.reward.validate().map_err(|e| invalid(&e))?;
        self.train.validate().map_err(|e| invalid(&e))?;
        self.suite().validate().map_err(|e| invalid(&e))?;
        Ok(())
    }

    pub fn episode(&self) -> EpisodeConfig {
        EpisodeConfig {
            max_steps: self.max_steps,
            reward: self.reward,
        }
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            scene_seeds: self.eval.scene_seeds.clone(),
            runs_per_scene: self.eval.runs_per_scene,
            profile: self.profile.clone(),
            episode: self.episode(),
            parallel: self.eval.parallel,
        }
    }
}
