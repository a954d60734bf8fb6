//! Per-step reward: a success bonus, or the sum of executability,
//! exploration, efficiency and format terms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actionlang::StepOutcome;
use crate::scenegraph::{goal_visible, EnvSnapshot};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RewardError {
    #[error("invalid reward parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardParams {
    pub r_success: f64,
    pub lambda_executable: f64,
    pub lambda_explore: f64,
    pub lambda_efficiency: f64,
    pub lambda_format: f64,
    /// Node-count normalizer for the exploration term.
    pub eta_nodes: f64,
    /// Distance normalizer in meters for the efficiency term.
    pub eta_dist: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            r_success: 5.0,
            lambda_executable: 0.3,
            lambda_explore: 0.1,
            lambda_efficiency: 0.3,
            lambda_format: 0.1,
            eta_nodes: 10.0,
            eta_dist: 10.0,
        }
    }
}

impl RewardParams {
    /// Default weights with a stronger distance penalty.
    pub fn strong_efficiency() -> Self {
        RewardParams {
            lambda_efficiency: 0.6,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), RewardError> {
        if [self.eta_nodes, self.eta_dist].iter().any(|x| x.is_nan() || *x <= 0.0) {
            return Err(RewardError::InvalidParams(
                "normalizers must be positive".into(),
            ));
        }
        let weights = [
            self.lambda_executable,
            self.lambda_explore,
            self.lambda_efficiency,
            self.lambda_format,
        ];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || !self.r_success.is_finite() {
            return Err(RewardError::InvalidParams(
                "weights must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Reward for one step. Component terms are `None` on success.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub executable_term: Option<f64>,
    pub explore_term: Option<f64>,
    pub efficiency_term: Option<f64>,
    pub format_term: Option<f64>,
    pub total: f64,
    pub success: bool,
}

pub fn compute_reward(
    outcome: &StepOutcome,
    success: bool,
    p: &RewardParams,
) -> Result<RewardBreakdown, RewardError> {
    p.validate()?;
    if success {
        return Ok(RewardBreakdown {
            executable_term: None,
            explore_term: None,
            efficiency_term: None,
            format_term: None,
            total: p.r_success,
            success: true,
        });
    }
    let executable = if outcome.executable {
        p.lambda_executable
    } else {
        -p.lambda_executable
    };
    let explore = p.lambda_explore * outcome.new_nodes as f64 / p.eta_nodes;
    let efficiency = -p.lambda_efficiency * outcome.dist_delta / p.eta_dist;
    let format = if outcome.parsed() { 0.0 } else { -p.lambda_format };
    Ok(RewardBreakdown {
        executable_term: Some(executable),
        explore_term: Some(explore),
        efficiency_term: Some(efficiency),
        format_term: Some(format),
        total: executable + explore + efficiency + format,
        success: false,
    })
}

/// Success requires an explicit `done()` with the goal in the scene graph.
pub fn judge_success(s: &EnvSnapshot, outcome: &StepOutcome, goal: &str) -> bool {
    outcome.done_called && goal_visible(s, goal)
}
