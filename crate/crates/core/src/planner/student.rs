use std::path::Path;

use super::{PlanContext, Planner, PlannerError};
use crate::actionlang::render_response;
use crate::trainer::{featurize, PolicyParams};

/// Trained student policy acting greedily on its own candidate set.
#[derive(Debug, Clone)]
pub struct StudentPlanner {
    policy: PolicyParams,
    label: String,
}

impl StudentPlanner {
    pub fn new(policy: PolicyParams, label: impl Into<String>) -> Self {
        StudentPlanner {
            policy,
            label: label.into(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, PlannerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PlannerError::Checkpoint(format!("{}: {e}", path.display())))?;
        let policy =
            PolicyParams::from_checkpoint(&text).map_err(|e| PlannerError::Checkpoint(e.to_string()))?;
        Ok(Self::new(policy, format!("student:{}", path.display())))
    }

    pub fn policy(&self) -> &PolicyParams {
        &self.policy
    }
}

impl Planner for StudentPlanner {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn respond(&mut self, ctx: &PlanContext<'_>) -> Result<String, PlannerError> {
        let f = featurize(ctx.snapshot, ctx.task);
        let phi = f.matrix();
        let verbs = f.verbs();
        let best = self.policy.argmax(&phi, &verbs);
        let probs = self.policy.probs(&phi, &verbs);
        Ok(render_response(
            &format!("{} candidate actions.", f.candidates.len()),
            &format!("Highest policy probability {:.3}.", probs[best]),
            &f.candidates[best].action,
        ))
    }
}
