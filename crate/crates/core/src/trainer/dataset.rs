use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::featurize;
use super::{TrainConfig, TrainError};
use crate::actionlang::{execute, parse_command, Action, Verb};
use crate::planner::oracle_action;
use crate::scenegraph::{EnvSnapshot, Site};
use crate::seeds;
use crate::world::{scene_task, GenProfile};

/// One offline teacher sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub features: Vec<Vec<f64>>,
    pub candidates: Vec<String>,
    pub teacher_action: String,
}

impl DatasetRecord {
    /// Candidate templates and the teacher's index among the candidates.
    pub fn decode(&self) -> Result<(Vec<Verb>, usize), TrainError> {
        let actions: Vec<Action> = self
            .candidates
            .iter()
            .map(|c| parse_command(c).map_err(|e| TrainError::Dataset(format!("{c:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        let teacher = parse_command(&self.teacher_action)
            .map_err(|e| TrainError::Dataset(format!("{:?}: {e}", self.teacher_action)))?;
        let idx = actions
            .iter()
            .position(|a| *a == teacher)
            .ok_or(TrainError::TeacherNotInCandidates)?;
        if self.features.len() != actions.len() {
            return Err(TrainError::Dataset("feature rows do not match candidates".into()));
        }
        Ok((actions.iter().map(Action::verb).collect(), idx))
    }
}

/// Rolls out the oracle over `scenes` (cycling scene, then run) until `n`
/// records exist. With probability `cfg.dataset_epsilon` the executed action
/// is a random non-`done` candidate, so the samples also cover states the
/// oracle itself would not visit. Labels always come from the oracle.
pub fn collect_teacher_dataset(
    scenes: &[u64],
    n: usize,
    cfg: &TrainConfig,
    profile: &GenProfile,
) -> Result<Vec<DatasetRecord>, TrainError> {
    if scenes.is_empty() || n == 0 {
        return Err(TrainError::EmptyDataset);
    }
    let mut rng = seeds::rng(seeds::mix(cfg.seed, seeds::tag::DATASET));
    let mut out = Vec::with_capacity(n);
    let mut episode = 0u64;
    while out.len() < n {
        let scene = scenes[(episode % scenes.len() as u64) as usize];
        let run = episode / scenes.len() as u64;
        let ctx = |e: &dyn std::fmt::Display| TrainError::Env {
            task: format!("scene {scene} run {run}"),
            message: e.to_string(),
        };
        let (house, task) = scene_task(scene, run, profile).map_err(|e| ctx(&e))?;
        let site = Site::new(house).map_err(|e| ctx(&e))?;
        let mut s = EnvSnapshot::start(site, &task);
        for _ in 0..cfg.max_steps {
            if out.len() == n {
                break;
            }
            let f = featurize(&s, &task);
            let (teacher, _) = oracle_action(&s, &task.goal);
            out.push(DatasetRecord {
                features: f.matrix(),
                candidates: f.candidates.iter().map(|c| c.action.to_string()).collect(),
                teacher_action: teacher.to_string(),
            });
            let others: Vec<&Action> = f
                .candidates
                .iter()
                .map(|c| &c.action)
                .filter(|a| **a != Action::Done)
                .collect();
            let act = if !others.is_empty() && rng.gen::<f64>() < cfg.dataset_epsilon {
                others[rng.gen_range(0..others.len())].clone()
            } else {
                teacher
            };
            let (next, out_step) = execute(&Ok(act), &s);
            s = next;
            if out_step.done_called {
                break;
            }
        }
        episode += 1;
    }
    Ok(out)
}

/// Newline-delimited JSON, one record per line.
pub fn write_dataset(records: &[DatasetRecord]) -> String {
    records
        .iter()
        .map(|r| crate::canonical::to_canonical_json(r) + "\n")
        .collect()
}

pub fn read_dataset(text: &str) -> Result<Vec<DatasetRecord>, TrainError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| TrainError::Dataset(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn dataset_digest(records: &[DatasetRecord]) -> String {
    crate::canonical::sha256_hex(write_dataset(records))
}
