//! Episode runner, metrics and evaluation sweeps.

mod replay;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actionlang::{
    execute, parse_response, serialize_observation, Action, ParseFailure, StepOutcome,
};
use crate::planner::{search_plan, PlanContext, Planner, PlannerError, PlannerRef, StudentPlanner};
use crate::reward::{compute_reward, judge_success, RewardBreakdown, RewardParams};
use crate::scenegraph::{goal_visible, EnvSnapshot, Site};
use crate::trainer::PolicyParams;
use crate::world::{scene_task, Cell, GenProfile, HouseSpec, Task};

pub use replay::{parse_jsonl, plot_csv, render_step_table, render_svg};

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("no records to summarize")]
    EmptySet,
    #[error("goal {goal:?} cannot be made visible from {start}")]
    Unreachable { goal: String, start: Cell },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("scene {scene} run {run}: {message}")]
    Episode { scene: u64, run: u64, message: String },
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("log schema mismatch: {0}")]
    SchemaMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    pub max_steps: u32,
    pub reward: RewardParams,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            max_steps: 30,
            reward: RewardParams::default(),
        }
    }
}

/// Where an episode's house came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EpisodeMeta {
    pub scene_seed: u64,
    pub run: u64,
    /// Generator profile, when the house was generated rather than given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<GenProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: u32,
    pub prompt_digest: String,
    pub response: String,
    pub outcome: StepOutcome,
    pub reward: RewardBreakdown,
    /// Cells along the traversed path, start and end included.
    pub path_cells: Vec<Cell>,
    pub robot_cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub schema_version: u32,
    pub scene_seed: u64,
    pub run: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<GenProfile>,
    pub house_digest: String,
    pub task: Task,
    pub start_cell: Cell,
    pub planner: String,
    pub max_steps: u32,
    pub reward_params: RewardParams,
    pub steps: Vec<StepRecord>,
    pub success: bool,
    pub dist_total: f64,
    pub retrials: u32,
    pub shortest_possible: f64,
    /// Set when the episode was aborted by a planner fault.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
    /// Not logged, so reruns produce identical files.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Minimal travel distance of any action sequence that leaves the goal in
/// the scene graph, found by uniform-cost search over the ground truth.
pub fn shortest_possible(house: &HouseSpec, task: &Task) -> Result<f64, HarnessError> {
    let site = Site::new(house.clone()).map_err(|e| HarnessError::Config(e.to_string()))?;
    shortest_possible_in(&site, task)
}

pub fn shortest_possible_in(site: &Arc<Site>, task: &Task) -> Result<f64, HarnessError> {
    let s = EnvSnapshot::start(site.clone(), task);
    if goal_visible(&s, &task.goal) {
        return Ok(0.0);
    }
    search_plan(&s, &task.goal)
        .map(|p| p.cost)
        .ok_or_else(|| HarnessError::Unreachable {
            goal: task.goal.clone(),
            start: task.start_cell,
        })
}

/// Runs one episode: render, plan, parse, execute and score until `done()`
/// or the step budget runs out.
pub fn run_episode(
    planner: &mut dyn Planner,
    site: Arc<Site>,
    task: &Task,
    cfg: &EpisodeConfig,
    meta: &EpisodeMeta,
) -> Result<EpisodeRecord, HarnessError> {
    if cfg.max_steps == 0 {
        return Err(HarnessError::Config("max_steps must be at least 1".into()));
    }
    cfg.reward
        .validate()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let clock = Instant::now();
    let shortest = shortest_possible_in(&site, task)?;
    let mut s = EnvSnapshot::start(site.clone(), task);
    let mut steps = Vec::new();
    let mut fault = None;
    for index in 0..cfg.max_steps {
        let prompt = serialize_observation(&s, task);
        let ctx = PlanContext {
            snapshot: &s,
            task,
            prompt: &prompt,
        };
        let (response, parsed): (String, Result<Action, ParseFailure>) = match planner.respond(&ctx) {
            Ok(text) => {
                let parsed = parse_response(&text).map(|(_, a)| a);
                (text, parsed)
            }
            Err(PlannerError::Timeout) => (String::new(), Err(ParseFailure::Timeout)),
            Err(e) => {
                fault = Some(e.to_string());
                break;
            }
        };
        let (next, outcome) = execute(&parsed, &s);
        let success = judge_success(&next, &outcome, &task.goal);
        let reward = compute_reward(&outcome, success, &cfg.reward)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let nav = site.nav();
        let path_cells = outcome
            .path
            .iter()
            .filter_map(|n| nav.node(*n).map(|x| x.cell))
            .collect();
        let done = outcome.done_called;
        steps.push(StepRecord {
            index,
            prompt_digest: prompt.digest(),
            response,
            outcome,
            reward,
            path_cells,
            robot_cell: next.world.robot_cell,
        });
        s = next;
        if done {
            break;
        }
    }
    let success = steps.last().is_some_and(|st| st.reward.success);
    let retrials = steps.iter().filter(|st| st.outcome.is_retrial()).count() as u32;
    Ok(EpisodeRecord {
        schema_version: LOG_SCHEMA_VERSION,
        scene_seed: meta.scene_seed,
        run: meta.run,
        profile: meta.profile.clone(),
        house_digest: crate::canonical::short_digest(site.house.to_canonical_json()),
        task: task.clone(),
        start_cell: EnvSnapshot::blank(site.clone(), task).world.robot_cell,
        planner: planner.name(),
        max_steps: cfg.max_steps,
        reward_params: cfg.reward,
        steps,
        success,
        dist_total: s.world.dist_total,
        retrials,
        shortest_possible: shortest,
        fault,
        wall_time: clock.elapsed(),
    })
}

/// Aggregate metrics over a record set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub planner: String,
    pub episodes: usize,
    pub sr: f64,
    pub spl: f64,
    /// Mean distance over all episodes.
    pub dist: f64,
    /// Mean distance over successful episodes only.
    pub dist_success: Option<f64>,
    pub retrials: f64,
}

/// Per-episode SPL contribution `S * l / max(p, l)`, with `l = p = 0`
/// counting as `S`.
pub fn spl_term(success: bool, shortest: f64, taken: f64) -> f64 {
    if !success {
        return 0.0;
    }
    let denom = taken.max(shortest);
    if denom <= 0.0 {
        1.0
    } else {
        shortest / denom
    }
}

pub fn summarize(records: &[EpisodeRecord]) -> Result<EvalSummary, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptySet);
    }
    let n = records.len() as f64;
    let successes: Vec<&EpisodeRecord> = records.iter().filter(|r| r.success).collect();
    let mut planners: Vec<&str> = records.iter().map(|r| r.planner.as_str()).collect();
    planners.dedup();
    Ok(EvalSummary {
        planner: planners.join("+"),
        episodes: records.len(),
        sr: 100.0 * successes.len() as f64 / n,
        spl: 100.0
            * records
                .iter()
                .map(|r| spl_term(r.success, r.shortest_possible, r.dist_total))
                .sum::<f64>()
            / n,
        dist: records.iter().map(|r| r.dist_total).sum::<f64>() / n,
        dist_success: (!successes.is_empty()).then(|| {
            successes.iter().map(|r| r.dist_total).sum::<f64>() / successes.len() as f64
        }),
        retrials: records.iter().map(|r| r.retrials as f64).sum::<f64>() / n,
    })
}

/// Aligned text table with SR, SPL, Dist and Retrials columns.
pub fn format_table(rows: &[EvalSummary]) -> String {
    let width = rows
        .iter()
        .map(|r| r.planner.len())
        .chain(["Planner".len()])
        .max()
        .unwrap_or(7);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}\n",
        "Planner", "Episodes", "SR %", "SPL %", "Dist.", "Retrials"
    );
    for r in rows {
        out += &format!(
            "{:<width$}  {:>8}  {:>8.2}  {:>8.2}  {:>8.2}  {:>8.2}\n",
            r.planner, r.episodes, r.sr, r.spl, r.dist, r.retrials
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub scene_seeds: Vec<u64>,
    pub runs_per_scene: u64,
    pub profile: GenProfile,
    pub episode: EpisodeConfig,
    /// Run episodes on the rayon pool.
    pub parallel: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            scene_seeds: (1001..=1007).collect(),
            runs_per_scene: 25,
            profile: GenProfile::default(),
            episode: EpisodeConfig::default(),
            parallel: true,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.scene_seeds.is_empty() {
            return Err(HarnessError::Config("scene seed list is empty".into()));
        }
        if self.runs_per_scene == 0 {
            return Err(HarnessError::Config("runs_per_scene must be positive".into()));
        }
        if self.episode.max_steps == 0 {
            return Err(HarnessError::Config("max_steps must be at least 1".into()));
        }
        self.profile
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }
}

pub type PlannerFactory<'a> = dyn Fn() -> Result<Box<dyn Planner>, PlannerError> + Sync + 'a;

/// Every (scene, run) of the suite with a fresh planner per episode.
/// Records come back in scene-then-run order regardless of scheduling.
pub fn eval_suite_with(
    factory: &PlannerFactory<'_>,
    cfg: &SuiteConfig,
) -> Result<(EvalSummary, Vec<EpisodeRecord>), HarnessError> {
    cfg.validate()?;
    let jobs: Vec<(u64, u64)> = cfg
        .scene_seeds
        .iter()
        .flat_map(|s| (0..cfg.runs_per_scene).map(move |r| (*s, r)))
        .collect();
    let one = |&(scene, run): &(u64, u64)| -> Result<EpisodeRecord, HarnessError> {
        let wrap = |message: String| HarnessError::Episode {
            scene,
            run,
            message,
        };
        let (house, task) = scene_task(scene, run, &cfg.profile).map_err(|e| wrap(e.to_string()))?;
        let site = Site::new(house).map_err(|e| wrap(e.to_string()))?;
        let mut planner = factory()?;
        let meta = EpisodeMeta {
            scene_seed: scene,
            run,
            profile: Some(cfg.profile.clone()),
        };
        run_episode(planner.as_mut(), site, &task, &cfg.episode, &meta).map_err(|e| match e {
            HarnessError::Episode { .. } => e,
            other => wrap(other.to_string()),
        })
    };
    let records: Vec<EpisodeRecord> = if cfg.parallel {
        jobs.par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        jobs.iter().map(one).collect::<Result<_, _>>()?
    };
    Ok((summarize(&records)?, records))
}

pub fn eval_suite(
    planner: &PlannerRef,
    cfg: &SuiteConfig,
) -> Result<(EvalSummary, Vec<EpisodeRecord>), HarnessError> {
    let cfg = match planner {
        PlannerRef::Remote { .. } => SuiteConfig {
            parallel: false,
            ..cfg.clone()
        },
        _ => cfg.clone(),
    };
    if let PlannerRef::Student { checkpoint } = planner {
        // Load once, share clones.
        let student = StudentPlanner::load(checkpoint)?;
        return eval_suite_with(&|| Ok(Box::new(student.clone()) as Box<dyn Planner>), &cfg);
    }
    eval_suite_with(&|| planner.build(), &cfg)
}

/// Evaluates an in-memory student policy.
pub fn eval_policy(
    policy: &PolicyParams,
    label: &str,
    cfg: &SuiteConfig,
) -> Result<(EvalSummary, Vec<EpisodeRecord>), HarnessError> {
    let student = StudentPlanner::new(policy.clone(), label);
    eval_suite_with(&|| Ok(Box::new(student.clone()) as Box<dyn Planner>), cfg)
}

/// One canonical JSON record per line.
pub fn write_jsonl(records: &[EpisodeRecord]) -> String {
    records
        .iter()
        .map(|r| crate::canonical::to_canonical_json(r) + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::planner::{OraclePlanner, PlanContext};

    fn two_room_task() -> (Arc<Site>, Task) {
        (
            Site::new(fixtures::two_room_house()).unwrap(),
            Task {
                goal: "mug".into(),
                start_cell: Cell(12, 1),
            },
        )
    }

    struct Garbage;

    impl Planner for Garbage {
        fn name(&self) -> String {
            "garbage".into()
        }

        fn respond(&mut self, _: &PlanContext<'_>) -> Result<String, PlannerError> {
            Ok("I think we should look around".into())
        }
    }

    #[test]
    fn spl_hand_cases() {
        assert_eq!(spl_term(true, 4.0, 4.0), 1.0);
        assert_eq!(spl_term(true, 10.0, 20.0), 0.5);
        assert_eq!(spl_term(false, 10.0, 10.0), 0.0);
        assert_eq!(spl_term(true, 0.0, 0.0), 1.0);
        assert_eq!(spl_term(true, 0.0, 3.0), 0.0);
    }

    #[test]
    fn oracle_fixture_episode() {
        let (site, task) = two_room_task();
        let r = run_episode(&mut OraclePlanner, site, &task, &EpisodeConfig::default(), &EpisodeMeta::default()).unwrap();
        assert!(r.success);
        assert_eq!(r.retrials, 0);
        assert_eq!(r.steps.len(), 3);
        assert!((r.dist_total - r.shortest_possible).abs() < 1e-9);
        let again = run_episode(
            &mut OraclePlanner,
            Site::new(fixtures::two_room_house()).unwrap(),
            &task,
            &EpisodeConfig::default(),
            &EpisodeMeta::default(),
        )
        .unwrap();
        assert_eq!(write_jsonl(&[r]), write_jsonl(&[again]));
    }

    #[test]
    fn garbage_planner_exhausts_budget() {
        let (site, task) = two_room_task();
        let cfg = EpisodeConfig {
            max_steps: 7,
            ..Default::default()
        };
        let r = run_episode(&mut Garbage, site, &task, &cfg, &EpisodeMeta::default()).unwrap();
        assert!(!r.success);
        assert_eq!(r.retrials, 7);
        assert_eq!(r.steps.len(), 7);
        assert_eq!(r.dist_total, 0.0);
        assert!(r.steps.iter().all(|s| (s.reward.total + 0.4).abs() < 1e-12));
    }

    #[test]
    fn summary_bounds() {
        let (site, task) = two_room_task();
        let ok = run_episode(&mut OraclePlanner, site.clone(), &task, &EpisodeConfig::default(), &EpisodeMeta::default()).unwrap();
        let bad = run_episode(&mut Garbage, site, &task, &EpisodeConfig::default(), &EpisodeMeta::default()).unwrap();
        let s = summarize(&[ok.clone(), bad]).unwrap();
        assert_eq!(s.sr, 50.0);
        assert!(s.spl <= s.sr);
        assert_eq!(s.dist_success, Some(ok.dist_total));
        assert_eq!(summarize(&[]), Err(HarnessError::EmptySet));
    }

    #[test]
    fn empty_suite_is_a_config_error() {
        let cfg = SuiteConfig {
            scene_seeds: vec![],
            ..Default::default()
        };
        assert!(matches!(eval_suite(&PlannerRef::Oracle, &cfg), Err(HarnessError::Config(_))));
    }
}
