//! Two-stage student training.
//!
//! Stage 1 fits the student to offline oracle labels with cross-entropy.
//! Stage 2 rolls the student out on training tasks; after each episode it
//! takes a PPO step on the episode's rewards and then an SFT pass on the
//! oracle's labels for the states the student visited.

mod dataset;
pub mod features;
mod policy;
mod ppo;

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actionlang::{execute, Action};
use crate::planner::oracle_action;
use crate::reward::{compute_reward, judge_success, RewardParams};
use crate::scenegraph::{EnvSnapshot, Site};
use crate::seeds;
use crate::world::{scene_task, GenProfile};

pub use dataset::{collect_teacher_dataset, dataset_digest, read_dataset, write_dataset, DatasetRecord};
pub use features::{featurize, Candidate, Featurized, FEATURE_VERSION, N_FEATURES, N_STATE};
pub use policy::{ce_grad, ce_loss, sft_update, softmax, Grad, PolicyParams, N_TEMPLATES};
pub use ppo::{gae, ppo_grad, ppo_loss, ppo_update, PpoStats, Sample, Transition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("empty batch")]
    EmptyBatch,
    #[error("all advantages are zero")]
    DegenerateBatch,
    #[error("teacher action is not among the student's candidates")]
    TeacherNotInCandidates,
    #[error("invalid transition: {0}")]
    InvalidTransition(String),
    #[error("non-finite policy weights")]
    NonFinite,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("{task}: {message}")]
    Env { task: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub num_epochs_fewshot: u32,
    pub num_epochs: u32,
    pub learning_rate: f64,
    pub ppo_clip: f64,
    pub discount: f64,
    pub gae_lambda: f64,
    pub minibatch_size: usize,
    pub ppo_epochs: u32,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub normalize_advantages: bool,
    pub seed: u64,
    /// Scale of the uniform noise in the initial policy weights.
    pub init_scale: f64,
    pub dataset_size: usize,
    pub dataset_epsilon: f64,
    pub train_seeds: Vec<u64>,
    pub tasks_per_scene: u64,
    pub max_steps: u32,
    /// Disable to run SFT-only stage 2.
    pub rl: bool,
    /// Disable to run RL-only stage 2.
    pub sft: bool,
    /// Reuse teacher answers for repeated snapshots.
    pub cache_teacher: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            num_epochs_fewshot: 3,
            num_epochs: 4,
            learning_rate: 0.05,
            ppo_clip: 0.2,
            discount: 0.98,
            gae_lambda: 0.95,
            minibatch_size: 32,
            ppo_epochs: 4,
            value_coef: 0.5,
            entropy_coef: 0.0,
            normalize_advantages: false,
            seed: 0,
            init_scale: 0.5,
            dataset_size: 500,
            dataset_epsilon: 0.3,
            train_seeds: (1..=8).collect(),
            tasks_per_scene: 8,
            max_steps: 30,
            rl: true,
            sft: true,
            cache_teacher: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.into()));
        if !(self.ppo_clip > 0.0 && self.ppo_clip < 1.0) {
            return bad("ppo_clip must be in (0, 1)");
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad("discount must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must be in [0, 1]");
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return bad("learning_rate must be positive");
        }
        if self.minibatch_size == 0 {
            return bad("minibatch_size must be positive");
        }
        if !(0.0..=1.0).contains(&self.dataset_epsilon) {
            return bad("dataset_epsilon must be in [0, 1]");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

/// Mean cross-entropy of the teacher labels under `p`.
pub fn dataset_loss(p: &PolicyParams, data: &[DatasetRecord]) -> Result<f64, TrainError> {
    let mut total = 0.0;
    let mut n = 0usize;
    for r in data {
        let (verbs, idx) = match r.decode() {
            Ok(d) => d,
            Err(TrainError::TeacherNotInCandidates) => continue,
            Err(e) => return Err(e),
        };
        total += ce_loss(p, &r.features, &verbs, idx);
        n += 1;
    }
    if n == 0 {
        return Err(TrainError::EmptyDataset);
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Report {
    pub initial_loss: f64,
    /// Full-dataset loss after each epoch.
    pub epoch_losses: Vec<f64>,
    pub skipped: usize,
}

/// Epochs of per-record SFT over the offline set, visiting records in a
/// seeded shuffled order.
pub fn stage1_fewshot_sft(
    p: &PolicyParams,
    data: &[DatasetRecord],
    cfg: &TrainConfig,
) -> Result<(PolicyParams, Stage1Report), TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut decoded = Vec::with_capacity(data.len());
    let mut skipped = 0;
    for r in data {
        match r.decode() {
            Ok(d) => decoded.push((r, d)),
            Err(TrainError::TeacherNotInCandidates) => {
                log::warn!("skipping record: teacher {} not in candidates", r.teacher_action);
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    let initial_loss = dataset_loss(p, data)?;
    let mut next = p.clone();
    let mut rng = seeds::rng(seeds::mix(cfg.seed, seeds::tag::TRAIN));
    let mut order: Vec<usize> = (0..decoded.len()).collect();
    let mut epoch_losses = Vec::new();
    for epoch in 0..cfg.num_epochs_fewshot {
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        for &i in &order {
            let (r, (verbs, idx)) = &decoded[i];
            next = sft_update(&next, &r.features, verbs, *idx, cfg.learning_rate)?.0;
        }
        let loss = dataset_loss(&next, data)?;
        log::info!("stage 1 epoch {}: loss {loss:.4}", epoch + 1);
        epoch_losses.push(loss);
    }
    Ok((
        next,
        Stage1Report {
            initial_loss,
            epoch_losses,
            skipped,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: u32,
    pub episodes: usize,
    pub successes: usize,
    pub train_sr: f64,
    pub mean_return: f64,
    pub mean_dist: f64,
    pub mean_sft_loss: f64,
    pub ppo_updates: usize,
    pub skipped_teacher: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Report {
    pub epochs: Vec<EpochStats>,
    /// Mean SFT loss of every episode, in training order.
    pub episode_sft_losses: Vec<f64>,
}

impl Stage2Report {
    /// Population variance of the per-episode SFT losses.
    pub fn sft_loss_variance(&self) -> f64 {
        let xs = &self.episode_sft_losses;
        if xs.is_empty() {
            return 0.0;
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64
    }
}

struct Rollout {
    transitions: Vec<Transition>,
    labels: Vec<(Vec<Vec<f64>>, Vec<crate::actionlang::Verb>, usize)>,
    skipped_teacher: usize,
    success: bool,
    dist: f64,
    ret: f64,
}

fn rollout(
    p: &PolicyParams,
    site: std::sync::Arc<Site>,
    task: &crate::world::Task,
    cfg: &TrainConfig,
    reward: &RewardParams,
    seed: u64,
    cache: &mut HashMap<String, Action>,
) -> Result<Rollout, TrainError> {
    let mut rng = seeds::rng(seed);
    let mut s = EnvSnapshot::start(site, task);
    let mut r = Rollout {
        transitions: Vec::new(),
        labels: Vec::new(),
        skipped_teacher: 0,
        success: false,
        dist: 0.0,
        ret: 0.0,
    };
    for step in 0..cfg.max_steps {
        let f = featurize(&s, task);
        let teacher = if cfg.cache_teacher {
            let key = s.digest();
            cache
                .entry(key)
                .or_insert_with(|| oracle_action(&s, &task.goal).0)
                .clone()
        } else {
            oracle_action(&s, &task.goal).0
        };
        let phi = f.matrix();
        let verbs = f.verbs();
        match f.index_of(&teacher) {
            Some(i) => r.labels.push((phi.clone(), verbs.clone(), i)),
            None => r.skipped_teacher += 1,
        }
        let probs = p.probs(&phi, &verbs);
        let u: f64 = rng.gen();
        let mut chosen = probs.len() - 1;
        let mut acc = 0.0;
        for (i, q) in probs.iter().enumerate() {
            acc += q;
            if u < acc {
                chosen = i;
                break;
            }
        }
        let action = f.candidates[chosen].action.clone();
        let (next, out) = execute(&Ok(action), &s);
        let success = judge_success(&next, &out, &task.goal);
        let rb = compute_reward(&out, success, reward).map_err(|e| TrainError::InvalidConfig(e.to_string()))?;
        let done = out.done_called || step + 1 == cfg.max_steps;
        r.transitions.push(Transition {
            features: phi,
            verbs,
            chosen,
            logp: probs[chosen].ln().min(0.0),
            reward: rb.total,
            done,
        });
        r.ret += rb.total;
        r.dist += out.dist_delta;
        r.success |= success;
        s = next;
        if out.done_called {
            break;
        }
    }
    Ok(r)
}

/// Interleaved RL then SFT, one episode at a time, over
/// `cfg.train_seeds x cfg.tasks_per_scene` tasks per epoch.
pub fn stage2_interleaved(
    p: &PolicyParams,
    cfg: &TrainConfig,
    reward: &RewardParams,
    profile: &GenProfile,
) -> Result<(PolicyParams, Stage2Report), TrainError> {
    cfg.validate()?;
    let mut tasks = Vec::new();
    for &scene in &cfg.train_seeds {
        for run in 0..cfg.tasks_per_scene {
            let ctx = |e: &dyn std::fmt::Display| TrainError::Env {
                task: format!("scene {scene} run {run}"),
                message: e.to_string(),
            };
            let (house, task) = scene_task(scene, run, profile).map_err(|e| ctx(&e))?;
            tasks.push((Site::new(house).map_err(|e| ctx(&e))?, task));
        }
    }
    let mut next = p.clone();
    let mut report = Stage2Report {
        epochs: Vec::new(),
        episode_sft_losses: Vec::new(),
    };
    let mut cache = HashMap::new();
    let base = seeds::mix(cfg.seed, seeds::tag::TRAIN);
    for epoch in 0..cfg.num_epochs {
        let mut stats = EpochStats {
            epoch: epoch + 1,
            episodes: 0,
            successes: 0,
            train_sr: 0.0,
            mean_return: 0.0,
            mean_dist: 0.0,
            mean_sft_loss: 0.0,
            ppo_updates: 0,
            skipped_teacher: 0,
        };
        let mut loss_sum = 0.0;
        let mut loss_n = 0usize;
        for (k, (site, task)) in tasks.iter().enumerate() {
            let seed = seeds::mix(seeds::mix(base, epoch as u64 + 1), k as u64);
            let r = rollout(&next, site.clone(), task, cfg, reward, seed, &mut cache)?;
            stats.episodes += 1;
            stats.successes += r.success as usize;
            stats.mean_return += r.ret;
            stats.mean_dist += r.dist;
            stats.skipped_teacher += r.skipped_teacher;
            if cfg.rl {
                match ppo_update(&next, &r.transitions, cfg, seeds::mix(seed, 1)) {
                    Ok((q, _)) => {
                        next = q;
                        stats.ppo_updates += 1;
                    }
                    Err(TrainError::DegenerateBatch) => {}
                    Err(e) => return Err(e),
                }
            }
            if cfg.sft && !r.labels.is_empty() {
                let mut ep_loss = 0.0;
                for (phi, verbs, idx) in &r.labels {
                    let (q, loss) = sft_update(&next, phi, verbs, *idx, cfg.learning_rate)?;
                    next = q;
                    ep_loss += loss;
                }
                let ep_loss = ep_loss / r.labels.len() as f64;
                report.episode_sft_losses.push(ep_loss);
                loss_sum += ep_loss;
                loss_n += 1;
            }
        }
        let n = stats.episodes.max(1) as f64;
        stats.train_sr = 100.0 * stats.successes as f64 / n;
        stats.mean_return /= n;
        stats.mean_dist /= n;
        stats.mean_sft_loss = if loss_n > 0 { loss_sum / loss_n as f64 } else { 0.0 };
        log::info!(
            "stage 2 epoch {}: train SR {:.1}%, SFT loss {:.4}",
            stats.epoch,
            stats.train_sr,
            stats.mean_sft_loss
        );
        report.epochs.push(stats);
    }
    Ok((next, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub initial: PolicyParams,
    pub policy: PolicyParams,
    pub dataset_digest: Option<String>,
    pub stage1: Option<Stage1Report>,
    pub stage2: Stage2Report,
}

impl TrainOutcome {
    /// Learning curves as CSV: `stage,epoch,loss,train_sr,mean_dist`.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("stage,epoch,loss,train_sr,mean_dist\n");
        if let Some(s1) = &self.stage1 {
            out += &format!("1,0,{},,\n", s1.initial_loss);
            for (i, l) in s1.epoch_losses.iter().enumerate() {
                out += &format!("1,{},{},,\n", i + 1, l);
            }
        }
        for e in &self.stage2.epochs {
            out += &format!("2,{},{},{},{}\n", e.epoch, e.mean_sft_loss, e.train_sr, e.mean_dist);
        }
        out
    }
}

/// Full pipeline: seeded init, offline teacher data and stage 1 (skipped
/// when `num_epochs_fewshot` is 0), then stage 2.
pub fn train(
    cfg: &TrainConfig,
    reward: &RewardParams,
    profile: &GenProfile,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    let initial = PolicyParams::init(seeds::mix(cfg.seed, seeds::tag::TRAIN), cfg.init_scale);
    let (after1, stage1, digest) = if cfg.num_epochs_fewshot > 0 {
        let data = collect_teacher_dataset(&cfg.train_seeds, cfg.dataset_size, cfg, profile)?;
        let (p, rep) = stage1_fewshot_sft(&initial, &data, cfg)?;
        (p, Some(rep), Some(dataset_digest(&data)))
    } else {
        (initial.clone(), None, None)
    };
    let (policy, stage2) = stage2_interleaved(&after1, cfg, reward, profile)?;
    Ok(TrainOutcome {
        initial,
        policy,
        dataset_digest: digest,
        stage1,
        stage2,
    })
}
