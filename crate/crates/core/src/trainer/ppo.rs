//! Clipped-surrogate PPO with GAE over the linear student.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::N_STATE;
use super::policy::{Grad, PolicyParams};
use super::{TrainConfig, TrainError};
use crate::actionlang::Verb;
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Per-candidate feature rows; the first `N_STATE` entries of every row
    /// are the shared state features.
    pub features: Vec<Vec<f64>>,
    pub verbs: Vec<Verb>,
    pub chosen: usize,
    /// Log-probability of `chosen` under the sampling policy.
    pub logp: f64,
    pub reward: f64,
    pub done: bool,
}

impl Transition {
    pub fn state(&self) -> &[f64] {
        &self.features[0][..N_STATE]
    }
}

/// A transition with its advantage and return target.
#[derive(Debug, Clone)]
pub struct Sample<'a> {
    pub t: &'a Transition,
    pub advantage: f64,
    pub ret: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpoStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub min_applied_ratio: f64,
    pub max_applied_ratio: f64,
}

/// Generalized advantage estimates and returns. A transition flagged `done`
/// ends its episode; the batch end is treated as terminal too.
pub fn gae(batch: &[Transition], values: &[f64], gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = batch.len();
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = 0.0;
    for i in (0..n).rev() {
        let terminal = batch[i].done || i + 1 == n;
        let (nv, na) = if terminal { (0.0, 0.0) } else { (next_value, next_adv) };
        let delta = batch[i].reward + gamma * nv - values[i];
        adv[i] = delta + gamma * lambda * na;
        next_adv = adv[i];
        next_value = values[i];
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, ret)
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// Mean PPO loss over `samples`: negative clipped surrogate, minus the
/// entropy bonus, plus the value regression term.
pub fn ppo_loss(p: &PolicyParams, samples: &[Sample<'_>], cfg: &TrainConfig) -> f64 {
    let eps = cfg.ppo_clip;
    let total: f64 = samples
        .iter()
        .map(|s| {
            let probs = p.probs(&s.t.features, &s.t.verbs);
            let ratio = (probs[s.t.chosen].ln() - s.t.logp).exp();
            let surrogate = (ratio * s.advantage).min(ratio.clamp(1.0 - eps, 1.0 + eps) * s.advantage);
            let v_err = p.value(s.t.state()) - s.ret;
            -surrogate - cfg.entropy_coef * entropy(&probs) + cfg.value_coef * 0.5 * v_err * v_err
        })
        .sum();
    total / samples.len() as f64
}

/// Analytic gradient of [`ppo_loss`]. Where the clipped branch is the
/// minimum the policy term contributes nothing.
pub fn ppo_grad(p: &PolicyParams, samples: &[Sample<'_>], cfg: &TrainConfig) -> Grad {
    let eps = cfg.ppo_clip;
    let n = samples.len() as f64;
    let mut g = Grad::zeros();
    for s in samples {
        let t = s.t;
        let probs = p.probs(&t.features, &t.verbs);
        let ratio = (probs[t.chosen].ln() - t.logp).exp();
        let unclipped = ratio * s.advantage;
        let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * s.advantage;
        let policy_active = unclipped <= clipped;
        let h = entropy(&probs);
        for (c, (x, verb)) in t.features.iter().zip(&t.verbs).enumerate() {
            let y = (c == t.chosen) as u8 as f64;
            let mut dz = 0.0;
            if policy_active {
                dz -= s.advantage * ratio * (y - probs[c]);
            }
            if probs[c] > 0.0 {
                dz += cfg.entropy_coef * probs[c] * (probs[c].ln() + h);
            }
            let k = verb.index();
            for (f, xf) in x.iter().enumerate() {
                g.w[f][k] += dz * xf / n;
            }
        }
        let v_err = p.value(t.state()) - s.ret;
        for (f, xf) in t.state().iter().enumerate() {
            g.v[f] += cfg.value_coef * v_err * xf / n;
        }
    }
    g
}

/// Several epochs of minibatch PPO over one batch of transitions.
///
/// Advantages are computed once with the incoming value head. A batch whose
/// advantages are all zero leaves the policy untouched.
pub fn ppo_update(
    p: &PolicyParams,
    batch: &[Transition],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(PolicyParams, PpoStats), TrainError> {
    if batch.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    if let Some(bad) = batch
        .iter()
        .find(|t| t.chosen >= t.features.len() || t.logp > 0.0 || t.features.len() != t.verbs.len())
    {
        return Err(TrainError::InvalidTransition(format!(
            "chosen {} of {} with logp {}",
            bad.chosen,
            bad.features.len(),
            bad.logp
        )));
    }
    let values: Vec<f64> = batch.iter().map(|t| p.value(t.state())).collect();
    let (mut adv, ret) = gae(batch, &values, cfg.discount, cfg.gae_lambda);
    if adv.iter().all(|a| *a == 0.0) {
        log::debug!("degenerate PPO batch of {} transitions", batch.len());
        return Err(TrainError::DegenerateBatch);
    }
    if cfg.normalize_advantages && adv.len() > 1 {
        let mean = adv.iter().sum::<f64>() / adv.len() as f64;
        let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / adv.len() as f64;
        let sd = var.sqrt().max(1e-8);
        for a in &mut adv {
            *a = (*a - mean) / sd;
        }
    }
    let samples: Vec<Sample<'_>> = batch
        .iter()
        .zip(adv.iter().zip(&ret))
        .map(|(t, (a, r))| Sample {
            t,
            advantage: *a,
            ret: *r,
        })
        .collect();

    let mut rng = seeds::rng(seed);
    let mut next = p.clone();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut clipped = 0usize;
    let mut seen = 0usize;
    let mut min_r = f64::INFINITY;
    let mut max_r = f64::NEG_INFINITY;
    let eps = cfg.ppo_clip;
    for _ in 0..cfg.ppo_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.minibatch_size.max(1)) {
            let mb: Vec<Sample<'_>> = chunk.iter().map(|i| samples[*i].clone()).collect();
            for s in &mb {
                let prob = next.probs(&s.t.features, &s.t.verbs)[s.t.chosen];
                let ratio = (prob.ln() - s.t.logp).exp();
                let applied = ratio.clamp(1.0 - eps, 1.0 + eps);
                clipped += (applied != ratio) as usize;
                seen += 1;
                min_r = min_r.min(applied);
                max_r = max_r.max(applied);
            }
            let g = ppo_grad(&next, &mb, cfg);
            next.step(&g, cfg.learning_rate);
        }
    }
    let (mut pl, mut vl, mut ent) = (0.0, 0.0, 0.0);
    for s in &samples {
        let probs = next.probs(&s.t.features, &s.t.verbs);
        let ratio = (probs[s.t.chosen].ln() - s.t.logp).exp();
        pl -= (ratio * s.advantage).min(ratio.clamp(1.0 - eps, 1.0 + eps) * s.advantage);
        vl += 0.5 * (next.value(s.t.state()) - s.ret).powi(2);
        ent += entropy(&probs);
    }
    let n = samples.len() as f64;
    if !next.is_finite() {
        return Err(TrainError::NonFinite);
    }
    Ok((
        next,
        PpoStats {
            policy_loss: pl / n,
            value_loss: vl / n,
            entropy: ent / n,
            clip_fraction: clipped as f64 / seen.max(1) as f64,
            min_applied_ratio: min_r,
            max_applied_ratio: max_r,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::features::N_FEATURES;
    use proptest::prelude::*;
    use rand::Rng;

    fn row(seed: u64) -> Vec<f64> {
        let mut rng = seeds::rng(seed);
        (0..N_FEATURES).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn fixed_batch() -> Vec<Transition> {
        let verbs = vec![Verb::Explore, Verb::GoToAndOpen, Verb::Done];
        (0..6)
            .map(|i| {
                let mut f: Vec<Vec<f64>> = (0..3).map(|c| row(100 * i + c)).collect();
                let state = f[0][..N_STATE].to_vec();
                for r in &mut f {
                    r[..N_STATE].copy_from_slice(&state);
                }
                Transition {
                    features: f,
                    verbs: verbs.clone(),
                    chosen: (i % 3) as usize,
                    logp: -1.2 + 0.15 * i as f64,
                    reward: [0.3, -0.4, 0.28, 5.0, -0.3, 0.1][i as usize],
                    done: i == 3 || i == 5,
                }
            })
            .collect()
    }

    fn cfg() -> TrainConfig {
        TrainConfig {
            entropy_coef: 0.05,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn gae_matches_hand_computation() {
        let b = fixed_batch();
        let v = [0.5, 0.1, -0.2, 0.3, 0.0, 0.4];
        let (adv, ret) = gae(&b, &v, 0.9, 0.5);
        // Episode 2: transitions 4 (non-terminal) and 5 (terminal).
        let d5 = 0.1 - 0.4;
        let d4 = -0.3 + 0.9 * 0.4 - 0.0;
        assert!((adv[5] - d5).abs() < 1e-12);
        assert!((adv[4] - (d4 + 0.9 * 0.5 * d5)).abs() < 1e-12);
        assert!((adv[3] - (5.0 - 0.3)).abs() < 1e-12);
        assert!((ret[4] - (adv[4] + 0.0)).abs() < 1e-12);
    }

    #[test]
    fn surrogate_gradient_matches_finite_differences() {
        let p = PolicyParams::init(4, 0.4);
        let b = fixed_batch();
        let c = cfg();
        let values: Vec<f64> = b.iter().map(|t| p.value(t.state())).collect();
        let (adv, ret) = gae(&b, &values, c.discount, c.gae_lambda);
        let samples: Vec<Sample<'_>> = b
            .iter()
            .zip(adv.iter().zip(&ret))
            .map(|(t, (a, r))| Sample { t, advantage: *a, ret: *r + 0.7 })
            .collect();
        let g = ppo_grad(&p, &samples, &c);
        let h = 1e-6;
        let check = |analytic: f64, plus: PolicyParams, minus: PolicyParams, what: String| {
            let fd = (ppo_loss(&plus, &samples, &c) - ppo_loss(&minus, &samples, &c)) / (2.0 * h);
            let abs = (fd - analytic).abs();
            let rel = abs / fd.abs().max(analytic.abs()).max(1e-12);
            assert!(rel < 1e-4 || abs < 1e-9, "{what}: fd {fd} vs {analytic}");
        };
        for f in 0..N_FEATURES {
            for t in 0..5 {
                let mut plus = p.clone();
                plus.w[f][t] += h;
                let mut minus = p.clone();
                minus.w[f][t] -= h;
                check(g.w[f][t], plus, minus, format!("w[{f}][{t}]"));
            }
        }
        for f in 0..N_STATE {
            let mut plus = p.clone();
            plus.v[f] += h;
            let mut minus = p.clone();
            minus.v[f] -= h;
            check(g.v[f], plus, minus, format!("v[{f}]"));
        }
    }

    #[test]
    fn zero_advantage_batch_is_a_noop() {
        let p = PolicyParams::zeros();
        let b = vec![Transition {
            features: vec![vec![0.0; N_FEATURES]; 2],
            verbs: vec![Verb::Explore, Verb::Done],
            chosen: 0,
            logp: -(2f64.ln()),
            reward: 0.0,
            done: true,
        }];
        assert_eq!(ppo_update(&p, &b, &cfg(), 1), Err(TrainError::DegenerateBatch));
    }

    #[test]
    fn bandit_learns_the_better_arm() {
        // Arm A (explore template) pays +1, arm B (done template) pays -1.
        let mut phi = vec![vec![0.0; N_FEATURES]; 2];
        phi[0][0] = 1.0;
        phi[1][0] = 1.0;
        let verbs = vec![Verb::Explore, Verb::Done];
        let c = TrainConfig {
            learning_rate: 0.05,
            ..TrainConfig::default()
        };
        let mut p = PolicyParams::zeros();
        let mut rng = seeds::rng(17);
        for round in 0..300 {
            let probs = p.probs(&phi, &verbs);
            let batch: Vec<Transition> = (0..8)
                .map(|_| {
                    let a = if rng.gen::<f64>() < probs[0] { 0 } else { 1 };
                    Transition {
                        features: phi.clone(),
                        verbs: verbs.clone(),
                        chosen: a,
                        logp: probs[a].ln(),
                        reward: if a == 0 { 1.0 } else { -1.0 },
                        done: true,
                    }
                })
                .collect();
            match ppo_update(&p, &batch, &c, round) {
                Ok((next, _)) => p = next,
                Err(TrainError::DegenerateBatch) => {}
                Err(e) => panic!("{e}"),
            }
        }
        let pa = p.probs(&phi, &verbs)[0];
        assert!(pa > 0.9, "P(A) = {pa}");
    }

    proptest! {
        #[test]
        fn applied_ratios_stay_clipped(seed in 0u64..200, lr in 0.01f64..2.0) {
            let p = PolicyParams::init(seed, 0.3);
            let b = fixed_batch();
            let c = TrainConfig { learning_rate: lr, ppo_epochs: 6, minibatch_size: 2, ..cfg() };
            if let Ok((next, stats)) = ppo_update(&p, &b, &c, seed) {
                prop_assert!(stats.min_applied_ratio >= 1.0 - c.ppo_clip - 1e-12);
                prop_assert!(stats.max_applied_ratio <= 1.0 + c.ppo_clip + 1e-12);
                prop_assert!(next.is_finite());
                for t in &b {
                    let s: f64 = next.probs(&t.features, &t.verbs).iter().sum();
                    prop_assert!((s - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
