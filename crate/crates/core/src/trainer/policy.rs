//! Linear softmax student over action templates, with a linear value head.
//!
//! `logit(c) = sum_f W[f][verb(c)] * phi_f(c)` and `V(s) = v . state(s)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{CANDIDATE_FEATURES, FEATURE_VERSION, N_FEATURES, N_STATE, STATE_FEATURES};
use super::TrainError;
use crate::actionlang::Verb;
use crate::seeds;

pub const N_TEMPLATES: usize = Verb::ALL.len();
pub const CHECKPOINT_FORMAT: &str = "scenesearch-policy";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub feature_version: u32,
    /// `w[f][t]`: feature by template.
    pub w: Vec<Vec<f64>>,
    /// Value head over the state features.
    pub v: Vec<f64>,
}

/// Gradient with the same shape as [`PolicyParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grad {
    pub w: Vec<Vec<f64>>,
    pub v: Vec<f64>,
}

impl Grad {
    pub fn zeros() -> Self {
        Grad {
            w: vec![vec![0.0; N_TEMPLATES]; N_FEATURES],
            v: vec![0.0; N_STATE],
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    format: String,
    version: u32,
    feature_version: u32,
    state_features: Vec<String>,
    candidate_features: Vec<String>,
    templates: Vec<Verb>,
    w: Vec<Vec<f64>>,
    v: Vec<f64>,
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|x| x / sum).collect()
}

impl PolicyParams {
    pub fn zeros() -> Self {
        PolicyParams {
            feature_version: FEATURE_VERSION,
            w: vec![vec![0.0; N_TEMPLATES]; N_FEATURES],
            v: vec![0.0; N_STATE],
        }
    }

    /// Small seeded uniform noise in `[-scale, scale]` on the policy weights;
    /// the value head starts at zero.
    pub fn init(seed: u64, scale: f64) -> Self {
        let mut rng = seeds::rng(seed);
        let mut p = Self::zeros();
        for row in &mut p.w {
            for x in row.iter_mut() {
                *x = rng.gen_range(-1.0..=1.0) * scale;
            }
        }
        p
    }

    pub fn logits(&self, phi: &[Vec<f64>], verbs: &[Verb]) -> Vec<f64> {
        phi.iter()
            .zip(verbs)
            .map(|(x, verb)| {
                let t = verb.index();
                x.iter().zip(&self.w).map(|(xf, row)| xf * row[t]).sum()
            })
            .collect()
    }

    pub fn probs(&self, phi: &[Vec<f64>], verbs: &[Verb]) -> Vec<f64> {
        softmax(&self.logits(phi, verbs))
    }

    pub fn value(&self, state: &[f64]) -> f64 {
        state.iter().zip(&self.v).map(|(a, b)| a * b).sum()
    }

    /// Index of the most probable candidate; ties go to the lowest index.
    pub fn argmax(&self, phi: &[Vec<f64>], verbs: &[Verb]) -> usize {
        let z = self.logits(phi, verbs);
        let mut best = 0;
        for (i, x) in z.iter().enumerate() {
            if *x > z[best] {
                best = i;
            }
        }
        best
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().flatten().chain(&self.v).all(|x| x.is_finite())
    }

    /// `self - lr * g`.
    pub fn step(&mut self, g: &Grad, lr: f64) {
        for (row, grow) in self.w.iter_mut().zip(&g.w) {
            for (x, d) in row.iter_mut().zip(grow) {
                *x -= lr * d;
            }
        }
        for (x, d) in self.v.iter_mut().zip(&g.v) {
            *x -= lr * d;
        }
    }

    pub fn to_checkpoint(&self) -> String {
        let c = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            feature_version: self.feature_version,
            state_features: STATE_FEATURES.iter().map(|s| s.to_string()).collect(),
            candidate_features: CANDIDATE_FEATURES.iter().map(|s| s.to_string()).collect(),
            templates: Verb::ALL.to_vec(),
            w: self.w.clone(),
            v: self.v.clone(),
        };
        crate::canonical::to_canonical_json(&c)
    }

    pub fn from_checkpoint(text: &str) -> Result<Self, TrainError> {
        let bad = |m: String| TrainError::Checkpoint(m);
        let c: Checkpoint = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported checkpoint {} v{}", c.format, c.version)));
        }
        if c.feature_version != FEATURE_VERSION
            || c.templates != Verb::ALL
            || c.w.len() != N_FEATURES
            || c.w.iter().any(|r| r.len() != N_TEMPLATES)
            || c.v.len() != N_STATE
        {
            return Err(bad("feature layout mismatch".into()));
        }
        let p = PolicyParams {
            feature_version: c.feature_version,
            w: c.w,
            v: c.v,
        };
        if !p.is_finite() {
            return Err(bad("non-finite weights".into()));
        }
        Ok(p)
    }

    pub fn digest(&self) -> String {
        crate::canonical::sha256_hex(self.to_checkpoint())
    }
}

/// Cross-entropy of the teacher choice under the policy.
pub fn ce_loss(p: &PolicyParams, phi: &[Vec<f64>], verbs: &[Verb], target: usize) -> f64 {
    -p.probs(phi, verbs)[target].ln()
}

/// Gradient of [`ce_loss`]: `dL/dz_c = p_c - y_c`, routed to `W[.][verb(c)]`.
pub fn ce_grad(p: &PolicyParams, phi: &[Vec<f64>], verbs: &[Verb], target: usize) -> Grad {
    let probs = p.probs(phi, verbs);
    let mut g = Grad::zeros();
    for (c, (x, verb)) in phi.iter().zip(verbs).enumerate() {
        let dz = probs[c] - (c == target) as u8 as f64;
        let t = verb.index();
        for (f, xf) in x.iter().enumerate() {
            g.w[f][t] += dz * xf;
        }
    }
    g
}

/// One cross-entropy step toward the teacher choice. Returns the loss before
/// the step.
pub fn sft_update(
    p: &PolicyParams,
    phi: &[Vec<f64>],
    verbs: &[Verb],
    teacher: usize,
    lr: f64,
) -> Result<(PolicyParams, f64), TrainError> {
    if teacher >= phi.len() || phi.len() != verbs.len() {
        return Err(TrainError::TeacherNotInCandidates);
    }
    let loss = ce_loss(p, phi, verbs, teacher);
    let mut next = p.clone();
    if lr != 0.0 {
        next.step(&ce_grad(p, phi, verbs, teacher), lr);
    }
    Ok((next, loss))
}
