//! Dense ReLU networks with a hand-written backward pass.
//!
//! Just enough machinery for the per-agent actor (softmax over the six
//! actions) and critic (scalar state value): forward passes, loss-gradient
//! accumulation, an optimizer step and a binary checkpoint format.

mod checkpoint;
mod mlp;
mod optim;

pub use checkpoint::{Checkpoint, CheckpointError, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use mlp::{Mlp, Trace};
pub use optim::{apply_update, clip_global_norm, OptimizerKind, OptimizerState};

use rand::Rng;
use thiserror::Error;

use crate::obs::OBS_LEN;

/// Hidden widths of both networks.
pub const HIDDEN: [usize; 2] = [200, 100];

pub fn actor_sizes(n_actions: usize) -> Vec<usize> {
    vec![OBS_LEN, HIDDEN[0], HIDDEN[1], n_actions]
}

pub fn critic_sizes() -> Vec<usize> {
    vec![OBS_LEN, HIDDEN[0], HIDDEN[1], 1]
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("input has length {got}, network expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("action {action} out of range for {n} outputs")]
    ActionOutOfRange { action: usize, n: usize },
    #[error("non-finite advantage or target")]
    NonFiniteTarget,
    #[error("network output is {got}-dimensional, expected {expected}")]
    OutputSize { expected: usize, got: usize },
}

/// Numerically stable softmax (max-shifted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `log softmax` via log-sum-exp.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&z| z - lse).collect()
}

/// Shannon entropy in nats.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Action probabilities of an actor network.
pub fn actor_forward(params: &Mlp, obs: &[f64]) -> Result<Vec<f64>, NnError> {
    Ok(softmax(&params.forward(obs)?))
}

/// State-value estimate of a critic network.
pub fn critic_forward(params: &Mlp, obs: &[f64]) -> Result<f64, NnError> {
    let out = params.forward(obs)?;
    if out.len() != 1 {
        return Err(NnError::OutputSize {
            expected: 1,
            got: out.len(),
        });
    }
    Ok(out[0])
}

/// Categorical draw by inverse CDF on a single uniform.
pub fn sample_action<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the total mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Gradient of the actor loss with respect to the logits:
/// `-log π(a) · advantage - entropy_weight · H(π)`.
pub fn actor_logit_grad(probs: &[f64], action: usize, advantage: f64, entropy_weight: f64) -> Vec<f64> {
    let h = entropy(probs);
    probs
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let indicator = if k == action { 1.0 } else { 0.0 };
            let log_p = if p > 0.0 { p.ln() } else { 0.0 };
            advantage * (p - indicator) + entropy_weight * p * (log_p + h)
        })
        .collect()
}

/// Adds the gradient of `-log π(a|o) · advantage - entropy_weight · H(π(·|o))`
/// to the actor's accumulators.
pub fn accumulate_actor_grad(
    params: &mut Mlp,
    obs: &[f64],
    action: usize,
    advantage: f64,
    entropy_weight: f64,
) -> Result<(), NnError> {
    if !advantage.is_finite() || !entropy_weight.is_finite() {
        return Err(NnError::NonFiniteTarget);
    }
    let trace = params.forward_trace(obs)?;
    let logits = trace.output();
    if action >= logits.len() {
        return Err(NnError::ActionOutOfRange {
            action,
            n: logits.len(),
        });
    }
    if advantage == 0.0 && entropy_weight == 0.0 {
        return Ok(());
    }
    let probs = softmax(logits);
    let d_logits = actor_logit_grad(&probs, action, advantage, entropy_weight);
    params.backward(&trace, &d_logits);
    Ok(())
}

/// Adds the gradient of `(target - V(o))²` to the critic's accumulators.
pub fn accumulate_critic_grad(params: &mut Mlp, obs: &[f64], target: f64) -> Result<(), NnError> {
    accumulate_critic_grad_weighted(params, obs, target, 1.0)
}

/// As [`accumulate_critic_grad`] with the loss scaled by `weight`.
pub fn accumulate_critic_grad_weighted(
    params: &mut Mlp,
    obs: &[f64],
    target: f64,
    weight: f64,
) -> Result<(), NnError> {
    if !target.is_finite() || !weight.is_finite() {
        return Err(NnError::NonFiniteTarget);
    }
    let trace = params.forward_trace(obs)?;
    let value = trace.output();
    if value.len() != 1 {
        return Err(NnError::OutputSize {
            expected: 1,
            got: value.len(),
        });
    }
    let d_value = -2.0 * weight * (target - value[0]);
    params.backward(&trace, &[d_value]);
    Ok(())
}
