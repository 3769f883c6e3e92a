//! Decentralized advantage actor-critic.
//!
//! Training alternates between two phases. The team first collects up to
//! `m` joint transitions, each drone sampling from its own actor on its own
//! observation. Then every agent trains on its own slice of the buffer:
//! n-step returns are computed backwards from the critic's bootstrap value,
//! actor and critic gradients are accumulated over the slice, and each
//! network takes exactly one optimizer step.
//!
//! Buffers never span episodes. A drone that crashes contributes its crash
//! transition as a terminal sample and is left out of later batches.

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, WorldConfig};
use crate::env::{Action, EnvError, Transition, World};
use crate::nn::{
    accumulate_actor_grad, accumulate_critic_grad_weighted, actor_forward, actor_sizes, apply_update,
    critic_forward, critic_sizes, sample_action, Checkpoint, CheckpointError, Mlp, NnError, OptimizerKind,
    OptimizerState,
};
use crate::obs::ObsVector;
use crate::seed::{stream, SimRng};

#[derive(Debug, Error)]
pub enum Da2cError {
    #[error("reward sequence is empty")]
    EmptyRewards,
    #[error("discount factor {0} outside [0, 1]")]
    BadGamma(f64),
    #[error("invalid training setting `{key}`: {reason}")]
    BadSetting { key: &'static str, reason: &'static str },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// Learning hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub gamma: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub lambda_pi: f64,
    pub lambda_v: f64,
    pub lambda_h: f64,
    pub optimizer: OptimizerKind,
    /// Global-norm gradient clip applied before each update; `None` disables.
    /// Off by default: with advantages in the hundreds the clip is active on
    /// every batch and erases the difference between informative and
    /// uninformative batches.
    pub grad_clip: Option<f64>,
    /// Fixed multiplier on the critic's linear output, so the network works
    /// in units of `value_scale` rather than raw reward.
    pub value_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lr: 1e-4,
            batch_size: 32,
            lambda_pi: 1.0,
            lambda_v: 1.0,
            lambda_h: 0.001,
            optimizer: OptimizerKind::ADAM,
            grad_clip: None,
            value_scale: 10.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), Da2cError> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Da2cError::BadGamma(self.gamma));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Da2cError::BadSetting {
                key: "lr",
                reason: "must be finite and > 0",
            });
        }
        if self.batch_size < 1 {
            return Err(Da2cError::BadSetting {
                key: "batch_size",
                reason: "must be >= 1",
            });
        }
        for (key, v) in [
            ("lambda_pi", self.lambda_pi),
            ("lambda_v", self.lambda_v),
            ("lambda_h", self.lambda_h),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Da2cError::BadSetting {
                    key,
                    reason: "must be finite and >= 0",
                });
            }
        }
        if !(self.value_scale.is_finite() && self.value_scale > 0.0) {
            return Err(Da2cError::BadSetting {
                key: "value_scale",
                reason: "must be finite and > 0",
            });
        }
        if let Some(c) = self.grad_clip {
            if !(c.is_finite() && c > 0.0) {
                return Err(Da2cError::BadSetting {
                    key: "grad_clip",
                    reason: "must be finite and > 0",
                });
            }
        }
        Ok(())
    }
}

/// Backward n-step returns: `G ← 0` if the last transition is terminal,
/// else `G ← bootstrap`; then for `j = m..1`, `G ← γG + r_j` and
/// `G_j = G`.
pub fn compute_returns(rewards: &[f64], terminal: bool, bootstrap: f64, gamma: f64) -> Result<Vec<f64>, Da2cError> {
    if rewards.is_empty() {
        return Err(Da2cError::EmptyRewards);
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Da2cError::BadGamma(gamma));
    }
    let mut g = if terminal { 0.0 } else { bootstrap };
    let mut out = vec![0.0; rewards.len()];
    for (slot, &r) in out.iter_mut().zip(rewards).rev() {
        g = gamma * g + r;
        *slot = g;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    capacity: usize,
    transitions: Vec<Transition>,
}

/// One agent's view of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentSample {
    pub obs: ObsVector,
    pub action: Action,
    pub reward: f64,
    pub next_obs: ObsVector,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgentBatch {
    pub samples: Vec<AgentSample>,
    /// The last sample ends the agent's episode (mission over or crash).
    pub terminal: bool,
}

impl AgentBatch {
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

impl SampleBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            capacity,
            transitions: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.transitions.len() >= self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        assert!(!self.is_full(), "sample buffer over capacity");
        self.transitions.push(t);
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Whether the buffer ends with the episode's final transition.
    pub fn ends_episode(&self) -> bool {
        self.transitions.last().is_some_and(|t| t.done)
    }

    /// The transitions in which `agent` acted, with its own observation,
    /// action and reward only.
    pub fn agent_batch(&self, agent: usize) -> AgentBatch {
        let mut batch = AgentBatch::default();
        for t in &self.transitions {
            if let Some(action) = t.joint_action[agent] {
                batch.samples.push(AgentSample {
                    obs: t.joint_obs[agent],
                    action,
                    reward: t.joint_reward[agent],
                    next_obs: t.joint_next_obs[agent],
                });
                batch.terminal = t.done || !t.next_operative[agent];
            }
        }
        batch
    }
}

/// One drone's actor, critic and their optimizer states.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentLearner {
    pub index: usize,
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_opt: OptimizerState,
    pub critic_opt: OptimizerState,
    pub value_scale: f64,
}

impl AgentLearner {
    pub fn new(index: usize, cfg: &TrainConfig, rng: &mut SimRng) -> Self {
        let actor = Mlp::glorot(&actor_sizes(Action::COUNT), rng);
        let critic = Mlp::glorot(&critic_sizes(), rng);
        Self::from_networks(index, actor, critic, cfg)
    }

    pub fn from_networks(index: usize, actor: Mlp, critic: Mlp, cfg: &TrainConfig) -> Self {
        Self {
            index,
            actor_opt: OptimizerState::new(cfg.optimizer, cfg.lr, actor.num_params()),
            critic_opt: OptimizerState::new(cfg.optimizer, cfg.lr, critic.num_params()),
            value_scale: cfg.value_scale,
            actor,
            critic,
        }
    }

    pub fn policy(&self, obs: &ObsVector) -> Result<Vec<f64>, NnError> {
        actor_forward(&self.actor, obs.as_slice())
    }

    pub fn value(&self, obs: &ObsVector) -> Result<f64, NnError> {
        Ok(self.value_scale * critic_forward(&self.critic, obs.as_slice())?)
    }

    pub fn act(&self, obs: &ObsVector, rng: &mut SimRng) -> Result<Action, NnError> {
        let probs = self.policy(obs)?;
        Ok(Action::ALL[sample_action(&probs, rng)])
    }
}

/// Diagnostics from one `train_agent` call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainStats {
    pub samples: usize,
    pub mean_advantage: f64,
    pub actor_grad_norm: f64,
    pub critic_grad_norm: f64,
}

/// Accumulates actor and critic gradients over `batch` and applies one
/// update to each network.
pub fn train_agent(learner: &mut AgentLearner, batch: &AgentBatch, cfg: &TrainConfig) -> Result<TrainStats, Da2cError> {
    let last = batch.samples.last().ok_or(Da2cError::EmptyRewards)?;
    let bootstrap = if batch.terminal {
        0.0
    } else {
        learner.value(&last.next_obs)?
    };
    let rewards: Vec<f64> = batch.samples.iter().map(|s| s.reward).collect();
    let returns = compute_returns(&rewards, batch.terminal, bootstrap, cfg.gamma)?;

    let mut adv_sum = 0.0;
    for (s, &g) in batch.samples.iter().zip(&returns) {
        let advantage = g - learner.value(&s.obs)?;
        adv_sum += advantage;
        accumulate_actor_grad(
            &mut learner.actor,
            s.obs.as_slice(),
            s.action.index(),
            cfg.lambda_pi * advantage,
            cfg.lambda_h,
        )?;
        // (G - sV)² = s²(G/s - V)²
        let scale = learner.value_scale;
        accumulate_critic_grad_weighted(&mut learner.critic, s.obs.as_slice(), g / scale, cfg.lambda_v * scale * scale)?;
    }
    let actor_grad_norm = apply_update(&mut learner.actor, &mut learner.actor_opt, cfg.grad_clip);
    let critic_grad_norm = apply_update(&mut learner.critic, &mut learner.critic_opt, cfg.grad_clip);
    Ok(TrainStats {
        samples: batch.samples.len(),
        mean_advantage: adv_sum / batch.samples.len() as f64,
        actor_grad_norm,
        critic_grad_norm,
    })
}

/// Steps the team for up to `m` transitions, stopping early at episode end.
///
/// `obs` must hold the current joint observation and is advanced in place.
pub fn collect_batch(
    world: &mut World,
    obs: &mut Vec<ObsVector>,
    learners: &[AgentLearner],
    m: usize,
    rng: &mut SimRng,
) -> Result<SampleBuffer, Da2cError> {
    let mut buffer = SampleBuffer::new(m);
    while !buffer.is_full() && !world.is_done() {
        let mut joint_action = Vec::with_capacity(learners.len());
        let mut acted = Vec::with_capacity(learners.len());
        for (learner, drone) in learners.iter().zip(&world.drones) {
            if drone.operative {
                let a = learner.act(&obs[learner.index], rng)?;
                joint_action.push(a);
                acted.push(Some(a));
            } else {
                // ignored by the world
                joint_action.push(Action::North);
                acted.push(None);
            }
        }
        let (next_obs, result) = world.step(&joint_action, rng)?;
        buffer.push(Transition {
            joint_obs: std::mem::replace(obs, next_obs.clone()),
            joint_action: acted,
            joint_reward: result.rewards,
            joint_next_obs: next_obs,
            next_operative: world.drones.iter().map(|d| d.operative).collect(),
            done: result.done,
        });
    }
    Ok(buffer)
}

/// Per-episode training metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub team_reward: f64,
    pub length: usize,
    pub targets_detected: usize,
    pub crashes: usize,
}

/// Owns a team of learners and drives training episode by episode.
#[derive(Debug, Clone)]
pub struct Trainer {
    world_cfg: WorldConfig,
    cfg: TrainConfig,
    learners: Vec<AgentLearner>,
    rng: SimRng,
    episodes_done: usize,
}

impl Trainer {
    /// Learner `i` is initialized from stream `i + 1` of `seed`; stream 0
    /// drives the environment and action sampling.
    pub fn new(world_cfg: &WorldConfig, cfg: &TrainConfig, seed: u64) -> Result<Self, Da2cError> {
        world_cfg.validate()?;
        cfg.validate()?;
        let learners = (0..world_cfg.n_drones)
            .map(|i| AgentLearner::new(i, cfg, &mut stream(seed, i as u64 + 1)))
            .collect();
        Ok(Self {
            world_cfg: world_cfg.clone(),
            cfg: cfg.clone(),
            learners,
            rng: stream(seed, 0),
            episodes_done: 0,
        })
    }

    pub fn learners(&self) -> &[AgentLearner] {
        &self.learners
    }

    pub fn into_learners(self) -> Vec<AgentLearner> {
        self.learners
    }

    pub fn episodes_done(&self) -> usize {
        self.episodes_done
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(
            self.learners.iter().map(|l| l.actor.clone()).collect(),
            self.learners.iter().map(|l| l.critic.clone()).collect(),
        )
        .expect("a validated team has at least one agent")
    }

    pub fn run_episode(&mut self) -> Result<EpisodeMetrics, Da2cError> {
        let (mut world, mut obs) = World::reset_with_rng(&self.world_cfg, &mut self.rng)?;
        while !world.is_done() {
            let buffer = collect_batch(&mut world, &mut obs, &self.learners, self.cfg.batch_size, &mut self.rng)?;
            let cfg = &self.cfg;
            self.learners
                .par_iter_mut()
                .map(|learner| {
                    let batch = buffer.agent_batch(learner.index);
                    if batch.is_empty() {
                        Ok(())
                    } else {
                        train_agent(learner, &batch, cfg).map(|_| ())
                    }
                })
                .collect::<Result<(), Da2cError>>()?;
        }
        let metrics = EpisodeMetrics {
            episode: self.episodes_done,
            team_reward: world.team_reward(),
            length: world.steps(),
            targets_detected: world.detected_count(),
            crashes: world.crashes(),
        };
        self.episodes_done += 1;
        Ok(metrics)
    }
}

/// Trains a fresh team for `episodes` episodes.
///
/// `on_episode` sees every episode's metrics together with the learners
/// after that episode's updates; an error from it aborts training.
pub fn run_training<F>(
    world_cfg: &WorldConfig,
    cfg: &TrainConfig,
    episodes: usize,
    seed: u64,
    mut on_episode: F,
) -> Result<(Vec<AgentLearner>, Vec<EpisodeMetrics>), Da2cError>
where
    F: FnMut(&EpisodeMetrics, &Trainer) -> Result<(), Da2cError>,
{
    let mut trainer = Trainer::new(world_cfg, cfg, seed)?;
    let mut metrics = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let m = trainer.run_episode()?;
        on_episode(&m, &trainer)?;
        metrics.push(m);
    }
    Ok((trainer.into_learners(), metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{DroneState, TargetState};
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;

    fn discounted_oracle(rewards: &[f64], terminal: bool, bootstrap: f64, gamma: f64) -> Vec<f64> {
        let m = rewards.len();
        (0..m)
            .map(|j| {
                let mut s = 0.0;
                for (k, r) in rewards.iter().enumerate().skip(j) {
                    s += gamma.powi((k - j) as i32) * r;
                }
                if !terminal {
                    s += gamma.powi((m - j) as i32) * bootstrap;
                }
                s
            })
            .collect()
    }

    #[test]
    fn returns_examples() {
        assert_eq!(compute_returns(&[1.0, 1.0, 1.0], true, 123.0, 1.0).unwrap(), vec![3.0, 2.0, 1.0]);
        let g = compute_returns(&[0.5], false, 2.0, 0.99).unwrap();
        assert!((g[0] - 2.48).abs() < 1e-12);
        assert!(matches!(compute_returns(&[], true, 0.0, 0.9), Err(Da2cError::EmptyRewards)));
        assert!(matches!(compute_returns(&[1.0], true, 0.0, 1.5), Err(Da2cError::BadGamma(_))));
    }

    #[test]
    fn gamma_zero_returns_immediate_rewards() {
        let r = [3.0, -1.0, 7.5];
        assert_eq!(compute_returns(&r, false, 100.0, 0.0).unwrap(), r.to_vec());
    }

    proptest! {
        #[test]
        fn returns_match_closed_form(
            rewards in proptest::collection::vec(-1000.0..1000.0f64, 1..=64),
            terminal in any::<bool>(),
            bootstrap in -3000.0..3000.0f64,
            gamma in prop_oneof![Just(0.0), Just(0.5), Just(0.99), Just(1.0), 0.0..=1.0f64],
        ) {
            let got = compute_returns(&rewards, terminal, bootstrap, gamma).unwrap();
            let want = discounted_oracle(&rewards, terminal, bootstrap, gamma);
            for (a, b) in got.iter().zip(&want) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{} vs {}", a, b);
            }
        }
    }

    fn noiseless_world(n_drones: usize) -> (World, Vec<ObsVector>) {
        let cfg = WorldConfig {
            n_drones,
            ..WorldConfig::default().noiseless()
        };
        World::reset(&cfg, 11).unwrap()
    }

    fn team(n: usize, seed: u64) -> Vec<AgentLearner> {
        let cfg = TrainConfig::default();
        (0..n).map(|i| AgentLearner::new(i, &cfg, &mut stream(seed, i as u64))).collect()
    }

    #[test]
    fn full_batch_when_episode_is_long() {
        let (mut w, mut obs) = noiseless_world(3);
        let learners = team(3, 0);
        let buf = collect_batch(&mut w, &mut obs, &learners, 32, &mut rng_from_seed(0)).unwrap();
        // random initial policies rarely finish a 900-step mission in 32 steps
        if !w.is_done() {
            assert_eq!(buf.len(), 32);
        }
        assert!(buf.transitions().iter().all(|t| t.joint_obs.len() == 3 && t.joint_reward.len() == 3));
        assert_eq!(obs, w.observations());
    }

    #[test]
    fn short_batch_on_termination() {
        let cfg = WorldConfig {
            horizon: 5,
            n_drones: 2,
            ..WorldConfig::default().noiseless()
        };
        let (mut w, mut obs) = World::reset(&cfg, 2).unwrap();
        let learners = team(2, 1);
        let buf = collect_batch(&mut w, &mut obs, &learners, 32, &mut rng_from_seed(0)).unwrap();
        assert!(w.is_done());
        assert!(buf.len() <= 5);
        assert!(buf.ends_episode());
    }

    #[test]
    fn collection_is_deterministic() {
        let learners = team(3, 2);
        let run = || {
            let (mut w, mut obs) = noiseless_world(3);
            collect_batch(&mut w, &mut obs, &learners, 32, &mut rng_from_seed(77)).unwrap()
        };
        assert_eq!(run(), run());
    }

    fn sample(obs: [f64; 12], action: Action, reward: f64) -> AgentSample {
        AgentSample {
            obs: ObsVector(obs),
            action,
            reward,
            next_obs: ObsVector(obs),
        }
    }

    #[test]
    fn crashed_agent_slice_is_terminal_and_stops() {
        let cfg = WorldConfig::default().noiseless();
        let drones = vec![
            DroneState {
                x: 0.3,
                y: 20.0,
                heading: 0.0,
                dir: 0.0,
                speed: 0.0,
                operative: true,
                battery_steps_left: 900,
            },
            DroneState {
                x: 20.0,
                y: 20.0,
                heading: 0.0,
                dir: 0.0,
                speed: 0.0,
                operative: true,
                battery_steps_left: 900,
            },
        ];
        let targets = vec![TargetState {
            x: 55.0,
            y: 40.0,
            detected: false,
        }];
        let mut w = World::from_parts(&cfg, drones, targets).unwrap();
        let mut obs = w.observations();
        // an actor that always flies west
        let mut learners = team(2, 3);
        let last = learners[0].actor.num_layers() - 1;
        learners[0].actor.biases_mut(last)[Action::West.index()] = 50.0;
        let buf = collect_batch(&mut w, &mut obs, &learners, 8, &mut rng_from_seed(0)).unwrap();
        let b0 = buf.agent_batch(0);
        assert_eq!(b0.samples.len(), 1);
        assert!(b0.terminal);
        assert!((b0.samples[0].reward + 500.1).abs() < 1e-9);
        let b1 = buf.agent_batch(1);
        assert_eq!(b1.samples.len(), buf.len());
        assert!(!b1.terminal);
    }

    #[test]
    fn zero_advantage_leaves_only_entropy() {
        let cfg = TrainConfig::default();
        let mut learner = AgentLearner::from_networks(
            0,
            Mlp::zeros(&actor_sizes(6)),
            Mlp::zeros(&critic_sizes()),
            &cfg,
        );
        // zero critic and zero rewards with a terminal slice: G = V = 0
        let batch = AgentBatch {
            samples: vec![sample([0.5; 12], Action::East, 0.0); 4],
            terminal: true,
        };
        let stats = train_agent(&mut learner, &batch, &cfg).unwrap();
        assert_eq!(stats.mean_advantage, 0.0);
        // uniform policy: the entropy gradient vanishes up to rounding
        assert!(learner.actor.params().iter().all(|&p| p.abs() < 1e-12));
        assert_eq!(learner.actor_opt.step, 1);
        assert_eq!(learner.critic_opt.step, 1);
    }

    #[test]
    fn positive_advantage_raises_probability() {
        let cfg = TrainConfig::default();
        let mut rng = rng_from_seed(8);
        let mut learner = AgentLearner::new(0, &cfg, &mut rng);
        let o = [0.3, 0.6, 1.0, 0.0, 0.2, 0.0, 0.9, 0.0, 0.4, 0.7, 0.6, 0.3];
        let before = learner.policy(&ObsVector(o)).unwrap()[Action::South.index()];
        let batch = AgentBatch {
            samples: vec![sample(o, Action::South, 10.0)],
            terminal: true,
        };
        train_agent(&mut learner, &batch, &cfg).unwrap();
        let after = learner.policy(&ObsVector(o)).unwrap()[Action::South.index()];
        assert!(after > before, "{before} -> {after}");
    }

    #[test]
    fn critic_regresses_constant_return() {
        let cfg = TrainConfig::default();
        let mut learner = AgentLearner::new(0, &cfg, &mut rng_from_seed(9));
        let o = [0.5, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.5, 0.5, 0.5, 0.5];
        let g = 2.0;
        let batch = AgentBatch {
            samples: vec![sample(o, Action::North, g); 4],
            terminal: true,
        };
        // returns of a terminal slice of four 2.0 rewards at γ = 0
        let cfg = TrainConfig { gamma: 0.0, ..cfg };
        for _ in 0..500 {
            train_agent(&mut learner, &batch, &cfg).unwrap();
        }
        let v = learner.value(&ObsVector(o)).unwrap();
        assert!((v - g).abs() < 0.1 * g, "V = {v}");
    }

    #[test]
    fn gamma_zero_targets_immediate_reward() {
        let cfg = TrainConfig {
            gamma: 0.0,
            lambda_h: 0.0,
            ..Default::default()
        };
        let mut rng = rng_from_seed(10);
        let learner = AgentLearner::new(0, &cfg, &mut rng);
        let o = [0.2; 12];
        let batch = AgentBatch {
            samples: vec![sample(o, Action::West, 5.0)],
            terminal: false,
        };
        // expected actor gradient: -∇log π(a) · (r - V(o))
        let mut expected = learner.actor.clone();
        let adv = 5.0 - learner.value(&ObsVector(o)).unwrap();
        accumulate_actor_grad(&mut expected, &o, Action::West.index(), adv, 0.0).unwrap();
        let mut via_train = learner.clone();
        let mut opt_expected = learner.actor_opt.clone();
        apply_update(&mut expected, &mut opt_expected, cfg.grad_clip);
        train_agent(&mut via_train, &batch, &cfg).unwrap();
        assert_eq!(via_train.actor.params(), expected.params());
    }

    #[test]
    fn training_is_reproducible() {
        let cfg = WorldConfig {
            horizon: 60,
            ..Default::default()
        };
        let tc = TrainConfig::default();
        let (_, a) = run_training(&cfg, &tc, 3, 5, |_, _| Ok(())).unwrap();
        let (_, b) = run_training(&cfg, &tc, 3, 5, |_, _| Ok(())).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|m| m.length <= 60));
    }

    #[test]
    fn zero_episodes() {
        let (learners, metrics) =
            run_training(&WorldConfig::default(), &TrainConfig::default(), 0, 1, |_, _| Ok(())).unwrap();
        assert_eq!(learners.len(), 3);
        assert!(metrics.is_empty());
    }

    #[test]
    fn callback_errors_propagate() {
        let cfg = WorldConfig {
            horizon: 10,
            ..Default::default()
        };
        let err = run_training(&cfg, &TrainConfig::default(), 2, 0, |_, _| {
            Err(Da2cError::Checkpoint(CheckpointError::BadMagic))
        });
        assert!(matches!(err, Err(Da2cError::Checkpoint(_))));
    }
}
