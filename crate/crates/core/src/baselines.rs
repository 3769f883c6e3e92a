//! Reference policies, the evaluation harness and team-size / target-count
//! sweeps.
//!
//! Evaluation episode `k` draws everything (target placement, dynamics
//! noise, detections, action sampling) from `seed::stream(seed, k)`, so
//! episodes can run in any order or in parallel and still reproduce.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::WorldConfig;
use crate::da2c::{run_training, Da2cError, TrainConfig};
use crate::env::{rollout, Action, EnvError, World};
use crate::nn::{actor_forward, argmax, sample_action, Checkpoint, NnError};
use crate::obs::ObsVector;
use crate::seed::{derive_seed, stream, SimRng};

/// Wall distance below which the collision-free baseline turns around.
pub const WALL_MARGIN_M: f64 = 2.0;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluation needs at least one episode")]
    NoEpisodes,
    #[error("sweep needs at least one value")]
    EmptySweep,
    #[error("checkpoint holds {got} agents but the world has {expected} drones")]
    AgentCount { expected: usize, got: usize },
    #[error("checkpoint actors have {0} outputs, expected 6")]
    ActorOutputs(usize),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Training(#[from] Da2cError),
}

/// Uniform over all six actions, or over the four moves only.
pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, include_rotations: bool) -> Action {
    if include_rotations {
        Action::ALL[rng.random_range(0..Action::COUNT)]
    } else {
        Action::MOVES[rng.random_range(0..Action::MOVES.len())]
    }
}

/// Compass index of each wall in `ObsVector::wall_distances_m` order.
const WALLS: [Action; 4] = [Action::North, Action::East, Action::South, Action::West];

/// Random moves that turn around near the arena boundary.
///
/// Away from the walls it picks uniformly among the allowed actions. Once
/// any wall is closer than the margin it reverses its current direction if
/// that direction heads into a nearby wall, otherwise it flies straight away
/// from the nearest wall. The escape action is kept while it still leads
/// away from some nearby wall and dropped once every wall is clear.
#[derive(Debug, Clone)]
pub struct CollisionFreePolicy {
    cfg: WorldConfig,
    margin_m: f64,
    include_rotations: bool,
    last_move: Vec<Option<Action>>,
    escape: Vec<Option<Action>>,
}

impl CollisionFreePolicy {
    pub fn new(cfg: &WorldConfig, include_rotations: bool) -> Self {
        Self {
            cfg: cfg.clone(),
            margin_m: WALL_MARGIN_M,
            include_rotations,
            last_move: vec![None; cfg.n_drones],
            escape: vec![None; cfg.n_drones],
        }
    }

    pub fn act<R: Rng + ?Sized>(&mut self, agent: usize, obs: &ObsVector, rng: &mut R) -> Action {
        let walls = obs.wall_distances_m(&self.cfg);
        let near: Vec<Action> = WALLS
            .iter()
            .zip(walls)
            .filter(|&(_, d)| d < self.margin_m)
            .map(|(&w, _)| w)
            .collect();
        let action = if near.is_empty() {
            self.escape[agent] = None;
            random_policy(rng, self.include_rotations)
        } else {
            let heads_into_wall = |a: Option<Action>| a.is_some_and(|a| near.contains(&a));
            let leaves_near_wall = |a: Action| near.iter().any(|w| w.reverse() == a);
            match self.escape[agent] {
                Some(e) if leaves_near_wall(e) => e,
                _ => {
                    let e = if heads_into_wall(self.last_move[agent]) {
                        self.last_move[agent].expect("checked above").reverse()
                    } else {
                        let nearest = (0..4)
                            .min_by(|&a, &b| walls[a].total_cmp(&walls[b]))
                            .expect("four walls");
                        WALLS[nearest].reverse()
                    };
                    self.escape[agent] = Some(e);
                    e
                }
            }
        };
        if action.is_move() {
            self.last_move[agent] = Some(action);
        }
        action
    }
}

/// Which policy to evaluate.
#[derive(Debug, Clone)]
pub enum PolicyKind {
    /// Trained actors, one per drone.
    Learned(Arc<Checkpoint>),
    Random,
    CollisionFree,
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::Learned(_) => "learned",
            PolicyKind::Random => "random",
            PolicyKind::CollisionFree => "collision-free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Learned policies act greedily instead of sampling.
    pub greedy: bool,
    /// Random baseline draws from all six actions (otherwise moves only).
    pub random_rotations: bool,
    /// Collision-free baseline may also pick rotations when clear of walls.
    pub collision_free_rotations: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            greedy: false,
            random_rotations: true,
            collision_free_rotations: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub team_reward: f64,
    pub length: usize,
    pub targets_detected: usize,
    pub crashes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub policy: &'static str,
    pub episodes: usize,
    pub mean_reward: f64,
    /// Population standard deviation of the per-episode team reward.
    pub std_reward: f64,
    pub mean_steps: f64,
    /// Fraction of all targets found.
    pub detection_rate: f64,
    /// Fraction of all drones that crashed.
    pub crash_rate: f64,
    pub records: Vec<EpisodeRecord>,
}

impl EvalSummary {
    pub fn from_records(policy: &'static str, cfg: &WorldConfig, records: Vec<EpisodeRecord>) -> Self {
        let n = records.len() as f64;
        let mean = records.iter().map(|r| r.team_reward).sum::<f64>() / n;
        let var = records.iter().map(|r| (r.team_reward - mean).powi(2)).sum::<f64>() / n;
        let steps = records.iter().map(|r| r.length as f64).sum::<f64>() / n;
        let found: usize = records.iter().map(|r| r.targets_detected).sum();
        let crashes: usize = records.iter().map(|r| r.crashes).sum();
        Self {
            policy,
            episodes: records.len(),
            mean_reward: mean,
            std_reward: var.sqrt(),
            mean_steps: steps,
            detection_rate: found as f64 / (n * cfg.n_targets as f64),
            crash_rate: crashes as f64 / (n * cfg.n_drones as f64),
            records,
        }
    }
}

enum Runner {
    Learned { actors: Arc<Checkpoint>, greedy: bool },
    Random { rotations: bool },
    CollisionFree(Box<CollisionFreePolicy>),
}

impl Runner {
    fn act(&mut self, agent: usize, obs: &ObsVector, rng: &mut SimRng) -> Result<Action, NnError> {
        Ok(match self {
            Runner::Learned { actors, greedy } => {
                let probs = actor_forward(&actors.actors[agent], obs.as_slice())?;
                let i = if *greedy { argmax(&probs) } else { sample_action(&probs, rng) };
                Action::ALL[i]
            }
            Runner::Random { rotations } => random_policy(rng, *rotations),
            Runner::CollisionFree(p) => p.act(agent, obs, rng),
        })
    }
}

fn check_learned(ck: &Checkpoint, cfg: &WorldConfig) -> Result<(), EvalError> {
    if ck.agent_count() != cfg.n_drones {
        return Err(EvalError::AgentCount {
            expected: cfg.n_drones,
            got: ck.agent_count(),
        });
    }
    let outputs = *ck.actors[0].sizes().last().expect("sizes");
    if outputs != Action::COUNT {
        return Err(EvalError::ActorOutputs(outputs));
    }
    Ok(())
}

/// Plays one evaluation episode with the RNG stream of episode `index`.
pub fn evaluate_episode(
    kind: &PolicyKind,
    cfg: &WorldConfig,
    seed: u64,
    index: usize,
    opts: &EvalOptions,
) -> Result<(EpisodeRecord, crate::env::EpisodeLog), EvalError> {
    let mut rng = stream(seed, index as u64);
    let mut runner = match kind {
        PolicyKind::Learned(ck) => Runner::Learned {
            actors: Arc::clone(ck),
            greedy: opts.greedy,
        },
        PolicyKind::Random => Runner::Random {
            rotations: opts.random_rotations,
        },
        PolicyKind::CollisionFree => {
            Runner::CollisionFree(Box::new(CollisionFreePolicy::new(cfg, opts.collision_free_rotations)))
        }
    };
    let (mut world, obs) = World::reset_with_rng(cfg, &mut rng)?;
    let mut failure = None;
    let log = rollout(&mut world, obs, &mut rng, |w, obs, rng| {
        (0..obs.len())
            .map(|i| {
                if !w.drones[i].operative {
                    return Action::North;
                }
                runner.act(i, &obs[i], rng).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    Action::North
                })
            })
            .collect()
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let record = EpisodeRecord {
        episode: index,
        team_reward: world.team_reward(),
        length: world.steps(),
        targets_detected: world.detected_count(),
        crashes: world.crashes(),
    };
    Ok((record, log))
}

/// Runs `episodes` episodes of a frozen policy and aggregates them.
pub fn evaluate(
    kind: &PolicyKind,
    cfg: &WorldConfig,
    episodes: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<EvalSummary, EvalError> {
    if episodes == 0 {
        return Err(EvalError::NoEpisodes);
    }
    cfg.validate().map_err(EnvError::from)?;
    if let PolicyKind::Learned(ck) = kind {
        check_learned(ck, cfg)?;
    }
    let records = (0..episodes)
        .into_par_iter()
        .map(|k| evaluate_episode(kind, cfg, seed, k, opts).map(|(r, _)| r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalSummary::from_records(kind.label(), cfg, records))
}

/// Ordinary least-squares line through `(x, y)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; `NaN` when undefined (fewer than two
    /// distinct x values or constant y).
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return LinearFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            r2: f64::NAN,
        };
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { f64::NAN } else { sxy * sxy / (sxx * syy) };
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    TeamSize,
    TargetCount,
}

impl SweepKind {
    pub fn label(self) -> &'static str {
        match self {
            SweepKind::TeamSize => "team-size",
            SweepKind::TargetCount => "target-count",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: usize,
    pub summary: EvalSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub rows: Vec<SweepRow>,
    /// Mean evaluation reward against the swept value.
    pub fit: LinearFit,
}

/// Settings shared by both sweeps.
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub world: WorldConfig,
    pub train: TrainConfig,
    pub train_episodes: usize,
    pub eval_episodes: usize,
    pub seed: u64,
    pub eval: EvalOptions,
}

/// Trains a fresh team for each value and evaluates its learned policy.
///
/// Value `k` (by position) trains with `derive_seed(seed, k)` and evaluates
/// with `derive_seed(seed, 1000 + k)`.
pub fn sweep(kind: SweepKind, values: &[usize], s: &SweepSettings) -> Result<SweepReport, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptySweep);
    }
    if s.eval_episodes == 0 {
        return Err(EvalError::NoEpisodes);
    }
    let mut rows = Vec::with_capacity(values.len());
    for (k, &v) in values.iter().enumerate() {
        let world = match kind {
            SweepKind::TeamSize => WorldConfig {
                n_drones: v,
                ..s.world.clone()
            },
            SweepKind::TargetCount => WorldConfig {
                n_targets: v,
                ..s.world.clone()
            },
        };
        let (learners, _) = run_training(&world, &s.train, s.train_episodes, derive_seed(s.seed, k as u64), |_, _| Ok(()))?;
        let ck = Checkpoint::new(
            learners.iter().map(|l| l.actor.clone()).collect(),
            learners.iter().map(|l| l.critic.clone()).collect(),
        )
        .expect("trained team is non-empty");
        let summary = evaluate(
            &PolicyKind::Learned(Arc::new(ck)),
            &world,
            s.eval_episodes,
            derive_seed(s.seed, 1000 + k as u64),
            &s.eval,
        )?;
        rows.push(SweepRow { value: v, summary });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.value as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.summary.mean_reward).collect();
    Ok(SweepReport {
        kind,
        fit: linear_fit(&xs, &ys),
        rows,
    })
}

pub fn sweep_team_size(sizes: &[usize], s: &SweepSettings) -> Result<SweepReport, EvalError> {
    sweep(SweepKind::TeamSize, sizes, s)
}

pub fn sweep_target_count(counts: &[usize], s: &SweepSettings) -> Result<SweepReport, EvalError> {
    sweep(SweepKind::TargetCount, counts, s)
}
