//! The search world: drones, targets, stochastic dynamics, rewards and
//! termination.
//!
//! Coordinates are metres with `x` pointing east and `y` north; angles are
//! radians measured counter-clockwise from east and kept in `[-π, π)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, WorldConfig};
use crate::obs::{encode, ObsVector, WorldSummary};
use crate::seed::{rng_from_seed, SimRng};
use crate::sensing::{sense, wrap_angle, SensorModel};

/// Side of the square spawn region in the south-west corner, metres.
pub const START_SQUARE_M: f64 = 5.0;
/// Minimum clearance between a target and the spawn region, metres.
pub const TARGET_CLEARANCE_M: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step called on a finished episode ({0:?})")]
    EpisodeFinished(DoneReason),
    #[error("joint action has {got} entries, expected {expected}")]
    ActionCount { got: usize, expected: usize },
    #[error("action index {0} is not in 0..6")]
    BadAction(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    North,
    East,
    South,
    West,
    RotateCw,
    RotateCcw,
}

impl Action {
    pub const COUNT: usize = 6;
    pub const ALL: [Action; 6] = [
        Action::North,
        Action::East,
        Action::South,
        Action::West,
        Action::RotateCw,
        Action::RotateCcw,
    ];
    pub const MOVES: [Action; 4] = [Action::North, Action::East, Action::South, Action::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self, EnvError> {
        Self::ALL.get(i).copied().ok_or(EnvError::BadAction(i))
    }

    pub fn is_move(self) -> bool {
        self.compass().is_some()
    }

    /// Desired travel direction of a move action.
    pub fn compass(self) -> Option<f64> {
        match self {
            Action::North => Some(FRAC_PI_2),
            Action::East => Some(0.0),
            Action::South => Some(-FRAC_PI_2),
            Action::West => Some(-PI),
            Action::RotateCw | Action::RotateCcw => None,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Action::North => Action::South,
            Action::South => Action::North,
            Action::East => Action::West,
            Action::West => Action::East,
            Action::RotateCw => Action::RotateCcw,
            Action::RotateCcw => Action::RotateCw,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Action::North => "N",
            Action::East => "E",
            Action::South => "S",
            Action::West => "W",
            Action::RotateCw => "CW",
            Action::RotateCcw => "CCW",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroneState {
    pub x: f64,
    pub y: f64,
    /// Camera orientation.
    pub heading: f64,
    /// Direction of the last translation.
    pub dir: f64,
    pub speed: f64,
    pub operative: bool,
    pub battery_steps_left: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub x: f64,
    pub y: f64,
    pub detected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DoneReason {
    Running,
    AllTargetsFound,
    AllDronesDown,
    HorizonReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub rewards: Vec<f64>,
    pub newly_detected: Vec<usize>,
    /// Drones that crashed during this step.
    pub crashed: Vec<usize>,
    pub done: bool,
    pub done_reason: DoneReason,
}

/// One joint step as stored in the sample buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub joint_obs: Vec<ObsVector>,
    /// `None` for drones that were already down and did not act.
    pub joint_action: Vec<Option<Action>>,
    pub joint_reward: Vec<f64>,
    pub joint_next_obs: Vec<ObsVector>,
    /// Operative flags after the step; an acting drone that is no longer
    /// operative crashed in this transition.
    pub next_operative: Vec<bool>,
    pub done: bool,
}

/// Applies one action to one drone.
///
/// Moves perturb the compass direction by `N(0, σ_d)` and the nominal speed
/// by `N(0, σ_v)` (clamped at zero) and leave the heading alone; rotations
/// perturb the yaw step by `N(0, σ_y)`, do not translate and zero the speed.
/// Both draw their noise from `rng` even when the deviations are zero.
pub fn apply_action<R: Rng + ?Sized>(
    drone: &DroneState,
    action: Action,
    cfg: &WorldConfig,
    rng: &mut R,
) -> DroneState {
    assert!(drone.operative, "apply_action on a non-operative drone");
    let mut next = *drone;
    match action.compass() {
        Some(desired) => {
            let z_dir: f64 = rng.sample(StandardNormal);
            let z_speed: f64 = rng.sample(StandardNormal);
            next.dir = wrap_angle(desired + cfg.sigma_d * z_dir);
            next.speed = (cfg.speed_mps + cfg.sigma_v * z_speed).max(0.0);
            let dist = next.speed * cfg.dt_s;
            next.x += dist * next.dir.cos();
            next.y += dist * next.dir.sin();
        }
        None => {
            let z_yaw: f64 = rng.sample(StandardNormal);
            let sign = if action == Action::RotateCcw { 1.0 } else { -1.0 };
            next.heading = wrap_angle(drone.heading + sign * cfg.yaw_step_rad() + cfg.sigma_y * z_yaw);
            next.speed = 0.0;
        }
    }
    next.battery_steps_left = drone.battery_steps_left.saturating_sub(1);
    next
}

/// Spawn point of drone `i`: a 1 m spaced diagonal inside the start square.
/// Teams larger than six reuse the same six slots.
pub fn spawn_point(i: usize) -> (f64, f64) {
    let k = (i % 6) as f64;
    let c = 1.0 + k * FRAC_1_SQRT_2;
    (c, c)
}

fn start_square_distance(x: f64, y: f64) -> f64 {
    let dx = (x - START_SQUARE_M).max(0.0);
    let dy = (y - START_SQUARE_M).max(0.0);
    dx.hypot(dy)
}

#[derive(Debug, Clone)]
pub struct World {
    cfg: WorldConfig,
    sensor: SensorModel,
    pub drones: Vec<DroneState>,
    pub targets: Vec<TargetState>,
    steps: usize,
    done_reason: DoneReason,
    team_reward: f64,
    crashes: usize,
}

impl World {
    /// Fresh episode with target placements drawn from `seed`.
    pub fn reset(cfg: &WorldConfig, seed: u64) -> Result<(World, Vec<ObsVector>), EnvError> {
        Self::reset_with_rng(cfg, &mut rng_from_seed(seed))
    }

    pub fn reset_with_rng<R: Rng + ?Sized>(
        cfg: &WorldConfig,
        rng: &mut R,
    ) -> Result<(World, Vec<ObsVector>), EnvError> {
        cfg.validate()?;
        let drones = (0..cfg.n_drones)
            .map(|i| {
                let (x, y) = spawn_point(i);
                DroneState {
                    x,
                    y,
                    heading: 0.0,
                    dir: 0.0,
                    speed: 0.0,
                    operative: true,
                    battery_steps_left: cfg.horizon,
                }
            })
            .collect();
        let targets = (0..cfg.n_targets)
            .map(|_| Self::place_target(cfg, rng))
            .collect();
        let world = World {
            cfg: cfg.clone(),
            sensor: cfg.sensor(),
            drones,
            targets,
            steps: 0,
            done_reason: DoneReason::Running,
            team_reward: 0.0,
            crashes: 0,
        };
        let obs = world.observations();
        Ok((world, obs))
    }

    fn place_target<R: Rng + ?Sized>(cfg: &WorldConfig, rng: &mut R) -> TargetState {
        let clear_possible = start_square_distance(cfg.width_m, cfg.height_m) >= TARGET_CLEARANCE_M;
        loop {
            let x = rng.random::<f64>() * cfg.width_m;
            let y = rng.random::<f64>() * cfg.height_m;
            if !clear_possible || start_square_distance(x, y) >= TARGET_CLEARANCE_M {
                return TargetState {
                    x,
                    y,
                    detected: false,
                };
            }
        }
    }

    /// Builds a world from explicit states, e.g. for tests or replays.
    pub fn from_parts(
        cfg: &WorldConfig,
        drones: Vec<DroneState>,
        targets: Vec<TargetState>,
    ) -> Result<World, EnvError> {
        cfg.validate()?;
        let cfg = WorldConfig {
            n_drones: drones.len(),
            n_targets: targets.len(),
            ..cfg.clone()
        };
        cfg.validate()?;
        Ok(World {
            sensor: cfg.sensor(),
            cfg,
            drones,
            targets,
            steps: 0,
            done_reason: DoneReason::Running,
            team_reward: 0.0,
            crashes: 0,
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn done_reason(&self) -> DoneReason {
        self.done_reason
    }

    pub fn is_done(&self) -> bool {
        self.done_reason != DoneReason::Running
    }

    pub fn detected_count(&self) -> usize {
        self.targets.iter().filter(|t| t.detected).count()
    }

    pub fn operative_count(&self) -> usize {
        self.drones.iter().filter(|d| d.operative).count()
    }

    pub fn crashes(&self) -> usize {
        self.crashes
    }

    /// Team reward accumulated so far: each detection counted once plus
    /// every drone's step costs and crash penalties.
    pub fn team_reward(&self) -> f64 {
        self.team_reward
    }

    pub fn summary(&self) -> WorldSummary {
        WorldSummary {
            detected_count: self.detected_count(),
        }
    }

    pub fn observations(&self) -> Vec<ObsVector> {
        let summary = self.summary();
        self.drones
            .iter()
            .map(|d| encode(d, &summary, &self.cfg))
            .collect()
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        (0.0..=self.cfg.width_m).contains(&x) && (0.0..=self.cfg.height_m).contains(&y)
    }

    /// Advances every operative drone by its action in parallel.
    ///
    /// Entries of `joint_action` belonging to non-operative drones are
    /// ignored.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        joint_action: &[Action],
        rng: &mut R,
    ) -> Result<(Vec<ObsVector>, StepResult), EnvError> {
        if self.is_done() {
            return Err(EnvError::EpisodeFinished(self.done_reason));
        }
        let n = self.drones.len();
        if self.detected_count() == self.targets.len() {
            self.done_reason = DoneReason::AllTargetsFound;
            let result = StepResult {
                rewards: vec![0.0; n],
                newly_detected: Vec::new(),
                crashed: Vec::new(),
                done: true,
                done_reason: self.done_reason,
            };
            return Ok((self.observations(), result));
        }
        if joint_action.len() != n {
            return Err(EnvError::ActionCount {
                got: joint_action.len(),
                expected: n,
            });
        }

        let mut rewards = vec![0.0; n];
        let mut crashed = Vec::new();
        for (i, &action) in joint_action.iter().enumerate() {
            if !self.drones[i].operative {
                continue;
            }
            let mut next = apply_action(&self.drones[i], action, &self.cfg, rng);
            rewards[i] = self.cfg.r_step;
            self.team_reward += self.cfg.r_step;
            if !self.inside(next.x, next.y) {
                next.x = next.x.clamp(0.0, self.cfg.width_m);
                next.y = next.y.clamp(0.0, self.cfg.height_m);
                next.operative = false;
                rewards[i] += self.cfg.r_crash;
                self.team_reward += self.cfg.r_crash;
                self.crashes += 1;
                crashed.push(i);
            }
            self.drones[i] = next;
        }

        let mut newly_detected = Vec::new();
        for i in 0..n {
            if !self.drones[i].operative {
                continue;
            }
            for t in sense(&self.drones[i], &self.targets, &self.sensor, rng) {
                self.targets[t].detected = true;
                newly_detected.push(t);
            }
        }
        newly_detected.sort_unstable();
        let bonus = self.cfg.r_detect * newly_detected.len() as f64;
        if !newly_detected.is_empty() {
            for (r, d) in rewards.iter_mut().zip(&self.drones) {
                if d.operative {
                    *r += bonus;
                }
            }
            self.team_reward += bonus;
        }

        self.steps += 1;
        self.done_reason = if self.detected_count() == self.targets.len() {
            DoneReason::AllTargetsFound
        } else if self.operative_count() == 0 {
            DoneReason::AllDronesDown
        } else if self.steps >= self.cfg.horizon {
            DoneReason::HorizonReached
        } else {
            DoneReason::Running
        };
        let result = StepResult {
            rewards,
            newly_detected,
            crashed,
            done: self.is_done(),
            done_reason: self.done_reason,
        };
        Ok((self.observations(), result))
    }
}

/// Everything needed to recompute the team reward of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub actions: Vec<Option<Action>>,
    pub drones: Vec<DroneState>,
    pub rewards: Vec<f64>,
    pub newly_detected: Vec<usize>,
    pub crashed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub config: WorldConfig,
    pub initial_drones: Vec<DroneState>,
    pub targets: Vec<TargetState>,
    pub records: Vec<StepRecord>,
}

impl EpisodeLog {
    pub fn new(world: &World) -> Self {
        Self {
            config: world.config().clone(),
            initial_drones: world.drones.clone(),
            targets: world
                .targets
                .iter()
                .map(|t| TargetState {
                    detected: false,
                    ..*t
                })
                .collect(),
            records: Vec::new(),
        }
    }

    /// Records a step. Call with the world state from after the step.
    pub fn push(&mut self, world: &World, joint_action: &[Action], was_operative: &[bool], result: &StepResult) {
        self.records.push(StepRecord {
            step: world.steps(),
            actions: joint_action
                .iter()
                .zip(was_operative)
                .map(|(&a, &op)| op.then_some(a))
                .collect(),
            drones: world.drones.clone(),
            rewards: result.rewards.clone(),
            newly_detected: result.newly_detected.clone(),
            crashed: result.crashed.clone(),
        });
    }

    /// Writes the replay log as CSV, one row per target and then one row
    /// per drone per step.
    ///
    /// Columns: `record,step,id,x,y,heading,dir,speed,operative,action,reward,detected`.
    /// `record` is `target` or `drone`; target rows carry `step` 0 and the
    /// step at which they were found in `detected` (empty if never). Drone
    /// rows at step 0 are the spawn poses. `detected` on drone rows lists the
    /// targets first reported in that step, `;`-separated, on every drone row
    /// of the step.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "record", "step", "id", "x", "y", "heading", "dir", "speed", "operative", "action", "reward",
            "detected",
        ])?;
        let found_at = |t: usize| {
            self.records
                .iter()
                .find(|r| r.newly_detected.contains(&t))
                .map(|r| r.step.to_string())
                .unwrap_or_default()
        };
        for (i, t) in self.targets.iter().enumerate() {
            w.write_record([
                "target".to_string(),
                "0".to_string(),
                i.to_string(),
                t.x.to_string(),
                t.y.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                found_at(i),
            ])?;
        }
        let drone_row = |step: usize, id: usize, d: &DroneState, action: Option<Action>, reward: String, detected: &str| {
            vec![
                "drone".to_string(),
                step.to_string(),
                id.to_string(),
                d.x.to_string(),
                d.y.to_string(),
                d.heading.to_string(),
                d.dir.to_string(),
                d.speed.to_string(),
                (d.operative as u8).to_string(),
                action.map(|a| a.label().to_string()).unwrap_or_default(),
                reward,
                detected.to_string(),
            ]
        };
        for (i, d) in self.initial_drones.iter().enumerate() {
            w.write_record(drone_row(0, i, d, None, String::new(), ""))?;
        }
        for r in &self.records {
            let detected = r
                .newly_detected
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(";");
            for (i, d) in r.drones.iter().enumerate() {
                w.write_record(drone_row(r.step, i, d, r.actions[i], r.rewards[i].to_string(), &detected))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Team reward of a logged episode: one detection bonus per found target,
/// plus every acting drone's step cost, plus crash penalties.
pub fn team_episode_reward(log: &EpisodeLog) -> f64 {
    let cfg = &log.config;
    log.records
        .iter()
        .map(|r| {
            let acted = r.actions.iter().filter(|a| a.is_some()).count() as f64;
            cfg.r_step * acted
                + cfg.r_crash * r.crashed.len() as f64
                + cfg.r_detect * r.newly_detected.len() as f64
        })
        .sum()
}

/// Runs one episode with a joint action chooser, returning its log.
pub fn rollout<F>(world: &mut World, mut obs: Vec<ObsVector>, rng: &mut SimRng, mut choose: F) -> Result<EpisodeLog, EnvError>
where
    F: FnMut(&World, &[ObsVector], &mut SimRng) -> Vec<Action>,
{
    let mut log = EpisodeLog::new(world);
    while !world.is_done() {
        let actions = choose(world, &obs, rng);
        let was_operative: Vec<bool> = world.drones.iter().map(|d| d.operative).collect();
        let (next_obs, result) = world.step(&actions, rng)?;
        log.push(world, &actions, &was_operative, &result);
        obs = next_obs;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn drone(x: f64, y: f64) -> DroneState {
        DroneState {
            x,
            y,
            heading: 0.0,
            dir: 0.0,
            speed: 0.0,
            operative: true,
            battery_steps_left: 900,
        }
    }

    fn target(x: f64, y: f64) -> TargetState {
        TargetState {
            x,
            y,
            detected: false,
        }
    }

    #[test]
    fn reset_is_deterministic() {
        let cfg = WorldConfig::default();
        let (a, oa) = World::reset(&cfg, 42).unwrap();
        let (b, ob) = World::reset(&cfg, 42).unwrap();
        for (ta, tb) in a.targets.iter().zip(&b.targets) {
            assert_eq!(ta.x.to_bits(), tb.x.to_bits());
            assert_eq!(ta.y.to_bits(), tb.y.to_bits());
        }
        assert_eq!(oa, ob);
        let (c, _) = World::reset(&cfg, 43).unwrap();
        assert_ne!(a.targets, c.targets);
    }

    #[test]
    fn reset_places_team_in_corner() {
        let cfg = WorldConfig::default();
        let (w, obs) = World::reset(&cfg, 1).unwrap();
        assert_eq!(w.drones.len(), 3);
        assert_eq!(obs.len(), 3);
        for d in &w.drones {
            assert!(d.operative);
            assert_eq!(d.battery_steps_left, 900);
            assert_eq!(d.heading, 0.0);
            assert_eq!(d.speed, 0.0);
            assert!(d.x <= START_SQUARE_M && d.y <= START_SQUARE_M);
        }
        let gap = (w.drones[1].x - w.drones[0].x).hypot(w.drones[1].y - w.drones[0].y);
        assert!((gap - 1.0).abs() < 1e-12);
        for t in &w.targets {
            assert!(!t.detected);
            assert!(start_square_distance(t.x, t.y) >= TARGET_CLEARANCE_M);
        }
    }

    #[test]
    fn reset_rejects_empty_teams() {
        let cfg = WorldConfig {
            n_targets: 0,
            ..Default::default()
        };
        assert!(World::reset(&cfg, 0).is_err());
        let cfg = WorldConfig {
            n_drones: 0,
            ..Default::default()
        };
        assert!(World::reset(&cfg, 0).is_err());
    }

    #[test]
    fn noiseless_move_east() {
        let cfg = WorldConfig::default().noiseless();
        let next = apply_action(&drone(10.0, 10.0), Action::East, &cfg, &mut rng_from_seed(0));
        assert!((next.x - 11.0).abs() < 1e-12);
        assert!((next.y - 10.0).abs() < 1e-12);
        assert_eq!(next.heading, 0.0);
        assert_eq!(next.battery_steps_left, 899);
    }

    #[test]
    fn noiseless_rotation() {
        let cfg = WorldConfig::default().noiseless();
        let mut rng = rng_from_seed(0);
        let ccw = apply_action(&drone(10.0, 10.0), Action::RotateCcw, &cfg, &mut rng);
        assert!((ccw.heading - PI / 6.0).abs() < 1e-12);
        assert_eq!((ccw.x, ccw.y), (10.0, 10.0));
        let cw = apply_action(&drone(10.0, 10.0), Action::RotateCw, &cfg, &mut rng);
        assert!((cw.heading + PI / 6.0).abs() < 1e-12);
    }

    #[test]
    #[should_panic]
    fn acting_while_down_panics() {
        let mut d = drone(1.0, 1.0);
        d.operative = false;
        apply_action(&d, Action::East, &WorldConfig::default(), &mut rng_from_seed(0));
    }

    #[test]
    fn north_move_noise_is_centered() {
        let cfg = WorldConfig::default();
        let mut rng = rng_from_seed(9);
        let n = 100_000;
        let (mut sx, mut sy) = (0.0, 0.0);
        for _ in 0..n {
            let next = apply_action(&drone(20.0, 20.0), Action::North, &cfg, &mut rng);
            sx += next.x - 20.0;
            sy += next.y - 20.0;
        }
        let (mx, my) = (sx / n as f64, sy / n as f64);
        // E[cos ε] for ε ~ N(0, 0.1²) is exp(-0.005).
        assert!(mx.abs() < 0.01, "mean dx {mx}");
        assert!((my - (-0.005f64).exp()).abs() < 0.01, "mean dy {my}");
    }

    #[test]
    fn crash_penalty_and_clamp() {
        let cfg = WorldConfig::default().noiseless();
        let drones = vec![drone(0.5, 20.0), drone(20.0, 20.0), drone(30.0, 20.0)];
        let targets = vec![target(59.0, 44.0)];
        let mut w = World::from_parts(&cfg, drones, targets).unwrap();
        let (_, r) = w
            .step(&[Action::West, Action::North, Action::South], &mut rng_from_seed(0))
            .unwrap();
        assert!((r.rewards[0] - (-500.1)).abs() < 1e-9);
        assert!((r.rewards[1] - (-0.1)).abs() < 1e-12);
        assert!((r.rewards[2] - (-0.1)).abs() < 1e-12);
        assert_eq!(r.crashed, vec![0]);
        assert_eq!(w.drones[0].x, 0.0);
        assert!(!w.drones[0].operative);
        assert!(!r.done);
        // the crashed drone no longer acts or pays
        let (_, r) = w
            .step(&[Action::East, Action::North, Action::South], &mut rng_from_seed(1))
            .unwrap();
        assert_eq!(r.rewards[0], 0.0);
        assert_eq!(w.drones[0].x, 0.0);
    }

    #[test]
    fn all_detected_is_done_before_acting() {
        let cfg = WorldConfig::default().noiseless();
        let mut t = target(40.0, 40.0);
        t.detected = true;
        let mut w = World::from_parts(&cfg, vec![drone(10.0, 10.0)], vec![t]).unwrap();
        let (_, r) = w.step(&[Action::East], &mut rng_from_seed(0)).unwrap();
        assert!(r.done);
        assert_eq!(r.done_reason, DoneReason::AllTargetsFound);
        assert_eq!(w.drones[0].x, 10.0);
        assert!(matches!(
            w.step(&[Action::East], &mut rng_from_seed(0)),
            Err(EnvError::EpisodeFinished(DoneReason::AllTargetsFound))
        ));
    }

    #[test]
    fn shared_detection_counted_once() {
        let cfg = WorldConfig::default().noiseless();
        // both drones rotate in place facing the same target
        let drones = vec![drone(10.0, 10.0), drone(10.0, 11.0)];
        let targets = vec![target(15.0, 10.5), target(50.0, 40.0)];
        let mut w = World::from_parts(&cfg, drones, targets).unwrap();
        let mut log = EpisodeLog::new(&w);
        let actions = [Action::East, Action::East];
        let (_, r) = w.step(&actions, &mut rng_from_seed(0)).unwrap();
        log.push(&w, &actions, &[true, true], &r);
        assert_eq!(r.newly_detected, vec![0]);
        for reward in &r.rewards {
            assert!((reward - 899.9).abs() < 1e-9);
        }
        assert_eq!(w.detected_count(), 1);
        assert!((w.team_reward() - (900.0 - 0.2)).abs() < 1e-9);
        assert!((team_episode_reward(&log) - w.team_reward()).abs() < 1e-9);
    }

    #[test]
    fn horizon_and_all_down_termination() {
        let cfg = WorldConfig {
            horizon: 3,
            ..WorldConfig::default().noiseless()
        };
        let mut w = World::from_parts(&cfg, vec![drone(20.0, 20.0)], vec![target(59.0, 44.0)]).unwrap();
        let mut rng = rng_from_seed(0);
        for k in 0..3 {
            let (_, r) = w.step(&[Action::RotateCw], &mut rng).unwrap();
            assert_eq!(r.done, k == 2);
        }
        assert_eq!(w.done_reason(), DoneReason::HorizonReached);
        assert_eq!(w.drones[0].battery_steps_left, 897);

        let mut w = World::from_parts(&cfg, vec![drone(0.2, 20.0)], vec![target(59.0, 44.0)]).unwrap();
        let (_, r) = w.step(&[Action::West], &mut rng).unwrap();
        assert_eq!(r.done_reason, DoneReason::AllDronesDown);
    }

    #[test]
    fn team_reward_examples() {
        let cfg = WorldConfig::default().noiseless();
        let mut w = World::from_parts(
            &cfg,
            vec![drone(0.5, 10.0), drone(0.5, 20.0), drone(0.5, 30.0)],
            vec![target(50.0, 40.0); 3],
        )
        .unwrap();
        let mut log = EpisodeLog::new(&w);
        let actions = [Action::West; 3];
        let (_, r) = w.step(&actions, &mut rng_from_seed(0)).unwrap();
        log.push(&w, &actions, &[true; 3], &r);
        assert!(r.done);
        assert!((team_episode_reward(&log) - (-1500.3)).abs() < 1e-9);
    }

    #[test]
    fn replay_csv_layout() {
        let cfg = WorldConfig::default();
        let (mut w, obs) = World::reset(&cfg, 3).unwrap();
        let mut rng = rng_from_seed(3);
        let log = rollout(&mut w, obs, &mut rng, |_, _, _| vec![Action::RotateCw; 3]).unwrap();
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "record,step,id,x,y,heading,dir,speed,operative,action,reward,detected"
        );
        assert_eq!(text.lines().count(), 1 + 3 + 3 + 3 * log.records.len());
        assert!(text.lines().nth(1).unwrap().starts_with("target,0,0,"));
    }
}
