//! Run configuration, layered config resolution, CSV schemas and the drivers
//! behind the command-line tools.
//!
//! # Configuration
//!
//! Every setting has a snake_case key (see [`KEYS`]). Values are resolved in
//! four layers, later layers winning:
//!
//! 1. built-in defaults ([`RunConfig::default`]);
//! 2. a config file of `key = value` lines (`#` starts a comment, blank
//!    lines are ignored, a repeated key keeps its last value);
//! 3. environment variables `SWARMSEARCH_<KEY>` (key upper-cased);
//! 4. command-line flags.
//!
//! The fully resolved configuration is validated once, after all layers are
//! applied, so an out-of-range value is reported no matter where it came from.
//!
//! # CSV outputs
//!
//! All files are UTF-8, comma-separated, with a header row and `.` as the
//! decimal separator. Column order is fixed:
//!
//! | file                    | columns |
//! |-------------------------|---------|
//! | `metrics_run<R>.csv`    | `run_id,seed,episode,team_reward,length,targets_detected,crashes,wall_ms` |
//! | `aggregate.csv`         | `episode,runs,mean_team_reward,std_team_reward,mean_length,mean_targets_detected,mean_crashes` |
//! | `eval_<policy>.csv`     | `policy,episodes,seed,mean_reward,std_reward,mean_steps,detection_rate,crash_rate` |
//! | `eval_<policy>_episodes.csv` | `policy,episode,team_reward,length,targets_detected,crashes` |
//! | `sweep_<kind>.csv`      | `kind,value,episodes,mean_reward,std_reward,mean_steps,detection_rate,crash_rate,slope,intercept,r2` |
//! | `replay.csv`            | see [`EpisodeLog::write_csv`] |
//!
//! `wall_ms` is 0 unless `timing = true`, which keeps repeated runs
//! byte-identical by default.

use std::fmt::Display;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::baselines::{self, evaluate_episode, EvalError, EvalOptions, EvalSummary, PolicyKind, SweepKind, SweepReport, SweepSettings};
use crate::config::{ConfigError, WorldConfig};
use crate::da2c::{Da2cError, EpisodeMetrics, TrainConfig, Trainer};
use crate::env::EpisodeLog;
use crate::nn::{Checkpoint, CheckpointError, OptimizerKind};
use crate::seed::derive_seed;

/// Prefix of environment variables that override config keys.
pub const ENV_PREFIX: &str = "SWARMSEARCH_";

/// Window of the moving average used in training summaries.
pub const MOVING_AVERAGE_WINDOW: usize = 50;

/// Problems resolving a [`RunConfig`]. Every variant names the offending key
/// or file.
#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read config file {path}: {source}")]
    MissingFile { path: PathBuf, source: io::Error },
    #[error("{origin} line {line}: malformed line, expected `key = value`: {text:?}")]
    Malformed { origin: String, line: usize, text: String },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: cannot parse `{key}` = {value:?}: {reason}")]
    BadValue {
        origin: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{key}` is out of range: {reason}")]
    OutOfRange { key: String, reason: String },
}

/// Failures of the experiment drivers.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigFileError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("checkpoint {path}: {source}")]
    Checkpoint { path: PathBuf, source: CheckpointError },
    #[error("the learned policy needs a checkpoint (set `checkpoint`)")]
    NoCheckpoint,
    #[error("unknown policy {0:?} (expected learned, random or collision-free)")]
    UnknownPolicy(String),
    #[error(transparent)]
    Training(#[from] Da2cError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Everything one command needs: world, learning hyperparameters and run
/// bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub world: WorldConfig,
    pub train: TrainConfig,
    /// Training episodes per run.
    pub episodes: usize,
    /// Episodes per evaluation.
    pub eval_episodes: usize,
    pub seed: u64,
    /// Independent training runs; run `r` trains with `derive_seed(seed, r)`.
    pub runs: usize,
    /// Save a checkpoint every this many training episodes; 0 disables the
    /// periodic ones (the final checkpoint is always written).
    pub checkpoint_every: usize,
    /// Checkpoint to load for learned-policy evaluation and replay.
    pub checkpoint: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Worker threads; 0 lets the thread pool decide.
    pub threads: usize,
    pub eval: EvalOptions,
    /// Record real wall-clock times in `wall_ms` (makes output
    /// non-reproducible).
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            train: TrainConfig::default(),
            episodes: 500,
            eval_episodes: 500,
            seed: 0,
            runs: 1,
            checkpoint_every: 50,
            checkpoint: None,
            out_dir: PathBuf::from("out"),
            threads: 0,
            eval: EvalOptions::default(),
            timing: false,
        }
    }
}

/// A documented configuration key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySpec {
    pub name: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, help: &'static str) -> KeySpec {
    KeySpec { name, help }
}

/// All configuration keys in documentation order.
pub const KEYS: &[KeySpec] = &[
    key("width_m", "arena width in metres"),
    key("height_m", "arena height in metres"),
    key("fov_deg", "camera field of view in degrees"),
    key("sensor_range_m", "camera range in metres"),
    key("speed_mps", "commanded speed in m/s"),
    key("yaw_step_deg", "rotation per rotate action in degrees"),
    key("sigma_d", "direction noise std (rad)"),
    key("sigma_v", "speed noise std (m/s)"),
    key("sigma_y", "yaw noise std (rad)"),
    key("p_mis", "misdetection probability"),
    key("horizon", "maximum steps per episode"),
    key("n_drones", "team size"),
    key("n_targets", "number of targets"),
    key("dt_s", "time step in seconds"),
    key("r_detect", "reward per detected target"),
    key("r_step", "reward per drone per step"),
    key("r_crash", "penalty for leaving the arena"),
    key("gamma", "discount factor"),
    key("lr", "learning rate"),
    key("batch_size", "samples per update"),
    key("lambda_pi", "policy loss weight"),
    key("lambda_v", "value loss weight"),
    key("lambda_h", "entropy bonus weight"),
    key("optimizer", "adam or sgd"),
    key("grad_clip", "global gradient-norm clip, or none"),
    key("value_scale", "critic output scale"),
    key("episodes", "training episodes per run"),
    key("eval_episodes", "evaluation episodes"),
    key("seed", "master seed"),
    key("runs", "independent training runs"),
    key("checkpoint_every", "periodic checkpoint interval (0 = off)"),
    key("checkpoint", "checkpoint file to load"),
    key("out_dir", "output directory"),
    key("threads", "worker threads (0 = automatic)"),
    key("greedy", "learned policy acts greedily"),
    key("random_rotations", "random baseline includes rotations"),
    key("collision_free_rotations", "collision-free baseline includes rotations"),
    key("timing", "record wall-clock times"),
];

fn num<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: Display,
{
    value.parse().map_err(|e: T::Err| e.to_string())
}

fn boolean(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn optimizer(value: &str) -> Result<OptimizerKind, String> {
    match value.to_ascii_lowercase().as_str() {
        "adam" => Ok(OptimizerKind::ADAM),
        "sgd" => Ok(OptimizerKind::Sgd),
        _ => Err("expected adam or sgd".into()),
    }
}

fn clip(value: &str) -> Result<Option<f64>, String> {
    match value.to_ascii_lowercase().as_str() {
        "none" | "off" | "" => Ok(None),
        _ => num(value).map(Some),
    }
}

impl RunConfig {
    /// Sets one key from its textual value. The error is a human-readable
    /// reason; unknown keys are reported as `None`.
    fn set(&mut self, key: &str, value: &str) -> Option<Result<(), String>> {
        let w = &mut self.world;
        let t = &mut self.train;
        let r = match key {
            "width_m" => num(value).map(|v| w.width_m = v),
            "height_m" => num(value).map(|v| w.height_m = v),
            "fov_deg" => num(value).map(|v| w.fov_deg = v),
            "sensor_range_m" => num(value).map(|v| w.sensor_range_m = v),
            "speed_mps" => num(value).map(|v| w.speed_mps = v),
            "yaw_step_deg" => num(value).map(|v| w.yaw_step_deg = v),
            "sigma_d" => num(value).map(|v| w.sigma_d = v),
            "sigma_v" => num(value).map(|v| w.sigma_v = v),
            "sigma_y" => num(value).map(|v| w.sigma_y = v),
            "p_mis" => num(value).map(|v| w.p_mis = v),
            "horizon" => num(value).map(|v| w.horizon = v),
            "n_drones" => num(value).map(|v| w.n_drones = v),
            "n_targets" => num(value).map(|v| w.n_targets = v),
            "dt_s" => num(value).map(|v| w.dt_s = v),
            "r_detect" => num(value).map(|v| w.r_detect = v),
            "r_step" => num(value).map(|v| w.r_step = v),
            "r_crash" => num(value).map(|v| w.r_crash = v),
            "gamma" => num(value).map(|v| t.gamma = v),
            "lr" => num(value).map(|v| t.lr = v),
            "batch_size" => num(value).map(|v| t.batch_size = v),
            "lambda_pi" => num(value).map(|v| t.lambda_pi = v),
            "lambda_v" => num(value).map(|v| t.lambda_v = v),
            "lambda_h" => num(value).map(|v| t.lambda_h = v),
            "optimizer" => optimizer(value).map(|v| t.optimizer = v),
            "grad_clip" => clip(value).map(|v| t.grad_clip = v),
            "value_scale" => num(value).map(|v| t.value_scale = v),
            "episodes" => num(value).map(|v| self.episodes = v),
            "eval_episodes" => num(value).map(|v| self.eval_episodes = v),
            "seed" => num(value).map(|v| self.seed = v),
            "runs" => num(value).map(|v| self.runs = v),
            "checkpoint_every" => num(value).map(|v| self.checkpoint_every = v),
            "checkpoint" => {
                self.checkpoint = (!value.is_empty()).then(|| PathBuf::from(value));
                Ok(())
            }
            "out_dir" => {
                self.out_dir = PathBuf::from(value);
                Ok(())
            }
            "threads" => num(value).map(|v| self.threads = v),
            "greedy" => boolean(value).map(|v| self.eval.greedy = v),
            "random_rotations" => boolean(value).map(|v| self.eval.random_rotations = v),
            "collision_free_rotations" => boolean(value).map(|v| self.eval.collision_free_rotations = v),
            "timing" => boolean(value).map(|v| self.timing = v),
            _ => return None,
        };
        Some(r)
    }

    /// The textual value of a key, in a form [`RunConfig::apply`] accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let w = &self.world;
        let t = &self.train;
        Some(match key {
            "width_m" => w.width_m.to_string(),
            "height_m" => w.height_m.to_string(),
            "fov_deg" => w.fov_deg.to_string(),
            "sensor_range_m" => w.sensor_range_m.to_string(),
            "speed_mps" => w.speed_mps.to_string(),
            "yaw_step_deg" => w.yaw_step_deg.to_string(),
            "sigma_d" => w.sigma_d.to_string(),
            "sigma_v" => w.sigma_v.to_string(),
            "sigma_y" => w.sigma_y.to_string(),
            "p_mis" => w.p_mis.to_string(),
            "horizon" => w.horizon.to_string(),
            "n_drones" => w.n_drones.to_string(),
            "n_targets" => w.n_targets.to_string(),
            "dt_s" => w.dt_s.to_string(),
            "r_detect" => w.r_detect.to_string(),
            "r_step" => w.r_step.to_string(),
            "r_crash" => w.r_crash.to_string(),
            "gamma" => t.gamma.to_string(),
            "lr" => t.lr.to_string(),
            "batch_size" => t.batch_size.to_string(),
            "lambda_pi" => t.lambda_pi.to_string(),
            "lambda_v" => t.lambda_v.to_string(),
            "lambda_h" => t.lambda_h.to_string(),
            "optimizer" => match t.optimizer {
                OptimizerKind::Sgd => "sgd".into(),
                OptimizerKind::Adam { .. } => "adam".into(),
            },
            "grad_clip" => t.grad_clip.map_or_else(|| "none".into(), |c| c.to_string()),
            "value_scale" => t.value_scale.to_string(),
            "episodes" => self.episodes.to_string(),
            "eval_episodes" => self.eval_episodes.to_string(),
            "seed" => self.seed.to_string(),
            "runs" => self.runs.to_string(),
            "checkpoint_every" => self.checkpoint_every.to_string(),
            "checkpoint" => self
                .checkpoint
                .as_ref()
                .map_or_else(String::new, |p| p.display().to_string()),
            "out_dir" => self.out_dir.display().to_string(),
            "threads" => self.threads.to_string(),
            "greedy" => self.eval.greedy.to_string(),
            "random_rotations" => self.eval.random_rotations.to_string(),
            "collision_free_rotations" => self.eval.collision_free_rotations.to_string(),
            "timing" => self.timing.to_string(),
            _ => return None,
        })
    }

    /// Applies one `key = value` override; `origin` is used in messages.
    pub fn apply(&mut self, origin: &str, key: &str, value: &str) -> Result<(), ConfigFileError> {
        match self.set(key, value) {
            None => Err(ConfigFileError::UnknownKey {
                origin: origin.to_string(),
                key: key.to_string(),
            }),
            Some(Err(reason)) => Err(ConfigFileError::BadValue {
                origin: origin.to_string(),
                key: key.to_string(),
                value: value.to_string(),
                reason,
            }),
            Some(Ok(())) => Ok(()),
        }
    }

    /// Applies every pair of a config file's text.
    pub fn apply_file_text(&mut self, origin: &str, text: &str) -> Result<(), ConfigFileError> {
        for (key, value, line) in parse_config_text(origin, text)? {
            self.apply(&format!("{origin} line {line}"), &key, &value)?;
        }
        Ok(())
    }

    /// Applies `SWARMSEARCH_*` variables from `vars`. Variables without the
    /// prefix are ignored; a prefixed variable naming no key is an error.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigFileError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut vars: Vec<(String, String)> = vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        vars.sort();
        for (var, value) in vars {
            let key = var[ENV_PREFIX.len()..].to_ascii_lowercase();
            self.apply(&format!("environment variable {var}"), &key, &value)?;
        }
        Ok(())
    }

    /// Resolves defaults < file < environment < flags and validates the
    /// result.
    pub fn resolve<I>(file: Option<&Path>, env: I, flags: &[(String, String)]) -> Result<Self, ConfigFileError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut cfg = Self::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|source| ConfigFileError::MissingFile {
                path: path.to_path_buf(),
                source,
            })?;
            cfg.apply_file_text(&path.display().to_string(), &text)?;
        }
        cfg.apply_env(env)?;
        for (key, value) in flags {
            cfg.apply(&format!("flag --{}", key.replace('_', "-")), key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigFileError> {
        let range = |key: &str, reason: &str| ConfigFileError::OutOfRange {
            key: key.to_string(),
            reason: reason.to_string(),
        };
        self.world.validate().map_err(|e| match e {
            ConfigError::OutOfRange { key, reason, .. } => range(key, reason),
        })?;
        self.train.validate().map_err(|e| match e {
            Da2cError::BadGamma(_) => range("gamma", "must lie in [0, 1]"),
            Da2cError::BadSetting { key, reason } => range(key, reason),
            other => range("train", &other.to_string()),
        })?;
        if self.runs < 1 {
            return Err(range("runs", "must be >= 1"));
        }
        Ok(())
    }

    /// The resolved configuration in config-file form, one key per line.
    pub fn to_config_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{} = {}\n", k.name, self.get(k.name).expect("every key has a value")))
            .collect()
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            world: self.world.clone(),
            train: self.train.clone(),
            train_episodes: self.episodes,
            eval_episodes: self.eval_episodes,
            seed: self.seed,
            eval: self.eval,
        }
    }
}

/// Splits config-file text into `(key, value, line number)` triples.
pub fn parse_config_text(origin: &str, text: &str) -> Result<Vec<(String, String, usize)>, ConfigFileError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let malformed = || ConfigFileError::Malformed {
            origin: origin.to_string(),
            line: i + 1,
            text: raw.to_string(),
        };
        let (k, v) = line.split_once('=').ok_or_else(malformed)?;
        let k = k.trim();
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(malformed());
        }
        pairs.push((k.to_string(), v.trim().to_string(), i + 1));
    }
    Ok(pairs)
}

/// One row of a training metrics file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsRow {
    pub run_id: usize,
    pub seed: u64,
    pub episode: usize,
    pub team_reward: f64,
    pub length: usize,
    pub targets_detected: usize,
    pub crashes: usize,
    pub wall_ms: u64,
}

impl MetricsRow {
    pub fn new(run_id: usize, seed: u64, m: &EpisodeMetrics, wall_ms: u64) -> Self {
        Self {
            run_id,
            seed,
            episode: m.episode,
            team_reward: m.team_reward,
            length: m.length,
            targets_detected: m.targets_detected,
            crashes: m.crashes,
            wall_ms,
        }
    }
}

/// Cross-run statistics for one episode index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateRow {
    pub episode: usize,
    pub runs: usize,
    pub mean_team_reward: f64,
    /// Population standard deviation across runs.
    pub std_team_reward: f64,
    pub mean_length: f64,
    pub mean_targets_detected: f64,
    pub mean_crashes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub policy: &'static str,
    pub episodes: usize,
    pub seed: u64,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_steps: f64,
    pub detection_rate: f64,
    pub crash_rate: f64,
}

impl EvalRow {
    pub fn new(s: &EvalSummary, seed: u64) -> Self {
        Self {
            policy: s.policy,
            episodes: s.episodes,
            seed,
            mean_reward: s.mean_reward,
            std_reward: s.std_reward,
            mean_steps: s.mean_steps,
            detection_rate: s.detection_rate,
            crash_rate: s.crash_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalEpisodeRow {
    pub policy: &'static str,
    pub episode: usize,
    pub team_reward: f64,
    pub length: usize,
    pub targets_detected: usize,
    pub crashes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCsvRow {
    pub kind: &'static str,
    pub value: usize,
    pub episodes: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_steps: f64,
    pub detection_rate: f64,
    pub crash_rate: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Per-episode mean and population std across runs.
pub fn aggregate(runs: &[Vec<EpisodeMetrics>]) -> Vec<AggregateRow> {
    let episodes = runs.iter().map(Vec::len).min().unwrap_or(0);
    (0..episodes)
        .map(|e| {
            let n = runs.len() as f64;
            let mean = |f: &dyn Fn(&EpisodeMetrics) -> f64| runs.iter().map(|r| f(&r[e])).sum::<f64>() / n;
            let mean_reward = mean(&|m| m.team_reward);
            let var = runs
                .iter()
                .map(|r| (r[e].team_reward - mean_reward).powi(2))
                .sum::<f64>()
                / n;
            AggregateRow {
                episode: e,
                runs: runs.len(),
                mean_team_reward: mean_reward,
                std_team_reward: var.sqrt(),
                mean_length: mean(&|m| m.length as f64),
                mean_targets_detected: mean(&|m| m.targets_detected as f64),
                mean_crashes: mean(&|m| m.crashes as f64),
            }
        })
        .collect()
}

/// Trailing moving average; entry `i` averages episodes
/// `max(0, i + 1 - window) ..= i`.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window > 0, "window must be positive");
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

fn create_dir(path: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `rows` (header included even when empty) to `path`.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), ExperimentError> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const METRICS_HEADER: &[&str] = &[
    "run_id",
    "seed",
    "episode",
    "team_reward",
    "length",
    "targets_detected",
    "crashes",
    "wall_ms",
];
pub const AGGREGATE_HEADER: &[&str] = &[
    "episode",
    "runs",
    "mean_team_reward",
    "std_team_reward",
    "mean_length",
    "mean_targets_detected",
    "mean_crashes",
];
pub const EVAL_HEADER: &[&str] = &[
    "policy",
    "episodes",
    "seed",
    "mean_reward",
    "std_reward",
    "mean_steps",
    "detection_rate",
    "crash_rate",
];
pub const EVAL_EPISODES_HEADER: &[&str] = &["policy", "episode", "team_reward", "length", "targets_detected", "crashes"];
pub const SWEEP_HEADER: &[&str] = &[
    "kind",
    "value",
    "episodes",
    "mean_reward",
    "std_reward",
    "mean_steps",
    "detection_rate",
    "crash_rate",
    "slope",
    "intercept",
    "r2",
];

/// Files produced by [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub metrics_files: Vec<PathBuf>,
    pub aggregate_file: PathBuf,
    /// Final checkpoint of each run.
    pub checkpoints: Vec<PathBuf>,
    pub metrics: Vec<Vec<EpisodeMetrics>>,
}

pub fn checkpoint_path(out_dir: &Path, run: usize, episode: Option<usize>) -> PathBuf {
    let name = match episode {
        Some(e) => format!("run{run}_ep{e}.ckpt"),
        None => format!("run{run}_final.ckpt"),
    };
    out_dir.join("checkpoints").join(name)
}

/// Trains `cfg.runs` independent teams and writes per-run metrics,
/// checkpoints and the cross-run aggregate. `progress` sees every episode.
pub fn train<F>(cfg: &RunConfig, mut progress: F) -> Result<TrainOutput, ExperimentError>
where
    F: FnMut(usize, &EpisodeMetrics),
{
    cfg.validate()?;
    create_dir(&cfg.out_dir.join("checkpoints"))?;
    let mut out = TrainOutput {
        metrics_files: Vec::new(),
        aggregate_file: cfg.out_dir.join("aggregate.csv"),
        checkpoints: Vec::new(),
        metrics: Vec::new(),
    };
    for run in 0..cfg.runs {
        let seed = derive_seed(cfg.seed, run as u64);
        let mut trainer = Trainer::new(&cfg.world, &cfg.train, seed)?;
        let mut rows = Vec::with_capacity(cfg.episodes);
        let mut metrics = Vec::with_capacity(cfg.episodes);
        for _ in 0..cfg.episodes {
            let start = Instant::now();
            let m = trainer.run_episode()?;
            let wall_ms = if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 };
            progress(run, &m);
            rows.push(MetricsRow::new(run, seed, &m, wall_ms));
            metrics.push(m);
            let done = trainer.episodes_done();
            if cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 {
                save_checkpoint(&trainer.checkpoint(), &checkpoint_path(&cfg.out_dir, run, Some(done)))?;
            }
        }
        let final_path = checkpoint_path(&cfg.out_dir, run, None);
        save_checkpoint(&trainer.checkpoint(), &final_path)?;
        let metrics_file = cfg.out_dir.join(format!("metrics_run{run}.csv"));
        write_csv(&metrics_file, &rows, METRICS_HEADER)?;
        out.metrics_files.push(metrics_file);
        out.checkpoints.push(final_path);
        out.metrics.push(metrics);
    }
    write_csv(&out.aggregate_file, &aggregate(&out.metrics), AGGREGATE_HEADER)?;
    Ok(out)
}

fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<(), ExperimentError> {
    ck.save(path).map_err(|source| ExperimentError::Checkpoint {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, ExperimentError> {
    Checkpoint::load(path).map_err(|source| ExperimentError::Checkpoint {
        path: path.to_path_buf(),
        source,
    })
}

/// Builds the policy named `name` (`learned`, `random`, `collision-free`),
/// loading `cfg.checkpoint` for the learned one.
pub fn policy_from_name(name: &str, cfg: &RunConfig) -> Result<PolicyKind, ExperimentError> {
    match name {
        "learned" => {
            let path = cfg.checkpoint.as_ref().ok_or(ExperimentError::NoCheckpoint)?;
            Ok(PolicyKind::Learned(Arc::new(load_checkpoint(path)?)))
        }
        "random" => Ok(PolicyKind::Random),
        "collision-free" => Ok(PolicyKind::CollisionFree),
        other => Err(ExperimentError::UnknownPolicy(other.to_string())),
    }
}

/// Evaluates `policy` and writes the summary and per-episode files.
/// Returns the summary and the summary file path.
pub fn eval(cfg: &RunConfig, policy: &PolicyKind) -> Result<(EvalSummary, PathBuf), ExperimentError> {
    cfg.validate()?;
    let summary = baselines::evaluate(policy, &cfg.world, cfg.eval_episodes, cfg.seed, &cfg.eval)?;
    create_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join(format!("eval_{}.csv", summary.policy));
    write_csv(&path, &[EvalRow::new(&summary, cfg.seed)], EVAL_HEADER)?;
    let episodes: Vec<EvalEpisodeRow> = summary
        .records
        .iter()
        .map(|r| EvalEpisodeRow {
            policy: summary.policy,
            episode: r.episode,
            team_reward: r.team_reward,
            length: r.length,
            targets_detected: r.targets_detected,
            crashes: r.crashes,
        })
        .collect();
    write_csv(
        &cfg.out_dir.join(format!("eval_{}_episodes.csv", summary.policy)),
        &episodes,
        EVAL_EPISODES_HEADER,
    )?;
    Ok((summary, path))
}

/// Runs a sweep over `values` and writes `sweep_<kind>.csv`, one row per
/// value with the least-squares fit repeated on every row.
pub fn sweep(cfg: &RunConfig, kind: SweepKind, values: &[usize]) -> Result<(SweepReport, PathBuf), ExperimentError> {
    cfg.validate()?;
    let report = baselines::sweep(kind, values, &cfg.sweep_settings())?;
    create_dir(&cfg.out_dir)?;
    let rows: Vec<SweepCsvRow> = report
        .rows
        .iter()
        .map(|r| SweepCsvRow {
            kind: kind.label(),
            value: r.value,
            episodes: r.summary.episodes,
            mean_reward: r.summary.mean_reward,
            std_reward: r.summary.std_reward,
            mean_steps: r.summary.mean_steps,
            detection_rate: r.summary.detection_rate,
            crash_rate: r.summary.crash_rate,
            slope: report.fit.slope,
            intercept: report.fit.intercept,
            r2: report.fit.r2,
        })
        .collect();
    let path = cfg.out_dir.join(format!("sweep_{}.csv", kind.label()));
    write_csv(&path, &rows, SWEEP_HEADER)?;
    Ok((report, path))
}

/// Plays one episode (stream 0 of `cfg.seed`) and writes its trajectory to
/// `replay.csv`.
pub fn replay(cfg: &RunConfig, policy: &PolicyKind) -> Result<(EpisodeLog, PathBuf), ExperimentError> {
    cfg.validate()?;
    if let PolicyKind::Learned(ck) = policy {
        if ck.agent_count() != cfg.world.n_drones {
            return Err(EvalError::AgentCount {
                expected: cfg.world.n_drones,
                got: ck.agent_count(),
            }
            .into());
        }
    }
    let (_, log) = evaluate_episode(policy, &cfg.world, cfg.seed, 0, &cfg.eval)?;
    create_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("replay.csv");
    let file = fs::File::create(&path).map_err(|source| ExperimentError::Io {
        path: path.clone(),
        source,
    })?;
    log.write_csv(io::BufWriter::new(file)).map_err(|source| ExperimentError::Csv {
        path: path.clone(),
        source,
    })?;
    Ok((log, path))
}
