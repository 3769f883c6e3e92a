//! Decentralized multi-agent search and detection.
//!
//! A team of drones flies over a rectangular arena looking for static ground
//! targets. Each drone runs its own actor-critic learner on purely local
//! observations; nothing is shared between learners during training or
//! execution.
//!
//! Module map:
//! - [`env`]: the world state, stochastic dynamics, rewards and termination.
//! - [`sensing`]: camera field-of-view geometry and the misdetection model.
//! - [`obs`]: the fixed-length observation vector fed to each agent.
//! - [`nn`]: dense networks with a hand-written backward pass, optimizers and
//!   the checkpoint format.
//! - [`da2c`]: sample collection, n-step returns and per-agent training.
//! - [`baselines`]: reference policies, evaluation and parameter sweeps.
//! - [`experiment`]: run configuration and CSV metric schemas.

pub mod baselines;
pub mod config;
pub mod da2c;
pub mod env;
pub mod experiment;
pub mod nn;
pub mod obs;
pub mod seed;
pub mod sensing;

pub use baselines::{evaluate, EvalOptions, EvalSummary, PolicyKind};
pub use config::{ConfigError, WorldConfig};
pub use da2c::{run_training, AgentLearner, EpisodeMetrics, TrainConfig, Trainer};
pub use env::{Action, DoneReason, DroneState, StepResult, TargetState, Transition, World};
pub use experiment::RunConfig;
pub use nn::{Mlp, OptimizerKind, OptimizerState};
pub use obs::{encode, ObsVector, OBS_LEN};
pub use sensing::SensorModel;
