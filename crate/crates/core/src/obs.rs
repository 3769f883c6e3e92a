//! Per-agent observation vector.
//!
//! Layout (index: content, range):
//!
//! | idx | value                                   | range    |
//! |-----|-----------------------------------------|----------|
//! | 0   | `x / width`                             | [0, 1]   |
//! | 1   | `y / height`                            | [0, 1]   |
//! | 2   | `cos(heading)`                          | [-1, 1]  |
//! | 3   | `sin(heading)`                          | [-1, 1]  |
//! | 4   | `vx / speed_mps`, clamped               | [-1, 1]  |
//! | 5   | `vy / speed_mps`, clamped               | [-1, 1]  |
//! | 6   | `battery_steps_left / horizon`          | [0, 1]   |
//! | 7   | `detected_count / n_targets`            | [0, 1]   |
//! | 8   | distance to north wall / height         | [0, 1]   |
//! | 9   | distance to east wall / width           | [0, 1]   |
//! | 10  | distance to south wall / height         | [0, 1]   |
//! | 11  | distance to west wall / width           | [0, 1]   |
//!
//! Only the drone's own state, the arena geometry and the team detection
//! count enter the vector; other drones are never visible.

use crate::config::WorldConfig;
use crate::env::DroneState;

pub const OBS_LEN: usize = 12;

pub const IDX_WALL_N: usize = 8;
pub const IDX_WALL_E: usize = 9;
pub const IDX_WALL_S: usize = 10;
pub const IDX_WALL_W: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsVector(pub [f64; OBS_LEN]);

impl ObsVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Wall distances in metres, ordered N, E, S, W.
    pub fn wall_distances_m(&self, cfg: &WorldConfig) -> [f64; 4] {
        [
            self.0[IDX_WALL_N] * cfg.height_m,
            self.0[IDX_WALL_E] * cfg.width_m,
            self.0[IDX_WALL_S] * cfg.height_m,
            self.0[IDX_WALL_W] * cfg.width_m,
        ]
    }
}

/// Team-level information every drone receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WorldSummary {
    pub detected_count: usize,
}

fn unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

pub fn encode(drone: &DroneState, summary: &WorldSummary, cfg: &WorldConfig) -> ObsVector {
    let (w, h) = (cfg.width_m, cfg.height_m);
    let vx = drone.speed * drone.dir.cos() / cfg.speed_mps;
    let vy = drone.speed * drone.dir.sin() / cfg.speed_mps;
    ObsVector([
        unit(drone.x / w),
        unit(drone.y / h),
        drone.heading.cos(),
        drone.heading.sin(),
        vx.clamp(-1.0, 1.0),
        vy.clamp(-1.0, 1.0),
        unit(drone.battery_steps_left as f64 / cfg.horizon as f64),
        unit(summary.detected_count as f64 / cfg.n_targets as f64),
        unit((h - drone.y) / h),
        unit((w - drone.x) / w),
        unit(drone.y / h),
        unit(drone.x / w),
    ])
}
