//! Camera field of view and detection model.
//!
//! The camera sees a closed circular sector centred on the drone heading.
//! A target inside the sector is reported with probability `1 - p_mis`,
//! independently per target and per step.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::env::{DroneState, TargetState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    /// Half of the horizontal field of view, radians.
    pub fov_half_angle: f64,
    pub range_m: f64,
    pub p_mis: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            fov_half_angle: PI / 6.0,
            range_m: 10.0,
            p_mis: 0.05,
        }
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// True iff the target lies in the closed sector of radius `range_m` and
/// half-angle `fov_half_angle` around `heading`.
pub fn sector_contains(
    drone_xy: (f64, f64),
    heading: f64,
    target_xy: (f64, f64),
    model: &SensorModel,
) -> bool {
    let dx = target_xy.0 - drone_xy.0;
    let dy = target_xy.1 - drone_xy.1;
    let dist = dx.hypot(dy);
    if dist > model.range_m {
        return false;
    }
    if dist == 0.0 {
        return true;
    }
    let offset = wrap_angle(dy.atan2(dx) - heading);
    offset.abs() <= model.fov_half_angle
}

/// Indices of undetected targets reported by this drone in the current step.
///
/// Draws exactly one Bernoulli sample per in-sector undetected target, in
/// index order, so the RNG stream advances identically for identical states.
pub fn sense<R: Rng + ?Sized>(
    drone: &DroneState,
    targets: &[TargetState],
    model: &SensorModel,
    rng: &mut R,
) -> Vec<usize> {
    debug_assert!(drone.operative, "sensing with a non-operative drone");
    targets
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.detected)
        .filter(|(_, t)| sector_contains((drone.x, drone.y), drone.heading, (t.x, t.y), model))
        .filter(|_| rng.random::<f64>() >= model.p_mis)
        .map(|(i, _)| i)
        .collect()
}
