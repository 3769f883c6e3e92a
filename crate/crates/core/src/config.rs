use thiserror::Error;

use crate::sensing::SensorModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("`{key}` = {value} is out of range: {reason}")]
    OutOfRange {
        key: &'static str,
        value: String,
        reason: &'static str,
    },
}

fn out_of_range(key: &'static str, value: impl ToString, reason: &'static str) -> ConfigError {
    ConfigError::OutOfRange {
        key,
        value: value.to_string(),
        reason,
    }
}

/// Arena geometry, uncertainty model, reward constants and horizon.
///
/// Angles in `fov_deg` and `yaw_step_deg` are degrees; the noise standard
/// deviations `sigma_d` and `sigma_y` are radians and `sigma_v` is m/s.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub width_m: f64,
    pub height_m: f64,
    pub fov_deg: f64,
    pub sensor_range_m: f64,
    pub speed_mps: f64,
    pub yaw_step_deg: f64,
    pub sigma_d: f64,
    pub sigma_v: f64,
    pub sigma_y: f64,
    pub p_mis: f64,
    pub horizon: usize,
    pub r_detect: f64,
    pub r_step: f64,
    pub r_crash: f64,
    pub n_drones: usize,
    pub n_targets: usize,
    pub dt_s: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            width_m: 60.0,
            height_m: 45.0,
            fov_deg: 60.0,
            sensor_range_m: 10.0,
            speed_mps: 1.0,
            yaw_step_deg: 30.0,
            sigma_d: 0.1,
            sigma_v: 0.1,
            sigma_y: 0.1,
            p_mis: 0.05,
            horizon: 900,
            r_detect: 900.0,
            r_step: -0.1,
            r_crash: -500.0,
            n_drones: 3,
            n_targets: 3,
            dt_s: 1.0,
        }
    }
}

impl WorldConfig {
    /// Noise-free dynamics and perfect detection; handy for exact tests.
    pub fn noiseless(self) -> Self {
        Self {
            sigma_d: 0.0,
            sigma_v: 0.0,
            sigma_y: 0.0,
            p_mis: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("width_m", self.width_m),
            ("height_m", self.height_m),
            ("sensor_range_m", self.sensor_range_m),
            ("speed_mps", self.speed_mps),
            ("dt_s", self.dt_s),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(out_of_range(key, v, "must be finite and > 0"));
            }
        }
        let non_negative = [
            ("sigma_d", self.sigma_d),
            ("sigma_v", self.sigma_v),
            ("sigma_y", self.sigma_y),
        ];
        for (key, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(out_of_range(key, v, "must be finite and >= 0"));
            }
        }
        if !self.yaw_step_deg.is_finite() {
            return Err(out_of_range("yaw_step_deg", self.yaw_step_deg, "must be finite"));
        }
        for (key, v) in [
            ("r_detect", self.r_detect),
            ("r_step", self.r_step),
            ("r_crash", self.r_crash),
        ] {
            if !v.is_finite() {
                return Err(out_of_range(key, v, "must be finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.p_mis) {
            return Err(out_of_range("p_mis", self.p_mis, "must lie in [0, 1]"));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 360.0) {
            return Err(out_of_range("fov_deg", self.fov_deg, "must lie in (0, 360)"));
        }
        if self.horizon < 1 {
            return Err(out_of_range("horizon", self.horizon, "must be >= 1"));
        }
        if self.n_drones < 1 {
            return Err(out_of_range("n_drones", self.n_drones, "must be >= 1"));
        }
        if self.n_targets < 1 {
            return Err(out_of_range("n_targets", self.n_targets, "must be >= 1"));
        }
        Ok(())
    }

    pub fn sensor(&self) -> SensorModel {
        SensorModel {
            fov_half_angle: self.fov_deg.to_radians() / 2.0,
            range_m: self.sensor_range_m,
            p_mis: self.p_mis,
        }
    }

    pub fn yaw_step_rad(&self) -> f64 {
        self.yaw_step_deg.to_radians()
    }
}
