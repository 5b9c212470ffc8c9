//! Measurement models for GPS, compass, gyro and the IR beacon detector.

use serde::{Deserialize, Serialize};

use crate::dynamics::UavState;
use crate::math::{wrap_angle, Vec2, Vec3};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorParams {
    pub gps_sigma: f64,
    pub gps_rate: f64,
    /// Doppler ground-velocity noise per axis, m/s.
    pub gps_vel_sigma: f64,
    pub compass_sigma: f64,
    pub gyro_sigma: f64,
    pub beacon_half_angle: f64,
    pub beacon_max_range: f64,
    pub beacon_sigma: f64,
    pub beacon_rate: f64,
    pub beacon_dropout_p: f64,
}

impl Default for SensorParams {
    // 30 degree cone, kept at the 4-decimal value used in scenario files.
    #[allow(clippy::approx_constant)]
    fn default() -> Self {
        Self {
            gps_sigma: 1.5,
            gps_rate: 5.0,
            gps_vel_sigma: 0.05,
            compass_sigma: 0.02,
            gyro_sigma: 0.005,
            beacon_half_angle: 0.5236,
            beacon_max_range: 15.0,
            beacon_sigma: 0.03,
            beacon_rate: 10.0,
            beacon_dropout_p: 0.02,
        }
    }
}

impl SensorParams {
    /// All noise terms zeroed and dropout disabled; geometry and rates kept.
    pub fn noiseless(&self) -> Self {
        Self {
            gps_sigma: 0.0,
            gps_vel_sigma: 0.0,
            compass_sigma: 0.0,
            gyro_sigma: 0.0,
            beacon_sigma: 0.0,
            beacon_dropout_p: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsFix {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub valid: bool,
    pub rate_hz: f64,
}

impl GpsFix {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompassReading {
    pub yaw_meas: f64,
}

/// Beacon position relative to the detector in the UAV's level frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrBeaconMeasurement {
    pub dx: f64,
    pub dy: f64,
    pub detected: bool,
}

impl IrBeaconMeasurement {
    pub fn missed() -> Self {
        Self {
            dx: 0.0,
            dy: 0.0,
            detected: false,
        }
    }

    pub fn offset(&self) -> Option<Vec2> {
        self.detected.then(|| Vec2::new(self.dx, self.dy))
    }
}

pub fn sample_gps(
    true_pos: Vec2,
    true_vel: Vec2,
    params: &SensorParams,
    rng: &mut RngStream,
) -> GpsFix {
    GpsFix {
        x: true_pos.x + rng.normal(params.gps_sigma),
        y: true_pos.y + rng.normal(params.gps_sigma),
        vx: true_vel.x + rng.normal(params.gps_vel_sigma),
        vy: true_vel.y + rng.normal(params.gps_vel_sigma),
        valid: true,
        rate_hz: params.gps_rate,
    }
}

pub fn sample_compass(true_yaw: f64, params: &SensorParams, rng: &mut RngStream) -> CompassReading {
    CompassReading {
        yaw_meas: wrap_angle(true_yaw + rng.normal(params.compass_sigma)),
    }
}

pub fn sample_gyro(true_rate: f64, params: &SensorParams, rng: &mut RngStream) -> f64 {
    true_rate + rng.normal(params.gyro_sigma)
}

/// True when a beacon at `offset` (horizontal) and `height` below the
/// detector lies inside the detector's cone and range.
pub fn beacon_visible(offset: Vec2, height: f64, params: &SensorParams) -> bool {
    if height <= 0.0 {
        return false;
    }
    let rho = offset.norm();
    let slant = (height * height + rho * rho).sqrt();
    rho <= height * params.beacon_half_angle.tan() && slant <= params.beacon_max_range
}

pub fn sample_ir_beacon(
    uav: &UavState,
    beacon_world: Vec3,
    params: &SensorParams,
    rng: &mut RngStream,
) -> IrBeaconMeasurement {
    // Fixed draw count per call keeps the stream aligned regardless of geometry.
    let dropout_draw = rng.uniform();
    let nx = rng.standard_normal();
    let ny = rng.standard_normal();

    let offset = Vec2::new(beacon_world.x - uav.px, beacon_world.y - uav.py);
    let height = uav.pz - beacon_world.z;
    if !beacon_visible(offset, height, params) || dropout_draw < params.beacon_dropout_p {
        return IrBeaconMeasurement::missed();
    }
    IrBeaconMeasurement {
        dx: offset.x + params.beacon_sigma * nx,
        dy: offset.y + params.beacon_sigma * ny,
        detected: true,
    }
}
