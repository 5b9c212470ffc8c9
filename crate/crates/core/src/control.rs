//! USV speed and heading control, thrust allocation, and the UAV velocity
//! command used while landing.

use serde::{Deserialize, Serialize};

use crate::dynamics::{UavParams, UsvParams};
use crate::math::{clamp_norm, wrap_angle, Vec2, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainSet {
    pub speed_kp: f64,
    pub speed_ki: f64,
    /// Bound on the integral contribution `speed_ki * integral`, N.
    pub speed_integral_limit: f64,
    pub heading_kp: f64,
    pub heading_kd: f64,
    pub uav_kp_xy: f64,
    pub uav_kp_z: f64,
    pub uav_v_descend: f64,
}

impl Default for GainSet {
    fn default() -> Self {
        Self {
            speed_kp: 60.0,
            speed_ki: 10.0,
            speed_integral_limit: 40.0,
            heading_kp: 80.0,
            heading_kd: 40.0,
            uav_kp_xy: 0.8,
            uav_kp_z: 0.8,
            uav_v_descend: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpeedCtrlState {
    pub integral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotorCommand {
    pub thrust_left: f64,
    pub thrust_right: f64,
}

impl MotorCommand {
    pub fn total(&self) -> f64 {
        self.thrust_left + self.thrust_right
    }
}

/// PI speed law with integral clamping. Returns the total thrust command.
pub fn pi_speed(
    speed_des: f64,
    speed_meas: f64,
    state: SpeedCtrlState,
    gains: &GainSet,
    dt: f64,
) -> (f64, SpeedCtrlState) {
    let e = speed_des - speed_meas;
    let mut integral = state.integral + e * dt;
    if gains.speed_ki > 0.0 {
        let bound = gains.speed_integral_limit / gains.speed_ki;
        integral = integral.clamp(-bound, bound);
    }
    let output = gains.speed_kp * e + gains.speed_ki * integral;
    (output, SpeedCtrlState { integral })
}

pub fn heading_error(heading_des: f64, yaw_meas: f64) -> f64 {
    wrap_angle(heading_des - yaw_meas)
}

/// PD heading law; damping acts on the measured yaw rate.
pub fn pd_heading(heading_des: f64, yaw_meas: f64, yaw_rate_meas: f64, gains: &GainSet) -> f64 {
    gains.heading_kp * heading_error(heading_des, yaw_meas) - gains.heading_kd * yaw_rate_meas
}

/// Splits total thrust and yaw moment across the two motors.
///
/// Saturation keeps the differential (yaw authority) and gives up common
/// mode first; only when the differential alone exceeds the limit is it
/// scaled down, with zero common mode.
pub fn allocate_thrust(total_thrust: f64, yaw_moment: f64, params: &UsvParams) -> MotorCommand {
    let max = params.thrust_max;
    let common = total_thrust / 2.0;
    let diff = yaw_moment / (2.0 * params.motor_lever_b);
    let (common, diff) = if diff.abs() <= max {
        let room = max - diff.abs();
        (common.clamp(-room, room), diff)
    } else {
        (0.0, diff.signum() * max)
    };
    MotorCommand {
        thrust_left: (common - diff).clamp(-max, max),
        thrust_right: (common + diff).clamp(-max, max),
    }
}

/// Horizontal velocity toward the beacon plus the fixed descent rate when `descend`.
pub fn uav_landing_velocity(
    rel_offset: Vec2,
    descend: bool,
    gains: &GainSet,
    params: &UavParams,
) -> Vec3 {
    let v_xy = clamp_norm(rel_offset * gains.uav_kp_xy, params.v_xy_max);
    let v_z = if descend {
        -gains.uav_v_descend.min(params.v_down_max)
    } else {
        0.0
    };
    Vec3::new(v_xy.x, v_xy.y, v_z)
}

/// Climb-only altitude hold used outside the descent phase.
pub fn uav_altitude_hold(target_alt: f64, pz: f64, gains: &GainSet, params: &UavParams) -> f64 {
    (gains.uav_kp_z * (target_alt - pz)).clamp(0.0, params.v_up_max)
}
