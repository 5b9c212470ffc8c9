//! Vehicle and wind models plus the fixed-step integrator.
//!
//! The USV is a surge-yaw catamaran driven by two motors a lever arm `b`
//! either side of the centreline:
//!
//! ```text
//! x'   = u cos(yaw)
//! y'   = u sin(yaw)
//! yaw' = r
//! m u' = (T_l + T_r) - d_lin u - d_quad u |u| + F_wind
//! I r' = (T_r - T_l) b - d_yaw r
//! ```
//!
//! The UAV is a point mass whose velocity follows the command with a first
//! order lag; a fraction of the wind is added to its ground velocity.

use serde::{Deserialize, Serialize};

use crate::math::{wrap_angle, Vec2, Vec3};
use crate::rng::RngStream;
use crate::SimError;

/// Maximum thrust of one trolling motor, N.
pub const MOTOR_THRUST_MAX: f64 = 133.8;

/// Mass of one hull with motor and deck section, kg.
pub const HULL_ASSEMBLED_MASS: f64 = 17.4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsvState {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub surge_u: f64,
    pub yaw_rate_r: f64,
}

impl UsvState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// World-frame ground velocity.
    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.surge_u * self.yaw.cos(), self.surge_u * self.yaw.sin())
    }

    fn to_array(self) -> [f64; 5] {
        [self.x, self.y, self.yaw, self.surge_u, self.yaw_rate_r]
    }

    fn from_array(a: [f64; 5]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            yaw: a[2],
            surge_u: a[3],
            yaw_rate_r: a[4],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsvParams {
    /// Two assembled hulls plus the control box and platform frame.
    pub mass: f64,
    pub yaw_inertia: f64,
    pub linear_drag_u: f64,
    pub quad_drag_u: f64,
    pub yaw_drag: f64,
    /// Half the transverse distance between the motors.
    pub motor_lever_b: f64,
    pub thrust_max: f64,
    /// Surge force per (m/s)^2 of along-heading wind. Zero disables wind on the hull.
    pub wind_force_coeff: f64,
}

impl Default for UsvParams {
    fn default() -> Self {
        // Drag chosen so that 40 N total thrust balances at 1.5 m/s:
        // 10 * 1.5 + (100/9) * 1.5^2 = 40.
        Self {
            mass: 2.0 * HULL_ASSEMBLED_MASS + 5.2,
            yaw_inertia: 12.0,
            linear_drag_u: 10.0,
            quad_drag_u: 100.0 / 9.0,
            yaw_drag: 20.0,
            motor_lever_b: 0.5,
            thrust_max: MOTOR_THRUST_MAX,
            wind_force_coeff: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavState {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl UavState {
    pub fn horizontal(&self) -> Vec2 {
        Vec2::new(self.px, self.py)
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.px, self.py, self.pz)
    }

    fn to_array(self) -> [f64; 6] {
        [self.px, self.py, self.pz, self.vx, self.vy, self.vz]
    }

    fn from_array(a: [f64; 6]) -> Self {
        Self {
            px: a[0],
            py: a[1],
            pz: a[2],
            vx: a[3],
            vy: a[4],
            vz: a[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavParams {
    pub vel_time_constant_tau: f64,
    pub v_xy_max: f64,
    pub v_up_max: f64,
    pub v_down_max: f64,
    /// Fraction of the wind velocity that leaks through the autopilot into ground velocity.
    pub wind_coupling: f64,
}

impl Default for UavParams {
    fn default() -> Self {
        Self {
            vel_time_constant_tau: 0.5,
            v_xy_max: 2.0,
            v_up_max: 1.5,
            v_down_max: 1.0,
            wind_coupling: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindParams {
    pub mean: Vec2,
    /// Gust diffusion, m/s per sqrt(s).
    pub gust_sigma: f64,
    /// Gust mean-reversion rate, 1/s.
    pub gust_theta: f64,
}

impl Default for WindParams {
    fn default() -> Self {
        Self {
            mean: Vec2::zeros(),
            gust_sigma: 0.0,
            gust_theta: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindState {
    pub mean: Vec2,
    pub gust: Vec2,
}

impl WindState {
    pub fn calm() -> Self {
        Self {
            mean: Vec2::zeros(),
            gust: Vec2::zeros(),
        }
    }

    pub fn from_params(params: &WindParams) -> Self {
        Self {
            mean: params.mean,
            gust: Vec2::zeros(),
        }
    }

    pub fn total(&self) -> Vec2 {
        self.mean + self.gust
    }
}

pub fn usv_derivatives(
    state: &UsvState,
    thrust_left: f64,
    thrust_right: f64,
    wind: Vec2,
    params: &UsvParams,
) -> Result<UsvState, SimError> {
    for thrust in [thrust_left, thrust_right] {
        if thrust.abs() > params.thrust_max {
            return Err(SimError::ThrustSaturation {
                thrust,
                max: params.thrust_max,
            });
        }
    }
    Ok(usv_rates(state, thrust_left, thrust_right, wind, params))
}

fn usv_rates(s: &UsvState, tl: f64, tr: f64, wind: Vec2, p: &UsvParams) -> UsvState {
    let u = s.surge_u;
    let wind_force = if p.wind_force_coeff > 0.0 {
        let w_u = wind.x * s.yaw.cos() + wind.y * s.yaw.sin();
        p.wind_force_coeff * w_u * w_u.abs()
    } else {
        0.0
    };
    let surge_force = (tl + tr) - p.linear_drag_u * u - p.quad_drag_u * u * u.abs() + wind_force;
    let yaw_moment = (tr - tl) * p.motor_lever_b - p.yaw_drag * s.yaw_rate_r;
    UsvState {
        x: u * s.yaw.cos(),
        y: u * s.yaw.sin(),
        yaw: s.yaw_rate_r,
        surge_u: surge_force / p.mass,
        yaw_rate_r: yaw_moment / p.yaw_inertia,
    }
}

pub fn uav_derivatives(
    state: &UavState,
    v_cmd: Vec3,
    wind: &WindState,
    params: &UavParams,
) -> UavState {
    let tau = params.vel_time_constant_tau;
    let drift = wind.total() * params.wind_coupling;
    UavState {
        px: state.vx + drift.x,
        py: state.vy + drift.y,
        pz: state.vz,
        vx: (v_cmd.x - state.vx) / tau,
        vy: (v_cmd.y - state.vy) / tau,
        vz: (v_cmd.z - state.vz) / tau,
    }
}

/// Advances the gust by one step of the discretised mean-reverting process.
pub fn wind_step(wind: &WindState, params: &WindParams, dt: f64, rng: &mut RngStream) -> WindState {
    let decay = 1.0 - params.gust_theta * dt;
    let scale = params.gust_sigma * dt.sqrt();
    let xi = Vec2::new(rng.normal(scale), rng.normal(scale));
    WindState {
        mean: wind.mean,
        gust: wind.gust * decay + xi,
    }
}

/// One classical Runge-Kutta step for an autonomous system `y' = f(y)`.
pub fn rk4_step<const N: usize>(
    y: [f64; N],
    dt: f64,
    f: impl Fn(&[f64; N]) -> [f64; N],
) -> [f64; N] {
    let offset = |base: &[f64; N], k: &[f64; N], h: f64| {
        let mut out = *base;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += h * ki;
        }
        out
    };
    let k1 = f(&y);
    let k2 = f(&offset(&y, &k1, dt / 2.0));
    let k3 = f(&offset(&y, &k2, dt / 2.0));
    let k4 = f(&offset(&y, &k3, dt));
    let mut out = y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleStates {
    pub usv: UsvState,
    pub uav: UavState,
}

/// Inputs held constant over one physics step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInputs {
    pub thrust_left: f64,
    pub thrust_right: f64,
    pub uav_velocity_cmd: Vec3,
    pub wind: WindState,
    /// Landed UAVs ride the deck instead of integrating their own dynamics.
    pub uav_frozen: bool,
}

pub fn integrate_step(
    states: &VehicleStates,
    inputs: &StepInputs,
    usv_params: &UsvParams,
    uav_params: &UavParams,
    dt: f64,
    step_index: u64,
) -> Result<VehicleStates, SimError> {
    // Validates saturation once; the stages below reuse the checked inputs.
    usv_derivatives(
        &states.usv,
        inputs.thrust_left,
        inputs.thrust_right,
        inputs.wind.total(),
        usv_params,
    )?;
    let wind = inputs.wind.total();
    let usv = rk4_step(states.usv.to_array(), dt, |y| {
        usv_rates(
            &UsvState::from_array(*y),
            inputs.thrust_left,
            inputs.thrust_right,
            wind,
            usv_params,
        )
        .to_array()
    });
    let mut usv = UsvState::from_array(usv);
    usv.yaw = wrap_angle(usv.yaw);

    let uav = if inputs.uav_frozen {
        states.uav
    } else {
        let next = rk4_step(states.uav.to_array(), dt, |y| {
            uav_derivatives(
                &UavState::from_array(*y),
                inputs.uav_velocity_cmd,
                &inputs.wind,
                uav_params,
            )
            .to_array()
        });
        UavState::from_array(next)
    };

    if !usv.is_finite() || !uav.is_finite() {
        return Err(SimError::NonFinite { step: step_index });
    }
    Ok(VehicleStates { usv, uav })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn drag_balance_bisection(total: f64, p: &UsvParams) -> f64 {
        let f = |u: f64| p.linear_drag_u * u + p.quad_drag_u * u * u - total;
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn equilibrium_has_zero_derivatives() {
        let d = usv_derivatives(
            &UsvState::default(),
            0.0,
            0.0,
            Vec2::zeros(),
            &UsvParams::default(),
        )
        .unwrap();
        assert_eq!(d, UsvState::default());
    }

    #[test]
    fn default_drag_reaches_design_speed() {
        let p = UsvParams::default();
        let u = drag_balance_bisection(40.0, &p);
        assert_abs_diff_eq!(u, 1.5, epsilon = 1e-9);
    }

    #[test]
    fn drag_balance_gives_zero_acceleration() {
        let p = UsvParams::default();
        let u = drag_balance_bisection(60.0, &p);
        let s = UsvState {
            surge_u: u,
            ..Default::default()
        };
        let d = usv_derivatives(&s, 30.0, 30.0, Vec2::zeros(), &p).unwrap();
        assert_abs_diff_eq!(d.surge_u, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn differential_thrust_moment() {
        let p = UsvParams {
            motor_lever_b: 0.5,
            ..Default::default()
        };
        let d = usv_derivatives(&UsvState::default(), -10.0, 10.0, Vec2::zeros(), &p).unwrap();
        assert_abs_diff_eq!(d.yaw_rate_r * p.yaw_inertia, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn unclamped_thrust_is_rejected() {
        let err = usv_derivatives(
            &UsvState::default(),
            200.0,
            0.0,
            Vec2::zeros(),
            &UsvParams::default(),
        );
        assert!(matches!(err, Err(SimError::ThrustSaturation { .. })));
    }

    #[test]
    fn uav_steady_state_and_lag() {
        let p = UavParams {
            vel_time_constant_tau: 0.5,
            wind_coupling: 0.0,
            ..Default::default()
        };
        let s = UavState {
            vx: 1.0,
            vy: 2.0,
            ..Default::default()
        };
        let d = uav_derivatives(&s, Vec3::new(1.0, 2.0, 0.0), &WindState::calm(), &p);
        assert_eq!((d.vx, d.vy, d.vz), (0.0, 0.0, 0.0));
        assert_eq!((d.px, d.py), (1.0, 2.0));

        let d = uav_derivatives(
            &UavState::default(),
            Vec3::new(1.0, 0.0, 0.0),
            &WindState::calm(),
            &p,
        );
        assert_abs_diff_eq!(d.vx, 2.0);
    }

    #[test]
    fn uav_pure_wind_drift() {
        let p = UavParams {
            wind_coupling: 1.0,
            ..Default::default()
        };
        let wind = WindState {
            mean: Vec2::new(0.0, -1.0),
            gust: Vec2::zeros(),
        };
        let d = uav_derivatives(&UavState::default(), Vec3::zeros(), &wind, &p);
        assert_eq!((d.px, d.py, d.pz), (0.0, -1.0, 0.0));
    }

    #[test]
    fn gust_deterministic_limits() {
        let mut rng = derive_stream(1, "wind_gust", 0);
        let p = WindParams {
            mean: Vec2::new(1.0, 0.0),
            gust_sigma: 0.0,
            gust_theta: 0.5,
        };
        let mut w = WindState {
            mean: p.mean,
            gust: Vec2::new(1.0, 1.0),
        };
        for _ in 0..10 {
            let next = wind_step(&w, &p, 0.02, &mut rng);
            assert_abs_diff_eq!(next.gust.x, w.gust.x * 0.99, epsilon = 1e-15);
            w = next;
        }
        let frozen = WindParams {
            gust_theta: 0.0,
            ..p
        };
        let w2 = wind_step(&w, &frozen, 0.02, &mut rng);
        assert_eq!(w2, w);
    }

    #[test]
    fn gust_stationary_variance() {
        let (sigma, theta, dt) = (0.5, 0.5, 0.02);
        let p = WindParams {
            mean: Vec2::zeros(),
            gust_sigma: sigma,
            gust_theta: theta,
        };
        let mut rng = derive_stream(7, "wind_gust", 0);
        let mut w = WindState::calm();
        // burn-in of ~10 correlation times
        for _ in 0..2_000 {
            w = wind_step(&w, &p, dt, &mut rng);
        }
        let n = 1_000_000;
        let (mut sx, mut sxx) = (0.0, 0.0);
        for _ in 0..n {
            w = wind_step(&w, &p, dt, &mut rng);
            sx += w.gust.x;
            sxx += w.gust.x * w.gust.x;
        }
        let mean = sx / n as f64;
        let var = sxx / n as f64 - mean * mean;
        let expected = sigma * sigma / (2.0 * theta - theta * theta * dt);
        assert!(
            (var - expected).abs() / expected < 0.05,
            "var {var} vs {expected}"
        );
    }

    #[test]
    fn gust_same_seed_same_sequence() {
        let p = WindParams {
            gust_sigma: 0.5,
            ..Default::default()
        };
        let run = || {
            let mut rng = derive_stream(3, "wind_gust", 2);
            let mut w = WindState::calm();
            (0..100)
                .map(|_| {
                    w = wind_step(&w, &p, 0.02, &mut rng);
                    w.gust
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rk4_matches_exponential() {
        let (dt, tau) = (0.02, 0.5);
        let mut v = [0.0];
        for _ in 0..500 {
            v = rk4_step(v, dt, |y| [(1.0 - y[0]) / tau]);
        }
        assert!((v[0] - (1.0 - (-20.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_unchanged() {
        let states = VehicleStates {
            usv: UsvState {
                x: 3.0,
                y: -2.0,
                yaw: 0.4,
                ..Default::default()
            },
            uav: UavState {
                px: 1.0,
                pz: 5.0,
                ..Default::default()
            },
        };
        let inputs = StepInputs {
            thrust_left: 0.0,
            thrust_right: 0.0,
            uav_velocity_cmd: Vec3::zeros(),
            wind: WindState::calm(),
            uav_frozen: false,
        };
        let next = integrate_step(
            &states,
            &inputs,
            &UsvParams::default(),
            &UavParams::default(),
            0.02,
            0,
        )
        .unwrap();
        assert_eq!(next, states);
    }

    #[test]
    fn zero_inputs_keep_both_vehicles_still() {
        let mut states = VehicleStates {
            usv: UsvState {
                x: 1.0,
                y: 2.0,
                yaw: -0.7,
                ..Default::default()
            },
            uav: UavState {
                px: -4.0,
                py: 3.0,
                pz: 6.0,
                ..Default::default()
            },
        };
        let start = states;
        let inputs = StepInputs {
            thrust_left: 0.0,
            thrust_right: 0.0,
            uav_velocity_cmd: Vec3::zeros(),
            wind: WindState::calm(),
            uav_frozen: false,
        };
        for step in 0..10_000 {
            states = integrate_step(
                &states,
                &inputs,
                &UsvParams::default(),
                &UavParams::default(),
                0.02,
                step,
            )
            .unwrap();
        }
        assert_eq!(states, start);
    }

    #[test]
    fn yaw_wraps_past_pi() {
        let states = VehicleStates {
            usv: UsvState {
                yaw: PI - 0.001,
                yaw_rate_r: 1.0,
                ..Default::default()
            },
            uav: UavState::default(),
        };
        let inputs = StepInputs {
            thrust_left: 0.0,
            thrust_right: 0.0,
            uav_velocity_cmd: Vec3::zeros(),
            wind: WindState::calm(),
            uav_frozen: false,
        };
        let next = integrate_step(
            &states,
            &inputs,
            &UsvParams::default(),
            &UavParams::default(),
            0.02,
            0,
        )
        .unwrap();
        assert!(next.usv.yaw > -PI && next.usv.yaw < 0.0);
    }

    #[test]
    fn non_finite_state_reports_step() {
        let states = VehicleStates {
            usv: UsvState {
                x: f64::NAN,
                ..Default::default()
            },
            uav: UavState::default(),
        };
        let inputs = StepInputs {
            thrust_left: 0.0,
            thrust_right: 0.0,
            uav_velocity_cmd: Vec3::zeros(),
            wind: WindState::calm(),
            uav_frozen: false,
        };
        let err = integrate_step(
            &states,
            &inputs,
            &UsvParams::default(),
            &UavParams::default(),
            0.02,
            42,
        );
        assert_eq!(err, Err(SimError::NonFinite { step: 42 }));
    }
}
