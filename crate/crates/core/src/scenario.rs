//! Scenario description, JSON ingestion and the world clock.
//!
//! Every key is optional; missing keys take the defaults below and unknown
//! keys are rejected. See `scenarios/README.md` for the full schema.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::GainSet;
use crate::dynamics::{UavParams, UavState, UsvParams, UsvState, WindParams};
use crate::guidance::GuidanceParams;
use crate::landing::LandingParams;
use crate::math::{in_wrapped_range, Vec2};
use crate::sensors::SensorParams;
use crate::SimError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsvSetup {
    pub params: UsvParams,
    pub initial: UsvState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavSetup {
    pub params: UavParams,
    pub initial: UavState,
}

impl Default for UavSetup {
    fn default() -> Self {
        Self {
            params: UavParams::default(),
            initial: UavState {
                px: -15.0,
                py: 10.0,
                pz: 6.0,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub sim_dt: f64,
    pub control_dt: f64,
    pub duration_max: f64,
    pub seed: u64,
    pub usv: UsvSetup,
    pub uav: UavSetup,
    pub wind: WindParams,
    pub sensors: SensorParams,
    pub gains: GainSet,
    pub guidance: GuidanceParams,
    pub waypoints: Vec<Vec2>,
    pub landing: LandingParams,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            sim_dt: 0.02,
            control_dt: 0.1,
            duration_max: 120.0,
            seed: 0,
            usv: UsvSetup::default(),
            uav: UavSetup::default(),
            wind: WindParams::default(),
            sensors: SensorParams::default(),
            gains: GainSet::default(),
            guidance: GuidanceParams::default(),
            waypoints: Vec::new(),
            landing: LandingParams::default(),
        }
    }
}

/// Number of `sim_dt` steps in `period`, if it is a whole multiple.
fn whole_steps(period: f64, sim_dt: f64) -> Option<u64> {
    let ratio = period / sim_dt;
    let rounded = ratio.round();
    (rounded >= 1.0 && (ratio - rounded).abs() <= 1e-9 * rounded).then_some(rounded as u64)
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn path_following_enabled(&self) -> bool {
        !self.landing.enabled || !self.waypoints.is_empty()
    }

    pub fn control_steps(&self) -> u64 {
        whole_steps(self.control_dt, self.sim_dt).expect("validated")
    }

    pub fn gps_steps(&self) -> u64 {
        whole_steps(1.0 / self.sensors.gps_rate, self.sim_dt).expect("validated")
    }

    pub fn beacon_steps(&self) -> u64 {
        whole_steps(1.0 / self.sensors.beacon_rate, self.sim_dt).expect("validated")
    }

    /// Same scenario with every sensor noise term and the wind switched off.
    pub fn noiseless_calm(&self) -> Self {
        Self {
            sensors: self.sensors.noiseless(),
            wind: WindParams {
                mean: Vec2::zeros(),
                gust_sigma: 0.0,
                ..self.wind.clone()
            },
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(
                    field,
                    format!("must be a finite positive number, got {v}"),
                ))
            }
        };
        let non_negative = |field: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be finite and >= 0, got {v}")))
            }
        };

        positive("sim_dt", self.sim_dt)?;
        positive("control_dt", self.control_dt)?;
        if whole_steps(self.control_dt, self.sim_dt).is_none() {
            return Err(invalid(
                "control_dt",
                format!(
                    "{} is not an integer multiple of sim_dt {}",
                    self.control_dt, self.sim_dt
                ),
            ));
        }
        positive("duration_max", self.duration_max)?;

        let u = &self.usv.params;
        positive("usv.params.mass", u.mass)?;
        positive("usv.params.yaw_inertia", u.yaw_inertia)?;
        non_negative("usv.params.linear_drag_u", u.linear_drag_u)?;
        non_negative("usv.params.quad_drag_u", u.quad_drag_u)?;
        non_negative("usv.params.yaw_drag", u.yaw_drag)?;
        positive("usv.params.motor_lever_b", u.motor_lever_b)?;
        positive("usv.params.thrust_max", u.thrust_max)?;
        non_negative("usv.params.wind_force_coeff", u.wind_force_coeff)?;
        let s0 = &self.usv.initial;
        if !s0.is_finite() {
            return Err(invalid("usv.initial", "all values must be finite"));
        }
        if !in_wrapped_range(s0.yaw) {
            return Err(invalid("usv.initial.yaw", "must lie in (-pi, pi]"));
        }

        let a = &self.uav.params;
        positive("uav.params.vel_time_constant_tau", a.vel_time_constant_tau)?;
        positive("uav.params.v_xy_max", a.v_xy_max)?;
        positive("uav.params.v_up_max", a.v_up_max)?;
        positive("uav.params.v_down_max", a.v_down_max)?;
        if !(0.0..=1.0).contains(&a.wind_coupling) {
            return Err(invalid("uav.params.wind_coupling", "must lie in [0, 1]"));
        }
        if !self.uav.initial.is_finite() {
            return Err(invalid("uav.initial", "all values must be finite"));
        }
        non_negative("uav.initial.pz", self.uav.initial.pz)?;

        if !(self.wind.mean.x.is_finite() && self.wind.mean.y.is_finite()) {
            return Err(invalid("wind.mean", "must be finite"));
        }
        non_negative("wind.gust_sigma", self.wind.gust_sigma)?;
        non_negative("wind.gust_theta", self.wind.gust_theta)?;
        if self.wind.gust_theta * self.sim_dt >= 1.0 {
            return Err(invalid(
                "wind.gust_theta",
                "gust_theta * sim_dt must be below 1",
            ));
        }

        let s = &self.sensors;
        non_negative("sensors.gps_sigma", s.gps_sigma)?;
        non_negative("sensors.gps_vel_sigma", s.gps_vel_sigma)?;
        non_negative("sensors.compass_sigma", s.compass_sigma)?;
        non_negative("sensors.gyro_sigma", s.gyro_sigma)?;
        non_negative("sensors.beacon_sigma", s.beacon_sigma)?;
        positive("sensors.gps_rate", s.gps_rate)?;
        positive("sensors.beacon_rate", s.beacon_rate)?;
        if whole_steps(1.0 / s.gps_rate, self.sim_dt).is_none() {
            return Err(invalid(
                "sensors.gps_rate",
                "sample period must be a whole number of sim_dt steps",
            ));
        }
        if whole_steps(1.0 / s.beacon_rate, self.sim_dt).is_none() {
            return Err(invalid(
                "sensors.beacon_rate",
                "sample period must be a whole number of sim_dt steps",
            ));
        }
        if !(s.beacon_half_angle > 0.0 && s.beacon_half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(invalid(
                "sensors.beacon_half_angle",
                "must lie in (0, pi/2)",
            ));
        }
        positive("sensors.beacon_max_range", s.beacon_max_range)?;
        if !(0.0..1.0).contains(&s.beacon_dropout_p) {
            return Err(invalid("sensors.beacon_dropout_p", "must lie in [0, 1)"));
        }

        let g = &self.gains;
        for (field, v) in [
            ("gains.speed_kp", g.speed_kp),
            ("gains.speed_ki", g.speed_ki),
            ("gains.heading_kp", g.heading_kp),
            ("gains.heading_kd", g.heading_kd),
            ("gains.uav_kp_xy", g.uav_kp_xy),
            ("gains.uav_kp_z", g.uav_kp_z),
            ("gains.uav_v_descend", g.uav_v_descend),
        ] {
            non_negative(field, v)?;
        }
        positive("gains.speed_integral_limit", g.speed_integral_limit)?;

        positive("guidance.carrot_delta", self.guidance.carrot_delta)?;
        positive("guidance.accept_radius", self.guidance.accept_radius)?;
        positive("guidance.cruise_speed", self.guidance.cruise_speed)?;

        let l = &self.landing;
        positive("landing.switch_radius", l.switch_radius)?;
        positive("landing.acquire_altitude", l.acquire_altitude)?;
        positive("landing.touchdown_alt", l.touchdown_alt)?;
        positive("landing.platform_half_x", l.platform_half_x)?;
        positive("landing.platform_half_y", l.platform_half_y)?;
        positive("landing.platform_deck_z", l.platform_deck_z)?;
        if l.lock_frames < 1 {
            return Err(invalid("landing.lock_frames", "must be at least 1"));
        }
        if l.loss_frames < 1 {
            return Err(invalid("landing.loss_frames", "must be at least 1"));
        }
        if l.acquire_altitude <= l.platform_deck_z + l.touchdown_alt {
            return Err(invalid(
                "landing.acquire_altitude",
                "must be above the deck touchdown height",
            ));
        }

        if !l.enabled && self.waypoints.is_empty() {
            return Err(invalid(
                "waypoints",
                "path following needs at least one waypoint",
            ));
        }
        for (i, w) in self.waypoints.iter().enumerate() {
            if !(w.x.is_finite() && w.y.is_finite()) {
                return Err(invalid("waypoints", format!("waypoint {i} is not finite")));
            }
        }
        if let Some(i) = self.waypoints.windows(2).position(|p| p[0] == p[1]) {
            return Err(invalid(
                "waypoints",
                format!("waypoints {i} and {} coincide", i + 1),
            ));
        }
        Ok(())
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_json_str(&text)
}

/// Simulation time derived from the integer step count.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WorldClock {
    pub t: f64,
    pub step_index: u64,
}

impl WorldClock {
    pub fn at_step(step_index: u64, sim_dt: f64) -> Self {
        Self {
            t: step_index as f64 * sim_dt,
            step_index,
        }
    }
}

pub fn advance_clock(clock: WorldClock, scenario: &Scenario) -> Result<WorldClock, SimError> {
    if clock.t >= scenario.duration_max {
        return Err(SimError::PastEnd {
            t: clock.t,
            duration_max: scenario.duration_max,
        });
    }
    Ok(WorldClock::at_step(clock.step_index + 1, scenario.sim_dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: ScenarioError) -> String {
        match err {
            ScenarioError::Invalid { field, .. } => field,
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn minimal_file_takes_defaults() {
        let s = Scenario::from_json_str(r#"{"seed": 7}"#).unwrap();
        assert_eq!(
            s,
            Scenario {
                seed: 7,
                ..Scenario::default()
            }
        );
    }

    #[test]
    fn default_scenario_is_valid() {
        Scenario::default().validate().unwrap();
    }

    #[test]
    fn integer_multiple_control_rate() {
        let s = Scenario::from_json_str(r#"{"sim_dt": 0.02, "control_dt": 0.1}"#).unwrap();
        assert_eq!(s.control_steps(), 5);
        assert_eq!(s.gps_steps(), 10);
        assert_eq!(s.beacon_steps(), 5);
    }

    #[test]
    fn non_multiple_control_rate_rejected() {
        let err = Scenario::from_json_str(r#"{"sim_dt": 0.03, "control_dt": 0.1}"#).unwrap_err();
        assert_eq!(field_of(err), "control_dt");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            Scenario::from_json_str(r#"{"sede": 7}"#),
            Err(ScenarioError::Parse(_))
        ));
        assert!(matches!(
            Scenario::from_json_str(r#"{"usv": {"params": {"mas": 3.0}}}"#),
            Err(ScenarioError::Parse(_))
        ));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(
            Scenario::from_json_str("{seed: 7"),
            Err(ScenarioError::Parse(_))
        ));
    }

    #[test]
    fn field_level_validation() {
        let cases = [
            (r#"{"sim_dt": 0}"#, "sim_dt"),
            (r#"{"duration_max": -1}"#, "duration_max"),
            (r#"{"usv": {"params": {"mass": 0}}}"#, "usv.params.mass"),
            (
                r#"{"uav": {"params": {"wind_coupling": 1.5}}}"#,
                "uav.params.wind_coupling",
            ),
            (
                r#"{"sensors": {"beacon_half_angle": 1.6}}"#,
                "sensors.beacon_half_angle",
            ),
            (
                r#"{"sensors": {"beacon_dropout_p": 1.0}}"#,
                "sensors.beacon_dropout_p",
            ),
            (r#"{"sensors": {"gps_rate": 3.0}}"#, "sensors.gps_rate"),
            (
                r#"{"gains": {"speed_integral_limit": 0}}"#,
                "gains.speed_integral_limit",
            ),
            (r#"{"landing": {"lock_frames": 0}}"#, "landing.lock_frames"),
            (r#"{"landing": {"enabled": false}}"#, "waypoints"),
            (r#"{"waypoints": [[1, 1], [1, 1]]}"#, "waypoints"),
            (r#"{"wind": {"gust_sigma": -0.1}}"#, "wind.gust_sigma"),
        ];
        for (json, field) in cases {
            let err = Scenario::from_json_str(json).unwrap_err();
            assert_eq!(field_of(err), field, "{json}");
        }
    }

    #[test]
    fn load_reports_missing_file() {
        let err = load_scenario("/nonexistent/scenario.json").unwrap_err();
        assert!(matches!(err, ScenarioError::Io { .. }));
    }

    #[test]
    fn json_roundtrip() {
        let s = Scenario {
            waypoints: vec![Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)],
            seed: 3,
            ..Default::default()
        };
        assert_eq!(Scenario::from_json_str(&s.to_json_pretty()).unwrap(), s);
    }

    #[test]
    fn clock_advances_by_step_count() {
        let s = Scenario::default();
        let c = advance_clock(WorldClock::default(), &s).unwrap();
        assert_eq!(
            c,
            WorldClock {
                t: 0.02,
                step_index: 1
            }
        );

        let mut c = WorldClock::default();
        for _ in 0..50 {
            c = advance_clock(c, &s).unwrap();
        }
        assert_eq!(c.t, 1.0);
        assert_eq!(c.step_index, 50);
    }

    #[test]
    fn clock_refuses_to_pass_the_end() {
        let s = Scenario {
            duration_max: 1.0,
            ..Default::default()
        };
        let c = WorldClock::at_step(50, s.sim_dt);
        assert_eq!(c.t, 1.0);
        assert!(matches!(
            advance_clock(c, &s),
            Err(SimError::PastEnd { .. })
        ));
    }

    #[test]
    fn long_runs_do_not_drift() {
        let s = Scenario {
            duration_max: 1.0e6,
            ..Default::default()
        };
        let mut c = WorldClock::default();
        let mut summed = 0.0;
        for _ in 0..100_000 {
            c = advance_clock(c, &s).unwrap();
            summed += s.sim_dt;
        }
        assert_eq!(c.t, 100_000.0 * 0.02);
        assert_ne!(summed, c.t);
    }
}
