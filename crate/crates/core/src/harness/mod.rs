//! Whole-system trial execution.
//!
//! Physics runs every `sim_dt`, controllers and the landing state machine
//! every `control_dt`, and each sensor at its own rate. Sensor ticks are
//! derived from the integer step index, so a trial is fully determined by
//! `(scenario, trial_index)`.

mod audit;
mod batch;
mod output;

pub use audit::{audit_log, Violation};
pub use batch::{run_monte_carlo, BatchSummary, Execution, TrialSummary};
pub use output::{
    fmt_sig9, write_outputs, write_path_outputs, OutputError, OutputFiles, TRAJECTORY_COLUMNS,
};

use serde::{Deserialize, Serialize};

use crate::control::{
    allocate_thrust, heading_error, pd_heading, pi_speed, uav_altitude_hold, uav_landing_velocity,
    MotorCommand, SpeedCtrlState,
};
use crate::dynamics::{
    integrate_step, wind_step, StepInputs, UavState, UsvState, VehicleStates, WindState,
};
use crate::guidance::Mission;
use crate::landing::{
    classify_landing, fsm_step, FsmCounters, LandingPhase, PhaseChange, TrialOutcome,
};
use crate::math::{Vec2, Vec3};
use crate::rng::TrialStreams;
use crate::scenario::{advance_clock, Scenario, WorldClock};
use crate::sensors::{
    sample_compass, sample_gps, sample_gyro, sample_ir_beacon, GpsFix, IrBeaconMeasurement,
};
use crate::SimError;

/// Time a path-following run keeps logging after the mission completes, s.
pub const POST_MISSION_HOLD: f64 = 10.0;

/// |cross_track| threshold used for path convergence reporting, m.
pub const CROSS_TRACK_BAND: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Touchdown,
    MissionComplete,
    Timeout,
}

/// State and commands at one physics step. Commands are those held over
/// `[t, t + sim_dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub step: u64,
    pub usv: UsvState,
    pub uav: UavState,
    pub phase: Option<LandingPhase>,
    pub motor: MotorCommand,
    pub total_thrust_cmd: f64,
    pub speed_des: f64,
    pub heading_des: f64,
    pub heading_error: f64,
    pub speed_integral: f64,
    pub uav_velocity_cmd: Vec3,
    pub cross_track: Option<f64>,
    pub mission_complete: bool,
    pub control_tick: bool,
    pub gps_fix: bool,
    /// `Some(detected)` on beacon sample ticks.
    pub beacon: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub trial_index: u64,
    pub seed: u64,
    pub records: Vec<StepRecord>,
    pub termination: Termination,
    pub landing: Option<TrialOutcome>,
    pub mission_complete_time: Option<f64>,
}

impl TrialLog {
    pub fn cross_track_series(&self) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.cross_track.map(|c| (r.t, c)))
            .collect()
    }
}

struct Engine<'a> {
    scenario: &'a Scenario,
    streams: TrialStreams,
    clock: WorldClock,
    vehicles: VehicleStates,
    wind: WindState,
    mission: Option<Mission>,
    phase: Option<LandingPhase>,
    counters: FsmCounters,
    timeline: Vec<PhaseChange>,
    speed_ctrl: SpeedCtrlState,
    station_keeping: bool,
    heading_hold: f64,
    usv_fix: Option<GpsFix>,
    uav_fix: Option<GpsFix>,
    pending_beacon: Option<IrBeaconMeasurement>,
    // held commands
    motor: MotorCommand,
    total_thrust: f64,
    speed_des: f64,
    heading_des: f64,
    heading_error: f64,
    uav_cmd: Vec3,
    mission_complete_time: Option<f64>,
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a Scenario, trial_index: u64) -> Result<Self, SimError> {
        let start = scenario.usv.initial.position();
        let mission = if scenario.path_following_enabled() {
            Some(Mission::new(start, &scenario.waypoints)?)
        } else {
            None
        };
        let phase = scenario.landing.enabled.then_some(LandingPhase::CruiseGps);
        let timeline = phase
            .map(|p| vec![PhaseChange { t: 0.0, phase: p }])
            .unwrap_or_default();
        Ok(Self {
            scenario,
            streams: TrialStreams::new(scenario.seed, trial_index),
            clock: WorldClock::default(),
            vehicles: VehicleStates {
                usv: scenario.usv.initial,
                uav: scenario.uav.initial,
            },
            wind: WindState::from_params(&scenario.wind),
            mission,
            phase,
            counters: FsmCounters::default(),
            timeline,
            speed_ctrl: SpeedCtrlState::default(),
            station_keeping: false,
            heading_hold: scenario.usv.initial.yaw,
            usv_fix: None,
            uav_fix: None,
            pending_beacon: None,
            motor: MotorCommand::default(),
            total_thrust: 0.0,
            speed_des: 0.0,
            heading_des: scenario.usv.initial.yaw,
            heading_error: 0.0,
            uav_cmd: Vec3::zeros(),
            mission_complete_time: None,
        })
    }

    fn beacon_world(&self) -> Vec3 {
        let usv = &self.vehicles.usv;
        Vec3::new(usv.x, usv.y, self.scenario.landing.platform_deck_z)
    }

    fn sample_sensors(&mut self, step: u64) -> (bool, Option<bool>) {
        let s = self.scenario;
        let gps_tick = step.is_multiple_of(s.gps_steps());
        if gps_tick {
            let usv = &self.vehicles.usv;
            self.usv_fix = Some(sample_gps(
                usv.position(),
                usv.velocity(),
                &s.sensors,
                &mut self.streams.gps,
            ));
            let uav = &self.vehicles.uav;
            self.uav_fix = Some(sample_gps(
                uav.horizontal(),
                Vec2::new(uav.vx, uav.vy),
                &s.sensors,
                &mut self.streams.uav_gps,
            ));
        }
        let mut beacon = None;
        if step.is_multiple_of(s.beacon_steps())
            && matches!(self.phase, Some(p) if p != LandingPhase::Touchdown)
        {
            let m = sample_ir_beacon(
                &self.vehicles.uav,
                self.beacon_world(),
                &s.sensors,
                &mut self.streams.beacon,
            );
            beacon = Some(m.detected);
            self.pending_beacon = Some(m);
        }
        (gps_tick, beacon)
    }

    fn usv_control(&mut self, t: f64) {
        let s = self.scenario;
        let usv = self.vehicles.usv;
        let fix = self.usv_fix.expect("gps sampled at step 0");
        let yaw_meas = sample_compass(usv.yaw, &s.sensors, &mut self.streams.compass).yaw_meas;
        let rate_meas = sample_gyro(usv.yaw_rate_r, &s.sensors, &mut self.streams.gyro);
        let speed_meas = fix.vx * yaw_meas.cos() + fix.vy * yaw_meas.sin();

        let beacon_phase = matches!(
            self.phase,
            Some(
                LandingPhase::Acquire
                    | LandingPhase::PrecisionDescent
                    | LandingPhase::Reacquire
                    | LandingPhase::Touchdown
            )
        );
        let hold_station = beacon_phase && !s.landing.moving_deck;

        let mut stop = true;
        if let Some(mission) = self.mission.as_mut().filter(|_| !hold_station) {
            let was_complete = mission.is_complete();
            let out = mission.update(fix.position(), &s.guidance);
            if out.mission_complete && !was_complete {
                self.mission_complete_time = Some(t);
            }
            if !out.mission_complete {
                self.speed_des = out.speed_des;
                self.heading_des = out.heading_des;
                self.heading_hold = out.heading_des;
                stop = false;
            }
        }
        if stop {
            self.speed_des = 0.0;
            self.heading_des = self.heading_hold;
        }
        if stop != self.station_keeping {
            self.speed_ctrl = SpeedCtrlState::default();
            self.station_keeping = stop;
        }

        let (total, speed_ctrl) = pi_speed(
            self.speed_des,
            speed_meas,
            self.speed_ctrl,
            &s.gains,
            s.control_dt,
        );
        self.speed_ctrl = speed_ctrl;
        self.total_thrust = total;
        self.heading_error = heading_error(self.heading_des, yaw_meas);
        let moment = pd_heading(self.heading_des, yaw_meas, rate_meas, &s.gains);
        self.motor = allocate_thrust(total, moment, &s.usv.params);
    }

    /// Returns true once the UAV has touched down.
    fn uav_control(&mut self, t: f64) -> bool {
        let s = self.scenario;
        let Some(phase) = self.phase else {
            self.uav_cmd = Vec3::zeros();
            return false;
        };
        let uav = self.vehicles.uav;
        let uav_fix = self.uav_fix.expect("gps sampled at step 0");
        let nav = UavState {
            px: uav_fix.x,
            py: uav_fix.y,
            ..uav
        };
        let beacon = self.pending_beacon.take();
        let step = fsm_step(
            phase,
            self.counters,
            &nav,
            self.usv_fix.as_ref().expect("gps sampled at step 0"),
            beacon.as_ref(),
            &s.landing,
        );
        self.counters = step.counters;
        if step.phase != phase {
            self.timeline.push(PhaseChange {
                t,
                phase: step.phase,
            });
            log::debug!("t={t:.2} {phase} -> {}", step.phase);
        }
        self.phase = Some(step.phase);
        if step.phase == LandingPhase::Touchdown {
            self.uav_cmd = Vec3::zeros();
            return true;
        }
        let mut v = uav_landing_velocity(step.target_offset, step.descend, &s.gains, &s.uav.params);
        if !step.descend {
            v.z = uav_altitude_hold(step.target_alt, uav.pz, &s.gains, &s.uav.params);
        }
        self.uav_cmd = v;
        false
    }

    fn record(
        &self,
        step: u64,
        control_tick: bool,
        gps_fix: bool,
        beacon: Option<bool>,
    ) -> StepRecord {
        let usv = self.vehicles.usv;
        let cross_track = self
            .mission
            .as_ref()
            .map(|m| m.current_segment().cross_track(usv.position()));
        StepRecord {
            t: self.clock.t,
            step,
            usv,
            uav: self.vehicles.uav,
            phase: self.phase,
            motor: self.motor,
            total_thrust_cmd: self.total_thrust,
            speed_des: self.speed_des,
            heading_des: self.heading_des,
            heading_error: self.heading_error,
            speed_integral: self.speed_ctrl.integral,
            uav_velocity_cmd: self.uav_cmd,
            cross_track,
            mission_complete: self.mission.as_ref().is_some_and(|m| m.is_complete()),
            control_tick,
            gps_fix,
            beacon,
        }
    }

    fn run(mut self, trial_index: u64) -> Result<TrialLog, SimError> {
        let s = self.scenario;
        let control_steps = s.control_steps();
        let mut records = Vec::with_capacity((s.duration_max / s.sim_dt) as usize + 1);
        let termination = loop {
            let step = self.clock.step_index;
            let t = self.clock.t;
            let (gps_tick, beacon) = self.sample_sensors(step);
            let control_tick = step.is_multiple_of(control_steps);
            let mut landed = false;
            if control_tick {
                // UAV first: the USV holds station from the tick its beacon phase begins.
                landed = self.uav_control(t);
                self.usv_control(t);
            }
            records.push(self.record(step, control_tick, gps_tick, beacon));

            if landed {
                break Termination::Touchdown;
            }
            if !s.landing.enabled {
                if let Some(tc) = self.mission_complete_time {
                    if t - tc >= POST_MISSION_HOLD - 1e-9 {
                        break Termination::MissionComplete;
                    }
                }
            }
            if t >= s.duration_max {
                break if self.mission_complete_time.is_some() && !s.landing.enabled {
                    Termination::MissionComplete
                } else {
                    Termination::Timeout
                };
            }

            let inputs = StepInputs {
                thrust_left: self.motor.thrust_left,
                thrust_right: self.motor.thrust_right,
                uav_velocity_cmd: self.uav_cmd,
                wind: self.wind,
                uav_frozen: self.phase.is_none(),
            };
            self.vehicles = integrate_step(
                &self.vehicles,
                &inputs,
                &s.usv.params,
                &s.uav.params,
                s.sim_dt,
                step,
            )?;
            self.wind = wind_step(&self.wind, &s.wind, s.sim_dt, &mut self.streams.wind_gust);
            self.clock = advance_clock(self.clock, s)?;
        };

        let landing = (termination == Termination::Touchdown).then(|| {
            classify_landing(
                &self.vehicles.uav,
                &self.vehicles.usv,
                self.clock.t,
                self.timeline.clone(),
                &s.landing,
            )
        });
        Ok(TrialLog {
            trial_index,
            seed: s.seed,
            records,
            termination,
            landing,
            mission_complete_time: self.mission_complete_time,
        })
    }
}

/// Runs one seeded end-to-end trial: a landing when `landing.enabled`,
/// otherwise USV path following only.
pub fn run_trial(scenario: &Scenario, trial_index: u64) -> Result<TrialLog, SimError> {
    Engine::new(scenario, trial_index)?.run(trial_index)
}

/// Convergence figures for a path-following run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub mission_complete: bool,
    pub mission_complete_time: Option<f64>,
    pub initial_cross_track: f64,
    /// First time after which |cross_track| stays below the band until acceptance.
    pub converged_time: Option<f64>,
    pub max_abs_cross_track: f64,
    /// Largest |cross_track| from `converged_time` until acceptance.
    pub max_abs_cross_track_after_convergence: Option<f64>,
    pub final_cross_track: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRun {
    pub log: TrialLog,
    pub cross_track: Vec<(f64, f64)>,
    pub report: PathReport,
}

fn path_report(log: &TrialLog, series: &[(f64, f64)]) -> PathReport {
    let until = log.mission_complete_time.unwrap_or(f64::INFINITY);
    let before: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t <= until)
        .collect();
    let converged_idx = match before
        .iter()
        .rposition(|(_, c)| c.abs() >= CROSS_TRACK_BAND)
    {
        Some(i) if i + 1 < before.len() => Some(i + 1),
        Some(_) => None,
        None => (!before.is_empty()).then_some(0),
    };
    PathReport {
        mission_complete: log.mission_complete_time.is_some(),
        mission_complete_time: log.mission_complete_time,
        initial_cross_track: series.first().map_or(0.0, |&(_, c)| c),
        converged_time: converged_idx.map(|i| before[i].0),
        max_abs_cross_track: before.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max),
        max_abs_cross_track_after_convergence: converged_idx
            .map(|i| before[i..].iter().map(|(_, c)| c.abs()).fold(0.0, f64::max)),
        final_cross_track: before.last().map_or(0.0, |&(_, c)| c),
    }
}

/// USV-only run over the scenario's waypoints with landing disabled.
pub fn path_following_run(scenario: &Scenario) -> Result<PathRun, SimError> {
    let mut s = scenario.clone();
    s.landing.enabled = false;
    let log = run_trial(&s, 0)?;
    let cross_track = log.cross_track_series();
    let report = path_report(&log, &cross_track);
    Ok(PathRun {
        log,
        cross_track,
        report,
    })
}
