//! Two-phase landing: GPS approach to the USV, then IR-beacon-guided descent.
//!
//! Transition graph (self-loops allowed everywhere except out of TOUCHDOWN,
//! which is absorbing):
//!
//! ```text
//! CRUISE_GPS --(within switch_radius of USV fix)--> ACQUIRE
//! ACQUIRE    --(lock_frames consecutive detections)--> PRECISION_DESCENT
//! PRECISION_DESCENT --(loss_frames consecutive misses)--> REACQUIRE
//! REACQUIRE  --(lock_frames consecutive detections)--> PRECISION_DESCENT
//! any        --(altitude above deck <= touchdown_alt)--> TOUCHDOWN
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{UavState, UsvState};
use crate::math::{world_to_body, Vec2};
use crate::sensors::{GpsFix, IrBeaconMeasurement};

/// Landing accuracy envelope per axis, m (strict).
pub const ACCURACY_BOUND: f64 = 0.20;

/// Landing platform footprint, m.
pub const PLATFORM_LENGTH: f64 = 1.2;
pub const PLATFORM_WIDTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LandingPhase {
    CruiseGps,
    Acquire,
    PrecisionDescent,
    Reacquire,
    Touchdown,
}

impl LandingPhase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CruiseGps => "CRUISE_GPS",
            Self::Acquire => "ACQUIRE",
            Self::PrecisionDescent => "PRECISION_DESCENT",
            Self::Reacquire => "REACQUIRE",
            Self::Touchdown => "TOUCHDOWN",
        }
    }

    pub fn can_transition_to(self, next: LandingPhase) -> bool {
        use LandingPhase::*;
        if self == Touchdown {
            return next == Touchdown;
        }
        self == next
            || next == Touchdown
            || matches!(
                (self, next),
                (CruiseGps, Acquire)
                    | (Acquire, PrecisionDescent)
                    | (PrecisionDescent, Reacquire)
                    | (Reacquire, PrecisionDescent)
            )
    }
}

impl fmt::Display for LandingPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandingParams {
    /// Run the landing sequence; when false a trial is USV path following only.
    pub enabled: bool,
    pub switch_radius: f64,
    pub acquire_altitude: f64,
    pub lock_frames: u32,
    pub loss_frames: u32,
    pub touchdown_alt: f64,
    pub platform_half_x: f64,
    pub platform_half_y: f64,
    pub platform_deck_z: f64,
    /// Keep the USV on its route during the beacon phases instead of holding station.
    pub moving_deck: bool,
}

impl Default for LandingParams {
    fn default() -> Self {
        Self {
            enabled: true,
            switch_radius: 3.0,
            acquire_altitude: 6.0,
            lock_frames: 5,
            loss_frames: 10,
            touchdown_alt: 0.05,
            platform_half_x: PLATFORM_LENGTH / 2.0,
            platform_half_y: PLATFORM_WIDTH / 2.0,
            platform_deck_z: 0.5,
            moving_deck: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FsmCounters {
    pub detections: u32,
    pub misses: u32,
    /// Beacon world position estimated at the most recent detection.
    pub last_beacon: Option<Vec2>,
}

/// Result of one state-machine update: the new phase and what to fly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsmStep {
    pub phase: LandingPhase,
    pub counters: FsmCounters,
    pub descend: bool,
    /// Horizontal offset to close, fed to the UAV velocity law.
    pub target_offset: Vec2,
    /// Altitude held when not descending.
    pub target_alt: f64,
}

pub fn check_touchdown(
    uav: &UavState,
    platform_deck_z: f64,
    phase: LandingPhase,
    params: &LandingParams,
) -> bool {
    phase == LandingPhase::PrecisionDescent && uav.pz - platform_deck_z <= params.touchdown_alt
}

fn count_beacon(counters: &mut FsmCounters, uav: &UavState, beacon: Option<&IrBeaconMeasurement>) {
    let Some(m) = beacon else { return };
    match m.offset() {
        Some(offset) => {
            counters.detections += 1;
            counters.misses = 0;
            counters.last_beacon = Some(uav.horizontal() + offset);
        }
        None => {
            counters.detections = 0;
            counters.misses += 1;
        }
    }
}

/// Advances the landing state machine by one control tick.
///
/// `uav` is the UAV's navigation state (GPS horizontal position), `beacon` is
/// `None` when no beacon sample falls on this tick.
pub fn fsm_step(
    phase: LandingPhase,
    counters: FsmCounters,
    uav: &UavState,
    usv_gps: &GpsFix,
    beacon: Option<&IrBeaconMeasurement>,
    params: &LandingParams,
) -> FsmStep {
    use LandingPhase::*;

    let mut counters = counters;
    let to_fix = usv_gps.position() - uav.horizontal();
    let hold = |phase, counters, target_offset| FsmStep {
        phase,
        counters,
        descend: false,
        target_offset,
        target_alt: params.acquire_altitude,
    };

    if phase == Touchdown {
        return hold(Touchdown, counters, Vec2::zeros());
    }
    if check_touchdown(uav, params.platform_deck_z, phase, params)
        || uav.pz - params.platform_deck_z <= params.touchdown_alt
    {
        return FsmStep {
            phase: Touchdown,
            counters,
            descend: false,
            target_offset: Vec2::zeros(),
            target_alt: uav.pz,
        };
    }

    let next = match phase {
        CruiseGps => {
            if to_fix.norm() <= params.switch_radius {
                counters = FsmCounters::default();
                Acquire
            } else {
                CruiseGps
            }
        }
        Acquire | Reacquire => {
            count_beacon(&mut counters, uav, beacon);
            if counters.detections >= params.lock_frames {
                counters.misses = 0;
                PrecisionDescent
            } else {
                phase
            }
        }
        PrecisionDescent => {
            count_beacon(&mut counters, uav, beacon);
            if counters.misses >= params.loss_frames {
                counters.detections = 0;
                Reacquire
            } else {
                PrecisionDescent
            }
        }
        Touchdown => unreachable!("handled above"),
    };
    debug_assert!(phase.can_transition_to(next), "{phase} -> {next}");

    match next {
        CruiseGps | Acquire => hold(next, counters, to_fix),
        Reacquire => {
            let target = counters
                .last_beacon
                .map_or(to_fix, |b| b - uav.horizontal());
            hold(next, counters, target)
        }
        PrecisionDescent => {
            // Close on a fresh detection; otherwise keep descending without lateral correction.
            let target = beacon.and_then(|m| m.offset()).unwrap_or_else(Vec2::zeros);
            FsmStep {
                phase: next,
                counters,
                descend: true,
                target_offset: target,
                target_alt: params.acquire_altitude,
            }
        }
        Touchdown => unreachable!("handled above"),
    }
}

/// Final landing result of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub delta_x: f64,
    pub delta_y: f64,
    pub touchdown_time: f64,
    pub on_platform: bool,
    pub meets_paper_bound: bool,
    pub phase_timeline: Vec<PhaseChange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseChange {
    pub t: f64,
    pub phase: LandingPhase,
}

/// `(on_platform, meets_accuracy_bound)` for platform-frame deltas.
pub fn classify_deltas(delta_x: f64, delta_y: f64, params: &LandingParams) -> (bool, bool) {
    let on_platform =
        delta_x.abs() <= params.platform_half_x && delta_y.abs() <= params.platform_half_y;
    let meets = on_platform && delta_x.abs() < ACCURACY_BOUND && delta_y.abs() < ACCURACY_BOUND;
    (on_platform, meets)
}

/// Detector position minus beacon position, in the USV body (platform) frame.
pub fn platform_deltas(uav: &UavState, usv: &UsvState) -> Vec2 {
    world_to_body(uav.horizontal() - usv.position(), usv.yaw)
}

pub fn classify_landing(
    uav: &UavState,
    usv: &UsvState,
    touchdown_time: f64,
    phase_timeline: Vec<PhaseChange>,
    params: &LandingParams,
) -> TrialOutcome {
    let d = platform_deltas(uav, usv);
    let (on_platform, meets_paper_bound) = classify_deltas(d.x, d.y, params);
    TrialOutcome {
        delta_x: d.x,
        delta_y: d.y,
        touchdown_time,
        on_platform,
        meets_paper_bound,
        phase_timeline,
    }
}
