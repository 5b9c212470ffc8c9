//! Post-hoc checks of the cross-module invariants over a finished log.

use std::fmt;

use super::{Termination, TrialLog};
use crate::landing::LandingPhase;
use crate::math::in_wrapped_range;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TimeNotIncreasing {
        step: u64,
    },
    ThrustLimit {
        step: u64,
        thrust: f64,
    },
    YawOutOfRange {
        step: u64,
        yaw: f64,
    },
    HeadingErrorOutOfRange {
        step: u64,
        error: f64,
    },
    IntegralBound {
        step: u64,
        term: f64,
    },
    InvalidTransition {
        step: u64,
        from: LandingPhase,
        to: LandingPhase,
    },
    DescentOutsidePrecisionPhase {
        step: u64,
        phase: Option<LandingPhase>,
    },
    TimelineMismatch,
    OutcomeMismatch,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TimeNotIncreasing { step } => {
                write!(f, "step {step}: time not strictly increasing")
            }
            Self::ThrustLimit { step, thrust } => {
                write!(f, "step {step}: motor thrust {thrust} N over limit")
            }
            Self::YawOutOfRange { step, yaw } => {
                write!(f, "step {step}: yaw {yaw} outside (-pi, pi]")
            }
            Self::HeadingErrorOutOfRange { step, error } => {
                write!(f, "step {step}: heading error {error} outside (-pi, pi]")
            }
            Self::IntegralBound { step, term } => {
                write!(f, "step {step}: integral term {term} N beyond limit")
            }
            Self::InvalidTransition { step, from, to } => {
                write!(f, "step {step}: illegal transition {from} -> {to}")
            }
            Self::DescentOutsidePrecisionPhase { step, phase } => {
                write!(f, "step {step}: descent commanded in phase {phase:?}")
            }
            Self::TimelineMismatch => f.write_str("phase timeline disagrees with step records"),
            Self::OutcomeMismatch => f.write_str("terminal outcome inconsistent with termination"),
        }
    }
}

/// Returns every invariant violation found in `log`; empty means clean.
pub fn audit_log(log: &TrialLog, scenario: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let max = scenario.usv.params.thrust_max;
    let integral_limit = scenario.gains.speed_integral_limit;
    let mut prev_t = f64::NEG_INFINITY;
    let mut prev_phase: Option<LandingPhase> = None;
    let mut walk = Vec::new();

    for r in &log.records {
        let step = r.step;
        if r.t <= prev_t {
            out.push(Violation::TimeNotIncreasing { step });
        }
        prev_t = r.t;
        for thrust in [r.motor.thrust_left, r.motor.thrust_right] {
            // Written so NaN also counts as a violation.
            if thrust.is_nan() || thrust.abs() > max {
                out.push(Violation::ThrustLimit { step, thrust });
            }
        }
        if !in_wrapped_range(r.usv.yaw) {
            out.push(Violation::YawOutOfRange {
                step,
                yaw: r.usv.yaw,
            });
        }
        if r.control_tick && !in_wrapped_range(r.heading_error) {
            out.push(Violation::HeadingErrorOutOfRange {
                step,
                error: r.heading_error,
            });
        }
        if scenario.gains.speed_ki > 0.0
            && (scenario.gains.speed_ki * r.speed_integral).abs() > integral_limit * (1.0 + 1e-12)
        {
            out.push(Violation::IntegralBound {
                step,
                term: scenario.gains.speed_ki * r.speed_integral,
            });
        }
        if r.uav_velocity_cmd.z < 0.0 && r.phase != Some(LandingPhase::PrecisionDescent) {
            out.push(Violation::DescentOutsidePrecisionPhase {
                step,
                phase: r.phase,
            });
        }
        if let Some(phase) = r.phase {
            match prev_phase {
                Some(prev) if prev != phase => {
                    if !prev.can_transition_to(phase) {
                        out.push(Violation::InvalidTransition {
                            step,
                            from: prev,
                            to: phase,
                        });
                    }
                    walk.push(phase);
                }
                None => walk.push(phase),
                _ => {}
            }
            prev_phase = Some(phase);
        }
    }

    if let Some(outcome) = &log.landing {
        let timeline: Vec<LandingPhase> = outcome.phase_timeline.iter().map(|c| c.phase).collect();
        if timeline != walk || timeline.last() != Some(&LandingPhase::Touchdown) {
            out.push(Violation::TimelineMismatch);
        }
    }
    let touched = prev_phase == Some(LandingPhase::Touchdown);
    let consistent = match log.termination {
        Termination::Touchdown => touched && log.landing.is_some(),
        Termination::MissionComplete => {
            !touched && log.landing.is_none() && log.mission_complete_time.is_some()
        }
        Termination::Timeout => !touched && log.landing.is_none(),
    };
    if !consistent {
        out.push(Violation::OutcomeMismatch);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_trial;

    #[test]
    fn clean_run_has_no_violations() {
        let s = Scenario {
            seed: 5,
            ..Default::default()
        };
        let log = run_trial(&s, 0).unwrap();
        assert_eq!(audit_log(&log, &s), vec![]);
    }

    #[test]
    fn tampered_logs_are_flagged() {
        let s = Scenario {
            seed: 5,
            ..Default::default()
        };
        let mut log = run_trial(&s, 0).unwrap();
        log.records[3].motor.thrust_left = 140.0;
        log.records[4].usv.yaw = -std::f64::consts::PI;
        log.records[6].t = log.records[5].t;
        log.records[7].uav_velocity_cmd.z = -0.4;
        log.records[8].phase = Some(LandingPhase::Touchdown);
        let v = audit_log(&log, &s);
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::ThrustLimit { step: 3, .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::YawOutOfRange { step: 4, .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::TimeNotIncreasing { step: 6 })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::DescentOutsidePrecisionPhase { step: 7, .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::InvalidTransition { step: 9, .. })));
        assert!(v.contains(&Violation::TimelineMismatch));
    }
}
