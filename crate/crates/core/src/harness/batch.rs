use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_trial, Termination, TrialLog};
use crate::scenario::Scenario;
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial_index: u64,
    pub termination: Termination,
    pub delta_x: Option<f64>,
    pub delta_y: Option<f64>,
    pub on_platform: bool,
    pub meets_paper_bound: bool,
    pub touchdown_time: Option<f64>,
}

/// Aggregate of a Monte Carlo batch. Means and standard deviations
/// (population, divide by n) are taken over trials that touched down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub n_trials: usize,
    pub seed: u64,
    pub n_touchdown: usize,
    pub n_timeout: usize,
    pub count_on_platform: usize,
    pub count_meets_paper_bound: usize,
    pub mean_delta_x: f64,
    pub mean_delta_y: f64,
    pub std_delta_x: f64,
    pub std_delta_y: f64,
    pub max_abs_delta_x: f64,
    pub max_abs_delta_y: f64,
    pub trials: Vec<TrialSummary>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl BatchSummary {
    pub fn from_logs(seed: u64, logs: &[TrialLog]) -> Self {
        let trials: Vec<TrialSummary> = logs
            .iter()
            .map(|log| {
                let out = log.landing.as_ref();
                TrialSummary {
                    trial_index: log.trial_index,
                    termination: log.termination,
                    delta_x: out.map(|o| o.delta_x),
                    delta_y: out.map(|o| o.delta_y),
                    on_platform: out.is_some_and(|o| o.on_platform),
                    meets_paper_bound: out.is_some_and(|o| o.meets_paper_bound),
                    touchdown_time: out.map(|o| o.touchdown_time),
                }
            })
            .collect();
        let dx: Vec<f64> = trials.iter().filter_map(|t| t.delta_x).collect();
        let dy: Vec<f64> = trials.iter().filter_map(|t| t.delta_y).collect();
        let (mean_delta_x, std_delta_x) = mean_std(&dx);
        let (mean_delta_y, std_delta_y) = mean_std(&dy);
        Self {
            n_trials: trials.len(),
            seed,
            n_touchdown: dx.len(),
            n_timeout: trials
                .iter()
                .filter(|t| t.termination == Termination::Timeout)
                .count(),
            count_on_platform: trials.iter().filter(|t| t.on_platform).count(),
            count_meets_paper_bound: trials.iter().filter(|t| t.meets_paper_bound).count(),
            mean_delta_x,
            mean_delta_y,
            std_delta_x,
            std_delta_y,
            max_abs_delta_x: dx.iter().map(|v| v.abs()).fold(0.0, f64::max),
            max_abs_delta_y: dy.iter().map(|v| v.abs()).fold(0.0, f64::max),
            trials,
        }
    }
}

/// Runs trials `0..n` and summarises them. Results are ordered by trial
/// index whatever the execution mode.
pub fn run_monte_carlo(
    scenario: &Scenario,
    n: usize,
    execution: Execution,
) -> Result<(BatchSummary, Vec<TrialLog>), SimError> {
    let logs: Vec<TrialLog> = match execution {
        Execution::Serial => (0..n as u64)
            .map(|i| run_trial(scenario, i))
            .collect::<Result<_, _>>()?,
        Execution::Parallel => (0..n as u64)
            .into_par_iter()
            .map(|i| run_trial(scenario, i))
            .collect::<Result<_, _>>()?,
    };
    Ok((BatchSummary::from_logs(scenario.seed, &logs), logs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial_summary_is_that_trial() {
        let s = Scenario {
            seed: 3,
            ..Default::default()
        };
        let (summary, logs) = run_monte_carlo(&s, 1, Execution::Serial).unwrap();
        let out = logs[0].landing.as_ref().unwrap();
        assert_eq!(summary.n_trials, 1);
        assert_eq!(summary.mean_delta_x, out.delta_x);
        assert_eq!(summary.mean_delta_y, out.delta_y);
        assert_eq!(summary.std_delta_x, 0.0);
        assert_eq!(summary.trials[0].delta_x, Some(out.delta_x));
    }

    #[test]
    fn serial_and_parallel_agree() {
        let s = Scenario {
            seed: 11,
            ..Default::default()
        };
        let (a, la) = run_monte_carlo(&s, 4, Execution::Serial).unwrap();
        let (b, lb) = run_monte_carlo(&s, 4, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert!(
            a.count_meets_paper_bound <= a.count_on_platform && a.count_on_platform <= a.n_trials
        );
    }

    #[test]
    fn statistics_helper() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
        assert_eq!(mean_std(&[]), (0.0, 0.0));
    }
}
