//! Trajectory CSV, outcome JSON, batch summary and scatter files.
//!
//! Every float is written with 9 significant digits so outputs are
//! byte-stable for a given scenario and seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use super::{BatchSummary, PathRun, StepRecord, TrialLog};

pub const TRAJECTORY_COLUMNS: [&str; 13] = [
    "t",
    "usv_x",
    "usv_y",
    "usv_yaw",
    "usv_u",
    "usv_r",
    "uav_px",
    "uav_py",
    "uav_pz",
    "phase",
    "T_l",
    "T_r",
    "cross_track",
];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Formats like C's `%.9g`.
pub fn fmt_sig9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, v);
        trim_fraction(&fixed).to_string()
    } else {
        format!(
            "{}e{}{:02}",
            trim_fraction(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn round_sig9(v: f64) -> f64 {
    fmt_sig9(v).parse().unwrap_or(v)
}

/// Rounds every non-integer number in a JSON tree to 9 significant digits.
fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = n.as_f64().expect("f64");
            json!(round_sig9(v))
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), OutputError> {
    let value = round_json(serde_json::to_value(value).expect("outputs serialise"));
    let mut text = serde_json::to_string_pretty(&value).expect("json value serialises");
    text.push('\n');
    fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, OutputError> {
    csv::Writer::from_path(path).map_err(|source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn trajectory_row(r: &StepRecord) -> [String; 13] {
    [
        fmt_sig9(r.t),
        fmt_sig9(r.usv.x),
        fmt_sig9(r.usv.y),
        fmt_sig9(r.usv.yaw),
        fmt_sig9(r.usv.surge_u),
        fmt_sig9(r.usv.yaw_rate_r),
        fmt_sig9(r.uav.px),
        fmt_sig9(r.uav.py),
        fmt_sig9(r.uav.pz),
        r.phase.map(|p| p.as_str().to_string()).unwrap_or_default(),
        fmt_sig9(r.motor.thrust_left),
        fmt_sig9(r.motor.thrust_right),
        r.cross_track.map(fmt_sig9).unwrap_or_default(),
    ]
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), OutputError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let csv_err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn trial_json(log: &TrialLog) -> Value {
    json!({
        "trial_index": log.trial_index,
        "seed": log.seed,
        "termination": log.termination,
        "steps": log.records.len(),
        "mission_complete_time": log.mission_complete_time,
        "outcome": log.landing,
    })
}

fn write_trial(log: &TrialLog, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), OutputError> {
    let csv_path = dir.join(format!("trial_{:03}.csv", log.trial_index));
    write_rows(
        &csv_path,
        &TRAJECTORY_COLUMNS,
        log.records.iter().map(trajectory_row),
    )?;
    files.push(csv_path);
    let json_path = dir.join(format!("trial_{:03}.json", log.trial_index));
    write_json(&json_path, &trial_json(log))?;
    files.push(json_path);
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub files: Vec<PathBuf>,
}

/// Writes `trial_NNN.csv`/`trial_NNN.json` per trial plus `summary.json`
/// and `scatter.csv` (touchdown deltas, one row per landed trial).
pub fn write_outputs(
    logs: &[TrialLog],
    summary: &BatchSummary,
    out_dir: &Path,
) -> Result<OutputFiles, OutputError> {
    ensure_dir(out_dir)?;
    let mut files = Vec::new();
    for log in logs {
        write_trial(log, out_dir, &mut files)?;
    }
    let summary_path = out_dir.join("summary.json");
    write_json(&summary_path, summary)?;
    files.push(summary_path);

    let scatter_path = out_dir.join("scatter.csv");
    let rows = summary.trials.iter().filter_map(|t| {
        Some([
            t.trial_index.to_string(),
            fmt_sig9(t.delta_x?),
            fmt_sig9(t.delta_y?),
        ])
    });
    write_rows(&scatter_path, &["trial", "delta_x", "delta_y"], rows)?;
    files.push(scatter_path);
    Ok(OutputFiles { files })
}

/// Writes the trajectory and outcome of a path run plus `cross_track.csv`
/// and `path_report.json`.
pub fn write_path_outputs(run: &PathRun, out_dir: &Path) -> Result<OutputFiles, OutputError> {
    ensure_dir(out_dir)?;
    let mut files = Vec::new();
    write_trial(&run.log, out_dir, &mut files)?;

    let ct_path = out_dir.join("cross_track.csv");
    write_rows(
        &ct_path,
        &["t", "cross_track"],
        run.cross_track
            .iter()
            .map(|&(t, c)| [fmt_sig9(t), fmt_sig9(c)]),
    )?;
    files.push(ct_path);

    let report_path = out_dir.join("path_report.json");
    write_json(&report_path, &run.report)?;
    files.push(report_path);
    Ok(OutputFiles { files })
}
