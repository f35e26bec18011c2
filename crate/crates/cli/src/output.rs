//! Result files. Every file is written to a temporary sibling and renamed
//! into place, so a failed command never leaves a partial file behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use qtwt_core::phase::SampledRun;
use qtwt_core::pipeline::{DistributionRow, PipelineRun, SweepRow};
use qtwt_core::sched::{Encoding, Schedule};
use qtwt_core::Rational;
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::error::CliError;
use crate::instance::{display_rational, format_decimal};

pub const DISTRIBUTION_FILE: &str = "distribution.csv";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub const DISTRIBUTION_HEADER: [&str; 8] = [
    "basis",
    "slots",
    "feasible",
    "cost",
    "amp_re",
    "amp_im",
    "p_joint",
    "p_conditional",
];

pub const SWEEP_HEADER: [&str; 9] = [
    "value",
    "rounds",
    "p0",
    "p_optimum_conditional",
    "p_optimum_joint",
    "optimum_rank",
    "feasible_mass",
    "argmax",
    "argmax_optimal",
];

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// 17 significant digits, enough to recover the exact double.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number when the value has a finite decimal form, `"p/q"` otherwise.
pub fn rational_json(r: &Rational) -> Value {
    format_decimal(r)
        .ok()
        .and_then(|s| s.parse::<serde_json::Number>().ok())
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(r.to_string()))
}

pub fn schedule_json(s: &Schedule) -> Value {
    json!(s.one_based())
}

fn slots_text(slots: &[usize]) -> String {
    let one_based: Vec<String> = slots.iter().map(|s| (s + 1).to_string()).collect();
    format!("[{}]", one_based.join(", "))
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io {
        path: "<csv>".into(),
        source: e.into(),
    };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Io {
        path: "<csv>".into(),
        source: e.into_error(),
    })
}

pub fn distribution_csv(rows: &[DistributionRow]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &DISTRIBUTION_HEADER,
        rows.iter().map(|r| {
            [
                r.basis.to_string(),
                slots_text(&r.slots),
                r.feasible.to_string(),
                display_rational(&r.cost),
                float(r.amplitude.re),
                float(r.amplitude.im),
                float(r.p_joint),
                float(r.p_conditional),
            ]
        }),
    )
}

pub fn samples_csv(run: &SampledRun, encoding: &Encoding) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &["basis", "slots", "feasible", "count"],
        run.counts.iter().map(|(&basis, &count)| {
            [
                basis.to_string(),
                slots_text(&encoding.decode(basis)),
                encoding.is_feasible(basis).to_string(),
                count.to_string(),
            ]
        }),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            [
                float(r.value),
                r.rounds.to_string(),
                float(r.p0),
                float(r.p_optimum_conditional),
                float(r.p_optimum_joint),
                r.optimum_rank.to_string(),
                float(r.feasible_mass),
                r.argmax.to_string(),
                r.argmax_optimal.to_string(),
            ]
        }),
    )
}

/// Run figures for the summary record; `rows` is the tabulated distribution.
pub fn run_json(run: &PipelineRun, rows: &[DistributionRow]) -> Value {
    let r = &run.report;
    let normalization = r.normalization.map(|n| match n {
        qtwt_core::sched::Normalization::MinMax { min, max } => json!({
            "kind": "minmax",
            "min": rational_json(&min),
            "max": rational_json(&max),
        }),
        qtwt_core::sched::Normalization::Sigmoid { alpha, beta } => json!({
            "kind": "sigmoid",
            "alpha": alpha,
            "beta": beta,
        }),
    });
    let optimum = r.oracle.as_ref().map(|o| {
        json!({
            "cost": rational_json(&o.optimum.cost),
            "schedules": o.optimum.schedules.iter().map(schedule_json).collect::<Vec<_>>(),
            "basis": o.optimal_basis,
        })
    });
    let samples = run.samples.as_ref().map(|s| {
        json!({
            "shots": s.counts.values().sum::<u64>(),
            "attempts": s.attempts,
            "restarts": s.restarts,
            "most_frequent": s.most_frequent(),
        })
    });
    let p_joint: f64 = rows.iter().map(|row| row.p_joint).sum();
    let p_conditional: f64 = rows.iter().map(|row| row.p_conditional).sum();
    json!({
        "qubits": r.qubits,
        "rounds": r.rounds,
        "normalization": normalization,
        "p0": r.p0,
        "feasible_mass": r.feasible_mass,
        "argmax": {
            "basis": r.argmax,
            "schedule": r.argmax_schedule.as_ref().map(schedule_json),
            "cost": rational_json(&r.argmax_cost),
            "p_conditional": r.p_argmax_conditional,
            "p_joint": r.p_argmax_joint,
        },
        "optimum": optimum,
        "oracle_agreement": r.oracle_optimal(),
        "retries": r.retries,
        "samples": samples,
        "totals": {
            "p_joint": p_joint,
            "p_conditional": p_conditional,
        },
        "warnings": r.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    })
}

pub fn json_bytes(value: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("JSON values always serialize");
    bytes.push(b'\n');
    bytes
}
