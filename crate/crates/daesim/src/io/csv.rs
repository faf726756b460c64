//! Trajectory, step-trace and metrics files.
//!
//! Floats are rendered as `{:.16e}` (17 significant digits), which
//! round-trips every finite `f64` exactly. Line terminator is LF.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Result, SolverError};
use crate::metrics::{RunMetrics, Trajectory};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SolverError + '_ {
    move |source| SolverError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn format_trajectory_csv(trajectory: &Trajectory) -> String {
    let mut out = String::new();
    out.push_str(&trajectory.labels.join(","));
    out.push('\n');
    for row in trajectory.rows() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory_csv(trajectory: &Trajectory, path: &Path) -> Result<()> {
    fs::write(path, format_trajectory_csv(trajectory)).map_err(io_err(path))
}

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SolverError::Config("empty trajectory file".into()))?;
    let labels: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.parse().map_err(|_| {
                    SolverError::Config(format!("bad float '{tok}' on data row {}", i + 1))
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != labels.len() {
            return Err(SolverError::Config(format!(
                "row {} has {} fields, header has {}",
                i + 1,
                row.len(),
                labels.len()
            )));
        }
        rows.push(row);
    }
    Ok(Trajectory::from_rows(labels, rows))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_trajectory_csv(&text)
}

/// Step-size trace: one row per attempt, `t,h,accepted` with accepted 0/1.
pub fn format_step_trace_csv(metrics: &RunMetrics) -> String {
    let mut out = String::from("t,h,accepted\n");
    for r in &metrics.step_records {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{}",
            r.t,
            r.h_attempted,
            u8::from(r.accepted)
        );
    }
    out
}

pub fn write_step_trace_csv(metrics: &RunMetrics, path: &Path) -> Result<()> {
    fs::write(path, format_step_trace_csv(metrics)).map_err(io_err(path))
}

/// Machine-readable metrics summary, `key=value` lines.
pub fn format_metrics(metrics: &RunMetrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "nonlinear_calls={}", metrics.nonlinear_calls);
    let _ = writeln!(out, "accepted_steps={}", metrics.accepted_steps);
    let _ = writeln!(out, "rejected_steps={}", metrics.rejected_steps);
    let _ = writeln!(out, "recorrections={}", metrics.recorrections);
    let _ = writeln!(out, "diverged={}", u8::from(metrics.diverged.is_some()));
    let _ = writeln!(
        out,
        "diverged_reason={}",
        metrics.diverged.map(|d| d.as_str()).unwrap_or("none")
    );
    out
}

pub fn write_metrics(metrics: &RunMetrics, path: &Path) -> Result<()> {
    fs::write(path, format_metrics(metrics)).map_err(io_err(path))
}
