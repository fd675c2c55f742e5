//! Run reports (JSON) and trace files (CSV), plus the gnuplot-compatible
//! two-column data dump.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use emergence_core::EmergenceEvent;

use crate::config::ScenarioConfig;
use crate::error::CliError;

/// One row of the trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub frame: usize,
    pub bits: u64,
    pub active_count: usize,
    pub phase: String,
    pub event_flag: u8,
}

/// A run of frames sharing a lifecycle phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpan {
    pub start: usize,
    pub end: usize,
    pub phase: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub frames: usize,
    pub min_bits: u64,
    pub max_bits: u64,
    pub total_bits: u64,
    pub event_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdReport {
    pub profile: Vec<(usize, u64)>,
    pub shift_diameter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub single_dimension: f64,
    pub single_sse: f64,
    pub breakpoint_area: f64,
    pub dimension_low: f64,
    pub dimension_high: f64,
    pub split_sse: f64,
    pub sse_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub mean_nn_distance: f64,
    pub csr_nn_distance: f64,
    pub nn_ratio: f64,
    pub quadrat_vmr: f64,
    pub regular: bool,
    pub aggregated: bool,
}

/// The JSON report for one scenario run. Everything except `timestamp` is
/// a pure function of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub timestamp: u64,
    pub scenario: ScenarioConfig,
    pub summary: Summary,
    pub events: Vec<EmergenceEvent>,
    pub phases: Vec<PhaseSpan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kd: Option<KdReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternReport>,
}

pub fn summarize(rows: &[TraceRow], event_count: usize) -> Summary {
    Summary {
        frames: rows.len(),
        min_bits: rows.iter().map(|r| r.bits).min().unwrap_or(0),
        max_bits: rows.iter().map(|r| r.bits).max().unwrap_or(0),
        total_bits: rows.iter().map(|r| r.bits).sum(),
        event_count,
    }
}

/// Collapse a per-frame phase column into spans.
pub fn phase_spans(phases: &[String]) -> Vec<PhaseSpan> {
    let mut out: Vec<PhaseSpan> = Vec::new();
    for (i, p) in phases.iter().enumerate() {
        match out.last_mut() {
            Some(span) if span.phase == *p => span.end = i,
            _ => out.push(PhaseSpan { start: i, end: i, phase: p.clone() }),
        }
    }
    out
}

pub fn write_report(path: &Path, report: &RunReport) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(report).map_err(CliError::runtime)?;
    write_atomic(path, json.as_bytes())
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<(), CliError> {
    let mut out = String::from("frame,bits,active_count,phase,event_flag\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.frame, r.bits, r.active_count, r.phase, r.event_flag
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// Two columns (frame, bits), gnuplot-ready.
pub fn write_plot(path: &Path, rows: &[TraceRow]) -> Result<(), CliError> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!("{} {}\n", r.frame, r.bits));
    }
    write_atomic(path, out.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(CliError::runtime)?;
        }
    }
    let mut f = std::fs::File::create(path).map_err(CliError::runtime)?;
    f.write_all(bytes).map_err(CliError::runtime)?;
    Ok(())
}

pub fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
