//! Demand series ingestion.
//!
//! Input is a two-column CSV with a one-line header: a time column (ISO-8601
//! timestamp, or a sample index) and the average power in watts. Rows must be
//! strictly increasing in time. Finer-grained data (for example 1 s REDD exports)
//! can be averaged into fixed-width bins.

use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use meterlink_core::DemandSeries;
use thiserror::Error;

pub const DEFAULT_TAU_HOURS: f64 = 0.25;
const SPACING_RTOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: {message}")]
    Gap {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: {message}")]
    Validation {
        path: String,
        line: u64,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeColumn {
    /// ISO-8601 if the first row parses as one, otherwise a sample index.
    #[default]
    Auto,
    Index,
    Iso,
    /// Seconds since the Unix epoch (the REDD export convention).
    Unix,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub time: TimeColumn,
    /// Sampling interval in hours for index-based files; defaults to 0.25.
    pub tau_hours: Option<f64>,
    /// Average rows into bins of this many hours.
    pub resample_hours: Option<f64>,
    /// Defaults to the file stem.
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct Row {
    line: u64,
    time: f64,
    watts: f64,
}

fn parse_iso(s: &str) -> Option<f64> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp_micros() as f64 * 1e-6);
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
        .map(|t| t.and_utc().timestamp_micros() as f64 * 1e-6)
}

/// Parses CSV text; `path` only labels error messages.
pub fn parse_series(text: &str, path: &str, opts: &LoadOptions) -> Result<DemandSeries, LoadError> {
    let parse_err = |line: u64, message: String| LoadError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut mode = opts.time;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 columns (time, watts), found {}", record.len()),
            ));
        }
        let (time_field, watts_field) = (&record[0], &record[1]);
        if mode == TimeColumn::Auto {
            mode = if parse_iso(time_field).is_some() {
                TimeColumn::Iso
            } else {
                TimeColumn::Index
            };
        }
        let time = match mode {
            TimeColumn::Iso => parse_iso(time_field),
            _ => time_field.parse::<f64>().ok().filter(|t| t.is_finite()),
        }
        .ok_or_else(|| parse_err(line, format!("cannot parse time value {time_field:?}")))?;
        let watts: f64 = watts_field
            .parse()
            .ok()
            .filter(|w: &f64| w.is_finite())
            .ok_or_else(|| parse_err(line, format!("cannot parse power value {watts_field:?}")))?;
        if watts < 0.0 {
            return Err(LoadError::Validation {
                path: path.to_string(),
                line,
                message: format!("negative power {watts} W"),
            });
        }
        if let Some(prev) = rows.last().map(|r: &Row| r.time) {
            if time <= prev {
                return Err(LoadError::Validation {
                    path: path.to_string(),
                    line,
                    message: format!("time {time_field} is not after the previous row"),
                });
            }
        }
        rows.push(Row { line, time, watts });
    }

    let label = opts.label.clone().unwrap_or_else(|| {
        Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let timed = matches!(mode, TimeColumn::Iso | TimeColumn::Unix);

    let (samples, tau) = match opts.resample_hours {
        Some(width) => {
            if !timed {
                return Err(LoadError::Validation {
                    path: path.to_string(),
                    line: rows.first().map_or(1, |r| r.line),
                    message: "resampling needs a timestamp column (iso or unix)".into(),
                });
            }
            (resample(&rows, width, path)?, width)
        }
        None => {
            check_spacing(&rows, timed, path)?;
            let tau = if timed && rows.len() >= 2 {
                (rows[1].time - rows[0].time) / 3600.0
            } else {
                opts.tau_hours.unwrap_or(DEFAULT_TAU_HOURS)
            };
            (rows.iter().map(|r| r.watts).collect(), tau)
        }
    };

    DemandSeries::new(samples, tau, label).map_err(|e| LoadError::Validation {
        path: path.to_string(),
        line: rows.last().map_or(1, |r| r.line),
        message: e.to_string(),
    })
}

fn check_spacing(rows: &[Row], timed: bool, path: &str) -> Result<(), LoadError> {
    if rows.len() < 2 {
        return Ok(());
    }
    let step = rows[1].time - rows[0].time;
    for w in rows.windows(2) {
        let gap = w[1].time - w[0].time;
        let irregular = if timed {
            (gap - step).abs() > SPACING_RTOL * step.abs().max(1.0)
        } else {
            gap != 1.0
        };
        if irregular {
            return Err(LoadError::Gap {
                path: path.to_string(),
                line: w[1].line,
                message: if timed {
                    format!("row spacing changes from {step} s to {gap} s; resample to a fixed interval")
                } else {
                    format!("sample index jumps by {gap}")
                },
            });
        }
    }
    Ok(())
}

/// Means of `rows` over bins of `width_hours`, starting at the first row.
fn resample(rows: &[Row], width_hours: f64, path: &str) -> Result<Vec<f64>, LoadError> {
    if !(width_hours > 0.0 && width_hours.is_finite()) {
        return Err(LoadError::Validation {
            path: path.to_string(),
            line: 1,
            message: format!("resampling interval {width_hours} h must be > 0"),
        });
    }
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let width = width_hours * 3600.0;
    let mut sums: Vec<(f64, u32)> = Vec::new();
    for row in rows {
        let bin = ((row.time - first.time) / width).floor() as usize;
        if bin >= sums.len() {
            if bin > sums.len() {
                return Err(LoadError::Gap {
                    path: path.to_string(),
                    line: row.line,
                    message: format!("bin {} has no rows", sums.len()),
                });
            }
            sums.push((0.0, 0));
        }
        sums[bin].0 += row.watts;
        sums[bin].1 += 1;
    }
    Ok(sums.into_iter().map(|(s, n)| s / n as f64).collect())
}

pub fn load_series(path: &Path, opts: &LoadOptions) -> Result<DemandSeries, LoadError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: name.clone(),
        source,
    })?;
    parse_series(&text, &name, opts)
}
