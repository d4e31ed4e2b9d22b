//! Fixed-resolution time series with explicit missing markers.
//!
//! A [`TimeSeries`] is a dense grid: row `i` holds the observation at
//! `start + i * step`, so gaps are always explicit `None` entries rather
//! than absent rows. All timestamps are UTC.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Timelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sampling step of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Hourly,
    Daily,
}

impl Resolution {
    pub fn step(self) -> Duration {
        match self {
            Resolution::Hourly => Duration::hours(1),
            Resolution::Daily => Duration::days(1),
        }
    }

    fn aligned(self, t: DateTime<Utc>) -> bool {
        let on_hour = t.minute() == 0 && t.second() == 0 && t.nanosecond() == 0;
        match self {
            Resolution::Hourly => on_hour,
            Resolution::Daily => on_hour && t.hour() == 0,
        }
    }
}

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Resolution::Hourly => write!(f, "hourly"),
            Resolution::Daily => write!(f, "daily"),
        }
    }
}

/// How a variable collapses from hourly to daily.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateRule {
    Mean,
    Sum,
}

#[derive(Debug, Error)]
pub enum TimeSeriesError {
    #[error("series must contain at least one row")]
    Empty,
    #[error("start timestamp {start} is not aligned to {resolution} resolution")]
    MisalignedStart {
        start: DateTime<Utc>,
        resolution: Resolution,
    },
    #[error("duplicate variable name `{name}`")]
    DuplicateVariable { name: String },
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("expected {expected} unit entries, got {got}")]
    UnitCount { expected: usize, got: usize },
    #[error("non-finite value at row {row}, variable `{variable}`")]
    NonFinite { row: usize, variable: String },
    #[error("series resolution is {got}, expected {expected}")]
    WrongResolution {
        expected: Resolution,
        got: Resolution,
    },
    #[error("no aggregation rule for variable `{variable}`")]
    MissingRule { variable: String },
    #[error("aggregation rule references unknown variable `{variable}`")]
    UnknownRuleVariable { variable: String },
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Timestamped observations at a fixed resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start: DateTime<Utc>,
    resolution: Resolution,
    names: Vec<String>,
    units: Vec<String>,
    width: usize,
    data: Vec<Option<f64>>, // row-major, rows * width entries
}

impl TimeSeries {
    /// Build a series from per-row values. Every non-missing entry must be
    /// finite; the start must sit on a resolution boundary.
    pub fn new(
        start: DateTime<Utc>,
        resolution: Resolution,
        names: Vec<String>,
        units: Vec<String>,
        rows: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, TimeSeriesError> {
        if rows.is_empty() {
            return Err(TimeSeriesError::Empty);
        }
        if !resolution.aligned(start) {
            return Err(TimeSeriesError::MisalignedStart { start, resolution });
        }
        let width = names.len();
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(TimeSeriesError::DuplicateVariable { name: name.clone() });
            }
        }
        if units.len() != width {
            return Err(TimeSeriesError::UnitCount {
                expected: width,
                got: units.len(),
            });
        }
        let mut data = Vec::with_capacity(rows.len() * width);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(TimeSeriesError::RaggedRow {
                    row: r,
                    got: row.len(),
                    expected: width,
                });
            }
            for (c, v) in row.iter().enumerate() {
                if let Some(x) = v {
                    if !x.is_finite() {
                        return Err(TimeSeriesError::NonFinite {
                            row: r,
                            variable: names[c].clone(),
                        });
                    }
                }
                data.push(*v);
            }
        }
        Ok(Self {
            start,
            resolution,
            names,
            units,
            width,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    /// Replace the unit strings (CSV persistence does not carry units).
    pub fn with_units(mut self, units: Vec<String>) -> Result<Self, TimeSeriesError> {
        if units.len() != self.width {
            return Err(TimeSeriesError::UnitCount {
                expected: self.width,
                got: units.len(),
            });
        }
        self.units = units;
        Ok(self)
    }

    pub fn timestamp(&self, row: usize) -> DateTime<Utc> {
        self.start + self.resolution.step() * row as i32
    }

    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        self.data[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_row_complete(&self, row: usize) -> bool {
        self.row(row).iter().all(|v| v.is_some())
    }

    /// Row as plain floats, or `None` if any entry is missing.
    pub fn complete_row(&self, row: usize) -> Option<Vec<f64>> {
        self.row(row).iter().copied().collect()
    }

    pub fn missing_count(&self) -> usize {
        self.data.iter().filter(|v| v.is_none()).count()
    }

    /// Index of the row observed at `t`, if `t` lies on the grid.
    pub fn row_at(&self, t: DateTime<Utc>) -> Option<usize> {
        let delta = t - self.start;
        let step = match self.resolution {
            Resolution::Hourly => delta.num_hours(),
            Resolution::Daily => delta.num_days(),
        };
        if step < 0 || self.start + self.resolution.step() * step as i32 != t {
            return None;
        }
        let idx = step as usize;
        (idx < self.rows()).then_some(idx)
    }

    /// Index of the daily row for `date` (daily series only).
    pub fn row_for_date(&self, date: NaiveDate) -> Option<usize> {
        match self.resolution {
            Resolution::Daily => self.row_at(Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0)?)),
            Resolution::Hourly => None,
        }
    }

    /// Calendar date of row `row` (UTC).
    pub fn date_of_row(&self, row: usize) -> NaiveDate {
        self.timestamp(row).date_naive()
    }

    /// Map each series variable through `f`, preserving missing markers.
    pub(crate) fn map_values(
        &self,
        mut f: impl FnMut(usize, f64) -> f64,
    ) -> Result<Self, TimeSeriesError> {
        let width = self.width;
        let rows = (0..self.rows())
            .map(|r| {
                self.row(r)
                    .iter()
                    .enumerate()
                    .map(|(c, v)| v.map(|x| f(c, x)))
                    .collect()
            })
            .collect();
        let _ = width;
        TimeSeries::new(
            self.start,
            self.resolution,
            self.names.clone(),
            self.units.clone(),
            rows,
        )
    }

    /// Collapse an hourly series to daily rows. A UTC day yields an
    /// aggregated row only when all of its 24 hours are inside the span and
    /// fully observed; every other day becomes an all-missing row.
    pub fn aggregate_hourly_to_daily(
        &self,
        rules: &HashMap<String, AggregateRule>,
    ) -> Result<TimeSeries, TimeSeriesError> {
        if self.resolution != Resolution::Hourly {
            return Err(TimeSeriesError::WrongResolution {
                expected: Resolution::Hourly,
                got: self.resolution,
            });
        }
        for name in rules.keys() {
            if !self.names.contains(name) {
                return Err(TimeSeriesError::UnknownRuleVariable {
                    variable: name.clone(),
                });
            }
        }
        let rule_per_col: Vec<AggregateRule> = self
            .names
            .iter()
            .map(|name| {
                rules
                    .get(name)
                    .copied()
                    .ok_or_else(|| TimeSeriesError::MissingRule {
                        variable: name.clone(),
                    })
            })
            .collect::<Result<_, _>>()?;

        let first_day = self.start.date_naive();
        let last_day = self.timestamp(self.rows() - 1).date_naive();
        let n_days = (last_day - first_day).num_days() as usize + 1;

        let mut rows = Vec::with_capacity(n_days);
        for d in 0..n_days {
            let day = first_day + Duration::days(d as i64);
            let midnight = Utc.from_utc_datetime(&day.and_hms_opt(0, 0, 0).unwrap());
            let complete = self
                .row_at(midnight)
                .filter(|&r0| r0 + 24 <= self.rows())
                .filter(|&r0| (r0..r0 + 24).all(|r| self.is_row_complete(r)));
            let row: Vec<Option<f64>> = match complete {
                Some(r0) => (0..self.width)
                    .map(|c| {
                        let sum: f64 = (r0..r0 + 24).map(|r| self.value(r, c).unwrap()).sum();
                        Some(match rule_per_col[c] {
                            AggregateRule::Sum => sum,
                            AggregateRule::Mean => sum / 24.0,
                        })
                    })
                    .collect(),
                None => vec![None; self.width],
            };
            rows.push(row);
        }

        TimeSeries::new(
            Utc.from_utc_datetime(&first_day.and_hms_opt(0, 0, 0).unwrap()),
            Resolution::Daily,
            self.names.clone(),
            self.units.clone(),
            rows,
        )
    }

    /// Write the canonical CSV form: `timestamp_utc,<var1>,...`, ISO-8601
    /// timestamps, empty cell for a missing value. Values use the shortest
    /// representation that parses back to the identical float.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), TimeSeriesError> {
        write!(w, "timestamp_utc")?;
        for name in &self.names {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for r in 0..self.rows() {
            write!(w, "{}", self.timestamp(r).format("%Y-%m-%dT%H:%M:%SZ"))?;
            for c in 0..self.width {
                match self.value(r, c) {
                    Some(v) => write!(w, ",{v}")?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<(), TimeSeriesError> {
        let mut f = std::fs::File::create(path)?;
        self.write_csv(&mut f)?;
        Ok(f.flush()?)
    }

    /// Parse the canonical CSV form. Units are not stored in the file and
    /// come back empty; callers that know them use [`TimeSeries::with_units`].
    pub fn read_csv<R: BufRead>(r: R, resolution: Resolution) -> Result<Self, TimeSeriesError> {
        let csv_err = |line: usize, message: String| TimeSeriesError::Csv { line, message };
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| csv_err(1, "missing header row".into()))?;
        let header = header?;
        let mut cols = header.split(',');
        match cols.next() {
            Some("timestamp_utc") => {}
            other => {
                return Err(csv_err(
                    1,
                    format!("first column must be `timestamp_utc`, got {other:?}"),
                ))
            }
        }
        let names: Vec<String> = cols.map(str::to_string).collect();
        if names.is_empty() {
            return Err(csv_err(1, "header declares no variables".into()));
        }

        let mut start: Option<DateTime<Utc>> = None;
        let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let ts_text = fields.next().unwrap();
            let ts = DateTime::parse_from_rfc3339(ts_text)
                .map_err(|e| csv_err(line_no, format!("bad timestamp `{ts_text}`: {e}")))?
                .with_timezone(&Utc);
            let expected = match start {
                None => {
                    start = Some(ts);
                    ts
                }
                Some(s) => s + resolution.step() * rows.len() as i32,
            };
            if ts != expected {
                return Err(csv_err(
                    line_no,
                    format!("timestamp {ts} breaks the {resolution} grid (expected {expected})"),
                ));
            }
            let mut row = Vec::with_capacity(names.len());
            for field in fields {
                if field.is_empty() {
                    row.push(None);
                } else {
                    let v: f64 = field
                        .parse()
                        .map_err(|e| csv_err(line_no, format!("bad value `{field}`: {e}")))?;
                    row.push(Some(v));
                }
            }
            if row.len() != names.len() {
                return Err(csv_err(
                    line_no,
                    format!("expected {} values, got {}", names.len(), row.len()),
                ));
            }
            rows.push(row);
        }
        let start = start.ok_or(TimeSeriesError::Empty)?;
        let units = vec![String::new(); names.len()];
        TimeSeries::new(start, resolution, names, units, rows)
    }

    pub fn read_csv_path(path: &Path, resolution: Resolution) -> Result<Self, TimeSeriesError> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(BufReader::new(f), resolution)
    }
}

/// Midnight UTC for a calendar date.
pub fn utc_midnight(date: NaiveDate) -> DateTime<Utc> {
    Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0).unwrap())
}
