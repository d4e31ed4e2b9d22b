//! Construction of the 6+1-day training/prediction windows.
//!
//! A window covers seven consecutive UTC days: six context days of
//! (daily weather ++ daily flow) and a target day carrying its daily
//! weather, its 24 hourly weather rows and its daily-average flow. Hourly
//! flow for the target day is attached only when available and complete;
//! it is evaluation ground truth, never a training input.

use chrono::NaiveDate;
use thiserror::Error;

use crate::timeseries::{utc_midnight, Resolution, TimeSeries};

pub const HOURS_PER_DAY: usize = 24;

/// Relative tolerance for the hourly-truth vs daily-average consistency check.
pub const TRUTH_CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("`{name}` series has resolution {got}, expected {expected}")]
    WrongResolution {
        name: &'static str,
        expected: Resolution,
        got: Resolution,
    },
    #[error("daily weather and daily flow must cover the same date span")]
    SpanMismatch,
    #[error("flow series must have exactly one variable, got {got}")]
    FlowWidth { got: usize },
    #[error("daily and hourly weather variables differ: {daily:?} vs {hourly:?}")]
    WeatherSchemaMismatch {
        daily: Vec<String>,
        hourly: Vec<String>,
    },
    #[error("context must span at least one day")]
    EmptyContext,
    #[error("window {day_id}: context has {got} rows, expected {expected}")]
    ContextLength {
        day_id: NaiveDate,
        got: usize,
        expected: usize,
    },
    #[error("window {day_id}: hourly block has {got} rows, expected 24")]
    HourlyLength { day_id: NaiveDate, got: usize },
    #[error("window {day_id}: ragged feature row ({got} values, expected {expected})")]
    RaggedRow {
        day_id: NaiveDate,
        got: usize,
        expected: usize,
    },
    #[error("window {day_id}: non-finite value")]
    NonFinite { day_id: NaiveDate },
    #[error(
        "window {day_id}: hourly flow mean {hourly_mean} disagrees with daily flow {daily_flow}"
    )]
    TruthInconsistent {
        day_id: NaiveDate,
        hourly_mean: f64,
        daily_flow: f64,
    },
}

/// One training/prediction unit.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWindow {
    pub day_id: NaiveDate,
    /// Oldest to newest; each row is daily weather features ++ daily flow.
    pub context: Vec<Vec<f64>>,
    pub target_daily_weather: Vec<f64>,
    pub target_hourly_weather: Vec<Vec<f64>>,
    pub target_daily_flow: f64,
    /// Evaluation-only ground truth; never consumed by training.
    pub target_hourly_flow: Option<Vec<f64>>,
}

impl FeatureWindow {
    pub fn new(
        day_id: NaiveDate,
        context: Vec<Vec<f64>>,
        target_daily_weather: Vec<f64>,
        target_hourly_weather: Vec<Vec<f64>>,
        target_daily_flow: f64,
        target_hourly_flow: Option<Vec<f64>>,
        context_days: usize,
    ) -> Result<Self, WindowError> {
        if context.len() != context_days {
            return Err(WindowError::ContextLength {
                day_id,
                got: context.len(),
                expected: context_days,
            });
        }
        let n_weather = target_daily_weather.len();
        for row in &context {
            if row.len() != n_weather + 1 {
                return Err(WindowError::RaggedRow {
                    day_id,
                    got: row.len(),
                    expected: n_weather + 1,
                });
            }
        }
        if target_hourly_weather.len() != HOURS_PER_DAY {
            return Err(WindowError::HourlyLength {
                day_id,
                got: target_hourly_weather.len(),
            });
        }
        for row in &target_hourly_weather {
            if row.len() != n_weather {
                return Err(WindowError::RaggedRow {
                    day_id,
                    got: row.len(),
                    expected: n_weather,
                });
            }
        }
        if let Some(truth) = &target_hourly_flow {
            if truth.len() != HOURS_PER_DAY {
                return Err(WindowError::HourlyLength {
                    day_id,
                    got: truth.len(),
                });
            }
        }
        let all_finite = context
            .iter()
            .flatten()
            .chain(target_daily_weather.iter())
            .chain(target_hourly_weather.iter().flatten())
            .chain(std::iter::once(&target_daily_flow))
            .chain(target_hourly_flow.iter().flatten())
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(WindowError::NonFinite { day_id });
        }
        if let Some(truth) = &target_hourly_flow {
            let mean = truth.iter().sum::<f64>() / HOURS_PER_DAY as f64;
            let tol = TRUTH_CONSISTENCY_TOL * target_daily_flow.abs().max(1.0);
            if (mean - target_daily_flow).abs() > tol {
                return Err(WindowError::TruthInconsistent {
                    day_id,
                    hourly_mean: mean,
                    daily_flow: target_daily_flow,
                });
            }
        }
        Ok(Self {
            day_id,
            context,
            target_daily_weather,
            target_hourly_weather,
            target_daily_flow,
            target_hourly_flow,
        })
    }

    pub fn n_weather(&self) -> usize {
        self.target_daily_weather.len()
    }
}

/// Output of [`build_windows`]: the windows plus the feature schema they
/// were cut from and a count of candidate days that failed completeness.
#[derive(Debug, Clone)]
pub struct WindowSet {
    pub weather_names: Vec<String>,
    pub context_days: usize,
    pub windows: Vec<FeatureWindow>,
    /// Candidate target days dropped for incomplete data.
    pub skipped_days: usize,
    /// Days that were checked as window targets.
    pub candidate_days: usize,
}

impl WindowSet {
    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }
}

/// Cut one window per day whose six predecessors have complete daily rows
/// and whose own daily rows plus 24 hourly weather rows are complete.
/// Incomplete days are skipped and counted, never imputed.
pub fn build_windows(
    daily_weather: &TimeSeries,
    daily_flow: &TimeSeries,
    hourly_weather: &TimeSeries,
    hourly_flow: Option<&TimeSeries>,
    context_days: usize,
) -> Result<WindowSet, WindowError> {
    check_resolution("daily_weather", daily_weather, Resolution::Daily)?;
    check_resolution("daily_flow", daily_flow, Resolution::Daily)?;
    check_resolution("hourly_weather", hourly_weather, Resolution::Hourly)?;
    if let Some(hf) = hourly_flow {
        check_resolution("hourly_flow", hf, Resolution::Hourly)?;
        if hf.width() != 1 {
            return Err(WindowError::FlowWidth { got: hf.width() });
        }
    }
    if daily_flow.width() != 1 {
        return Err(WindowError::FlowWidth {
            got: daily_flow.width(),
        });
    }
    if daily_weather.start() != daily_flow.start() || daily_weather.rows() != daily_flow.rows() {
        return Err(WindowError::SpanMismatch);
    }
    if daily_weather.names() != hourly_weather.names() {
        return Err(WindowError::WeatherSchemaMismatch {
            daily: daily_weather.names().to_vec(),
            hourly: hourly_weather.names().to_vec(),
        });
    }
    if context_days == 0 {
        return Err(WindowError::EmptyContext);
    }

    let n_days = daily_weather.rows();
    let mut windows = Vec::new();
    let mut candidates = 0usize;
    for d in context_days..n_days {
        candidates += 1;
        let day_id = daily_weather.date_of_row(d);

        let context: Option<Vec<Vec<f64>>> = (d - context_days..d)
            .map(|r| {
                let mut row = daily_weather.complete_row(r)?;
                row.push(daily_flow.value(r, 0)?);
                Some(row)
            })
            .collect();
        let Some(context) = context else { continue };
        let Some(target_daily_weather) = daily_weather.complete_row(d) else {
            continue;
        };
        let Some(target_daily_flow) = daily_flow.value(d, 0) else {
            continue;
        };
        let Some(target_hourly_weather) = day_hours(hourly_weather, day_id) else {
            continue;
        };
        let target_hourly_flow = hourly_flow.and_then(|hf| {
            day_hours(hf, day_id).map(|rows| rows.into_iter().map(|r| r[0]).collect::<Vec<f64>>())
        });

        windows.push(FeatureWindow::new(
            day_id,
            context,
            target_daily_weather,
            target_hourly_weather,
            target_daily_flow,
            target_hourly_flow,
            context_days,
        )?);
    }

    Ok(WindowSet {
        weather_names: daily_weather.names().to_vec(),
        context_days,
        skipped_days: candidates - windows.len(),
        candidate_days: candidates,
        windows,
    })
}

/// The 24 complete rows of `date` in an hourly series, if all present.
fn day_hours(series: &TimeSeries, date: NaiveDate) -> Option<Vec<Vec<f64>>> {
    let r0 = series.row_at(utc_midnight(date))?;
    if r0 + HOURS_PER_DAY > series.rows() {
        return None;
    }
    (r0..r0 + HOURS_PER_DAY)
        .map(|r| series.complete_row(r))
        .collect()
}

fn check_resolution(
    name: &'static str,
    series: &TimeSeries,
    expected: Resolution,
) -> Result<(), WindowError> {
    if series.resolution() != expected {
        return Err(WindowError::WrongResolution {
            name,
            expected,
            got: series.resolution(),
        });
    }
    Ok(())
}
