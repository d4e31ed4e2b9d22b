//! Baselines, metrics and figure-data emission for comparing disaggregation
//! methods against ground truth.

mod figures;
mod interpolate;
mod metrics;

pub use figures::emit_figure_data;
pub use interpolate::linear_interpolate;
pub use metrics::{mae, mean_preservation_error, rmse, variance_ratio};

use std::collections::BTreeMap;
use std::io::Write;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::timeseries::{utc_midnight, Resolution, TimeSeries, TimeSeriesError};
use crate::window::HOURS_PER_DAY;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("metric inputs must be non-empty")]
    Empty,
    #[error("metric inputs differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("expected 24 hourly values, got {got}")]
    HourCount { got: usize },
    #[error("non-finite metric input")]
    NonFinite,
    #[error("truth variance is zero; variance ratio undefined")]
    ZeroTruthVariance,
    #[error("series must be daily")]
    NotDaily,
    #[error("series must be hourly")]
    NotHourly,
    #[error("flow series must have exactly one variable, got {got}")]
    FlowWidth { got: usize },
    #[error("need at least 2 daily anchors, got {got}")]
    NotEnoughAnchors { got: usize },
    #[error("method `{method}` series span differs from the others")]
    SpanMismatch { method: String },
    #[error("day {day} of the evaluation span is outside the `{series}` series")]
    DayOutOfSpan {
        day: NaiveDate,
        series: &'static str,
    },
    #[error("no methods to compare")]
    NoMethods,
    #[error("no day passed the completeness checks")]
    NoEvaluatedDays,
    #[error("report has no rows")]
    EmptyReport,
    #[error("figure day selection is empty")]
    EmptySelection,
    #[error("no disaggregation result for day {day}")]
    MissingDay { day: NaiveDate },
    #[error(transparent)]
    Series(#[from] TimeSeriesError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Metrics for one method on one day. Truth-dependent metrics are absent
/// when no ground truth was supplied (or, for the variance ratio, when the
/// truth has no intra-day variance).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub day_id: NaiveDate,
    pub method: String,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub mean_preservation_error: f64,
    pub variance_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub days: usize,
    pub mean_mae: Option<f64>,
    pub mean_rmse: Option<f64>,
    pub mean_mean_preservation_error: f64,
    pub mean_variance_ratio: Option<f64>,
    pub negative_predictions: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalDiagnostics {
    /// Candidate days dropped for incomplete data.
    pub skipped_days: usize,
    /// Evaluated days whose truth had zero intra-day variance.
    pub zero_variance_days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub summaries: Vec<MethodSummary>,
    pub diagnostics: EvalDiagnostics,
    pub evaluated_days: Vec<NaiveDate>,
}

impl EvalReport {
    pub fn summary_for(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

/// Score every method's hourly series against ground truth (when given)
/// and the daily series, day by day. All method series must share one
/// hourly span; days incomplete in any input are skipped and counted.
pub fn compare_methods(
    methods: &BTreeMap<String, TimeSeries>,
    truth: Option<&TimeSeries>,
    daily: &TimeSeries,
) -> Result<EvalReport, EvalError> {
    let Some(first) = methods.values().next() else {
        return Err(EvalError::NoMethods);
    };
    for (name, series) in methods {
        if series.resolution() != Resolution::Hourly {
            return Err(EvalError::NotHourly);
        }
        if series.width() != 1 {
            return Err(EvalError::FlowWidth {
                got: series.width(),
            });
        }
        if series.start() != first.start() || series.rows() != first.rows() {
            return Err(EvalError::SpanMismatch {
                method: name.clone(),
            });
        }
    }
    if daily.resolution() != Resolution::Daily {
        return Err(EvalError::NotDaily);
    }
    if daily.width() != 1 {
        return Err(EvalError::FlowWidth { got: daily.width() });
    }
    if let Some(t) = truth {
        if t.resolution() != Resolution::Hourly {
            return Err(EvalError::NotHourly);
        }
        if t.width() != 1 {
            return Err(EvalError::FlowWidth { got: t.width() });
        }
    }

    let first_day = first.start().date_naive();
    let n_days = first.rows() / HOURS_PER_DAY;

    let mut rows = Vec::new();
    let mut evaluated_days = Vec::new();
    let mut diagnostics = EvalDiagnostics::default();
    let mut negatives: BTreeMap<&str, usize> = methods.keys().map(|k| (k.as_str(), 0)).collect();

    for d in 0..n_days {
        let day = first_day + chrono::Duration::days(d as i64);
        let daily_row = daily.row_for_date(day).ok_or(EvalError::DayOutOfSpan {
            day,
            series: "daily",
        })?;
        let truth_hours = match truth {
            Some(t) => {
                let r0 = t
                    .row_at(utc_midnight(day))
                    .filter(|&r0| r0 + HOURS_PER_DAY <= t.rows())
                    .ok_or(EvalError::DayOutOfSpan {
                        day,
                        series: "truth",
                    })?;
                Some(day_values(t, r0))
            }
            None => None,
        };

        let daily_value = daily.value(daily_row, 0);
        let method_hours: Vec<Option<Vec<f64>>> = methods
            .values()
            .map(|s| day_values(s, d * HOURS_PER_DAY))
            .collect();
        let complete = daily_value.is_some()
            && method_hours.iter().all(Option::is_some)
            && truth_hours.as_ref().is_none_or(|t| t.is_some());
        if !complete {
            diagnostics.skipped_days += 1;
            continue;
        }
        let daily_value = daily_value.unwrap();
        let truth_hours = truth_hours.map(Option::unwrap);

        let mut zero_variance_day = false;
        for (name, hours) in methods.keys().zip(&method_hours) {
            let hours = hours.as_ref().unwrap();
            *negatives.get_mut(name.as_str()).unwrap() +=
                hours.iter().filter(|v| **v < 0.0).count();
            let (mae_v, rmse_v, var_ratio) = match &truth_hours {
                Some(t) => {
                    let ratio = match variance_ratio(hours, t) {
                        Ok(r) => Some(r),
                        Err(EvalError::ZeroTruthVariance) => {
                            zero_variance_day = true;
                            None
                        }
                        Err(e) => return Err(e),
                    };
                    (Some(mae(hours, t)?), Some(rmse(hours, t)?), ratio)
                }
                None => (None, None, None),
            };
            rows.push(EvalRow {
                day_id: day,
                method: name.clone(),
                mae: mae_v,
                rmse: rmse_v,
                mean_preservation_error: mean_preservation_error(hours, daily_value)?,
                variance_ratio: var_ratio,
            });
        }
        if zero_variance_day {
            diagnostics.zero_variance_days += 1;
        }
        evaluated_days.push(day);
    }

    if evaluated_days.is_empty() {
        return Err(EvalError::NoEvaluatedDays);
    }

    let summaries = methods
        .keys()
        .map(|name| {
            let method_rows: Vec<&EvalRow> = rows.iter().filter(|r| &r.method == name).collect();
            MethodSummary {
                method: name.clone(),
                days: method_rows.len(),
                mean_mae: mean_of(method_rows.iter().filter_map(|r| r.mae)),
                mean_rmse: mean_of(method_rows.iter().filter_map(|r| r.rmse)),
                mean_mean_preservation_error: mean_of(
                    method_rows.iter().map(|r| r.mean_preservation_error),
                )
                .unwrap_or(0.0),
                mean_variance_ratio: mean_of(method_rows.iter().filter_map(|r| r.variance_ratio)),
                negative_predictions: negatives[name.as_str()],
            }
        })
        .collect();

    Ok(EvalReport {
        rows,
        summaries,
        diagnostics,
        evaluated_days,
    })
}

fn day_values(series: &TimeSeries, r0: usize) -> Option<Vec<f64>> {
    (r0..r0 + HOURS_PER_DAY)
        .map(|r| series.value(r, 0))
        .collect()
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        None
    } else {
        Some(collected.iter().sum::<f64>() / collected.len() as f64)
    }
}

fn write_opt<W: Write>(w: &mut W, v: Option<f64>) -> std::io::Result<()> {
    match v {
        Some(x) => write!(w, ",{x}"),
        None => write!(w, ","),
    }
}

/// Per-day rows: `day,method,mae,rmse,mean_preservation_error,variance_ratio`.
pub fn write_report_csv<W: Write>(report: &EvalReport, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "day,method,mae,rmse,mean_preservation_error,variance_ratio"
    )?;
    for r in &report.rows {
        write!(w, "{},{}", r.day_id, r.method)?;
        write_opt(&mut w, r.mae)?;
        write_opt(&mut w, r.rmse)?;
        write!(w, ",{}", r.mean_preservation_error)?;
        write_opt(&mut w, r.variance_ratio)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Per-method aggregates plus diagnostics.
pub fn write_summary_csv<W: Write>(report: &EvalReport, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "method,days,mean_mae,mean_rmse,mean_mean_preservation_error,mean_variance_ratio,negative_predictions,skipped_days,zero_variance_days"
    )?;
    for s in &report.summaries {
        write!(w, "{},{}", s.method, s.days)?;
        write_opt(&mut w, s.mean_mae)?;
        write_opt(&mut w, s.mean_rmse)?;
        write!(w, ",{}", s.mean_mean_preservation_error)?;
        write_opt(&mut w, s.mean_variance_ratio)?;
        writeln!(
            w,
            ",{},{},{}",
            s.negative_predictions,
            report.diagnostics.skipped_days,
            report.diagnostics.zero_variance_days
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hourly_series(days: usize, f: impl Fn(usize) -> Option<f64>) -> TimeSeries {
        TimeSeries::new(
            utc_midnight(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap()),
            Resolution::Hourly,
            vec!["flow".to_string()],
            vec!["m³/s".to_string()],
            (0..days * 24).map(|i| vec![f(i)]).collect(),
        )
        .unwrap()
    }

    fn daily_from(hourly: &TimeSeries) -> TimeSeries {
        let rules = [("flow".to_string(), crate::timeseries::AggregateRule::Mean)]
            .into_iter()
            .collect();
        hourly.aggregate_hourly_to_daily(&rules).unwrap()
    }

    #[test]
    fn model_vs_itself_is_perfect() {
        let truth = hourly_series(3, |i| Some(1.0 + ((i % 24) as f64 * 0.4).sin()));
        let daily = daily_from(&truth);
        let methods: BTreeMap<String, TimeSeries> =
            [("model".to_string(), truth.clone())].into_iter().collect();
        let report = compare_methods(&methods, Some(&truth), &daily).unwrap();
        assert_eq!(report.evaluated_days.len(), 3);
        for row in &report.rows {
            assert_eq!(row.mae, Some(0.0));
            assert_eq!(row.rmse, Some(0.0));
            assert_eq!(row.variance_ratio, Some(1.0));
        }
        let s = report.summary_for("model").unwrap();
        assert_eq!(s.mean_mae, Some(0.0));
        assert_eq!(s.mean_variance_ratio, Some(1.0));
    }

    #[test]
    fn uniform_baseline_scores_zero_variance_and_zero_mpe() {
        let truth = hourly_series(2, |i| Some(1.0 + ((i % 24) as f64 * 0.4).sin()));
        let daily = daily_from(&truth);
        // uniform: every hour equals that day's daily average
        let uniform = hourly_series(2, |i| {
            let day = i / 24;
            daily.value(day, 0)
        });
        let methods: BTreeMap<String, TimeSeries> =
            [("uniform".to_string(), uniform)].into_iter().collect();
        let report = compare_methods(&methods, Some(&truth), &daily).unwrap();
        for row in &report.rows {
            // summing 24 equal values rounds, so allow ~ulp-scale residue
            assert!(row.variance_ratio.unwrap() <= 1e-24);
            assert!(row.mean_preservation_error <= 1e-12);
        }
    }

    #[test]
    fn aggregates_equal_recomputation_from_rows() {
        let truth = hourly_series(5, |i| Some(2.0 + ((i % 24) as f64 * 0.3).cos()));
        let daily = daily_from(&truth);
        let shifted = hourly_series(5, |i| Some(2.1 + ((i % 24) as f64 * 0.3).cos()));
        let methods: BTreeMap<String, TimeSeries> =
            [("a".to_string(), truth.clone()), ("b".to_string(), shifted)]
                .into_iter()
                .collect();
        let report = compare_methods(&methods, Some(&truth), &daily).unwrap();
        for s in &report.summaries {
            let rows: Vec<&EvalRow> = report
                .rows
                .iter()
                .filter(|r| r.method == s.method)
                .collect();
            let mean_mae = rows.iter().map(|r| r.mae.unwrap()).sum::<f64>() / rows.len() as f64;
            assert!((s.mean_mae.unwrap() - mean_mae).abs() < 1e-12);
            let mean_mpe =
                rows.iter().map(|r| r.mean_preservation_error).sum::<f64>() / rows.len() as f64;
            assert!((s.mean_mean_preservation_error - mean_mpe).abs() < 1e-12);
        }
    }

    #[test]
    fn incomplete_days_are_skipped_with_diagnostics() {
        let truth = hourly_series(3, |i| Some(1.0 + (i % 24) as f64 * 0.01));
        let daily = daily_from(&truth);
        // method missing one hour on day 2
        let gappy = hourly_series(3, |i| (i != 30).then_some(1.0 + (i % 24) as f64 * 0.01));
        let methods: BTreeMap<String, TimeSeries> =
            [("model".to_string(), gappy)].into_iter().collect();
        let report = compare_methods(&methods, Some(&truth), &daily).unwrap();
        assert_eq!(report.evaluated_days.len(), 2);
        assert_eq!(report.diagnostics.skipped_days, 1);
    }

    #[test]
    fn zero_variance_truth_day_drops_the_ratio_only() {
        let truth = hourly_series(2, |i| {
            if i < 24 {
                Some(5.0)
            } else {
                Some(1.0 + (i % 24) as f64 * 0.1)
            }
        });
        let daily = daily_from(&truth);
        let model = hourly_series(2, |i| Some(1.0 + (i % 24) as f64 * 0.05));
        let methods: BTreeMap<String, TimeSeries> =
            [("model".to_string(), model)].into_iter().collect();
        let report = compare_methods(&methods, Some(&truth), &daily).unwrap();
        assert_eq!(report.diagnostics.zero_variance_days, 1);
        assert_eq!(report.rows[0].variance_ratio, None);
        assert!(report.rows[0].mae.is_some());
        assert!(report.rows[1].variance_ratio.is_some());
    }

    #[test]
    fn span_mismatch_is_an_error() {
        let a = hourly_series(3, |_| Some(1.0));
        let b = hourly_series(2, |_| Some(1.0));
        let daily = daily_from(&a);
        let methods: BTreeMap<String, TimeSeries> = [("a".to_string(), a), ("b".to_string(), b)]
            .into_iter()
            .collect();
        assert!(matches!(
            compare_methods(&methods, None, &daily),
            Err(EvalError::SpanMismatch { .. })
        ));
    }

    #[test]
    fn truth_not_covering_span_names_the_day() {
        let model = hourly_series(3, |_| Some(1.0));
        let daily = daily_from(&model);
        let short_truth = hourly_series(2, |_| Some(1.0));
        let methods: BTreeMap<String, TimeSeries> =
            [("model".to_string(), model)].into_iter().collect();
        let err = compare_methods(&methods, Some(&short_truth), &daily).unwrap_err();
        match err {
            EvalError::DayOutOfSpan {
                day,
                series: "truth",
            } => {
                assert_eq!(day, NaiveDate::from_ymd_opt(2020, 1, 3).unwrap());
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn without_truth_only_mpe_is_reported() {
        let model = hourly_series(2, |i| Some(1.0 + (i % 24) as f64 * 0.01));
        let daily = daily_from(&model);
        let methods: BTreeMap<String, TimeSeries> =
            [("model".to_string(), model)].into_iter().collect();
        let report = compare_methods(&methods, None, &daily).unwrap();
        for row in &report.rows {
            assert!(row.mae.is_none() && row.rmse.is_none() && row.variance_ratio.is_none());
        }
        assert!(report.summary_for("model").unwrap().mean_mae.is_none());
    }
}
