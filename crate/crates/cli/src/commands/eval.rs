//! `eval`: compare the model results against linear interpolation (and
//! ground truth when available), write report/summary CSVs and per-day
//! figure files.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::PathBuf;

use chrono::NaiveDate;
use flowdisagg_core::disagg::{read_results_csv, DisaggRun};
use flowdisagg_core::eval::{
    compare_methods, emit_figure_data, linear_interpolate, write_report_csv, write_summary_csv,
};
use flowdisagg_core::timeseries::{utc_midnight, Resolution, TimeSeries};
use flowdisagg_core::window::HOURS_PER_DAY;

use crate::config::{aggregation_rules, EffectiveConfig, FileConfig};
use crate::{Cli, CliError, EvalArgs};

pub const MODEL_METHOD: &str = "disagg_model";
pub const INTERPOLATION_METHOD: &str = "linear_interpolation";

pub fn run(cli: &Cli, file: &FileConfig, args: &EvalArgs) -> Result<(), CliError> {
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut effective = EffectiveConfig::new("eval", cli.seed.unwrap_or(0), cli.offline, &out_dir);
    let data_dir_echo = super::resolve_data_dir(args.data_dir.clone(), file)?;
    effective.data_dir = Some(data_dir_echo);
    effective.echo()?;

    let f = std::fs::File::open(&args.results)
        .map_err(|e| CliError::config(format!("cannot open {}: {e}", args.results.display())))?;
    let mut runs = read_results_csv(BufReader::new(f))?;
    runs.sort_by_key(|r| r.result.day_id);
    if runs.is_empty() {
        return Err(CliError::parse("results file contains no days"));
    }

    let rules = aggregation_rules(
        file.variables.as_deref().unwrap_or(&[]),
        file.aggregation.as_ref(),
    );
    let data_dir = super::resolve_data_dir(args.data_dir.clone(), file)?;
    let data = super::load_data_dir(&data_dir, &rules)?;

    let first_day = runs.first().unwrap().result.day_id;
    let last_day = runs.last().unwrap().result.day_id;
    let n_days = (last_day - first_day).num_days() as usize + 1;

    let model_series = series_from_runs(&runs, first_day, n_days)?;
    let interp_full = linear_interpolate(&data.daily_flow)?;
    let interp_series = slice_hourly(&interp_full, first_day, n_days, "interpolation")?;
    let truth_series = match &data.hourly_flow {
        Some(hf) => Some(slice_hourly(hf, first_day, n_days, "truth")?),
        None => None,
    };

    let methods: BTreeMap<String, TimeSeries> = [
        (MODEL_METHOD.to_string(), model_series),
        (INTERPOLATION_METHOD.to_string(), interp_series.clone()),
    ]
    .into_iter()
    .collect();
    let report = compare_methods(&methods, truth_series.as_ref(), &data.daily_flow)?;

    std::fs::create_dir_all(&out_dir)?;
    let report_path = out_dir.join("report.csv");
    let mut f = std::fs::File::create(&report_path)?;
    write_report_csv(&report, &mut f)?;
    let summary_path = out_dir.join("summary.csv");
    let mut f = std::fs::File::create(&summary_path)?;
    write_summary_csv(&report, &mut f)?;

    if args.figure_days > 0 {
        let days = figure_days(&report.evaluated_days, args.figure_days);
        emit_figure_data(
            &report,
            &runs,
            truth_series.as_ref(),
            &interp_series,
            &days,
            &out_dir.join("figures"),
        )?;
    }

    for s in &report.summaries {
        println!(
            "method={} days={} mean_mae={} mean_rmse={} mean_mpe={} mean_variance_ratio={} negative_predictions={}",
            s.method,
            s.days,
            opt(s.mean_mae),
            opt(s.mean_rmse),
            s.mean_mean_preservation_error,
            opt(s.mean_variance_ratio),
            s.negative_predictions
        );
    }
    println!(
        "diagnostics skipped_days={} zero_variance_days={} report={} summary={}",
        report.diagnostics.skipped_days,
        report.diagnostics.zero_variance_days,
        report_path.display(),
        summary_path.display()
    );
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or("none".to_string(), |x| x.to_string())
}

/// Corrected model output as one contiguous hourly series; days without a
/// result become missing rows.
fn series_from_runs(
    runs: &[DisaggRun],
    first_day: NaiveDate,
    n_days: usize,
) -> Result<TimeSeries, CliError> {
    let by_day: BTreeMap<NaiveDate, &DisaggRun> =
        runs.iter().map(|r| (r.result.day_id, r)).collect();
    let mut rows = Vec::with_capacity(n_days * HOURS_PER_DAY);
    for d in 0..n_days {
        let day = first_day + chrono::Duration::days(d as i64);
        match by_day.get(&day) {
            Some(run) => {
                for h in 0..HOURS_PER_DAY {
                    rows.push(vec![Some(run.result.hourly_flow_corrected[h])]);
                }
            }
            None => rows.extend(std::iter::repeat_n(vec![None], HOURS_PER_DAY)),
        }
    }
    TimeSeries::new(
        utc_midnight(first_day),
        Resolution::Hourly,
        vec!["flow".to_string()],
        vec!["m³/s".to_string()],
        rows,
    )
    .map_err(|e| CliError::parse(e.to_string()))
}

fn slice_hourly(
    series: &TimeSeries,
    first_day: NaiveDate,
    n_days: usize,
    what: &str,
) -> Result<TimeSeries, CliError> {
    let start = utc_midnight(first_day);
    let r0 = series
        .row_at(start)
        .ok_or_else(|| CliError::config(format!("{what} series does not cover {first_day}")))?;
    let needed = n_days * HOURS_PER_DAY;
    if r0 + needed > series.rows() {
        return Err(CliError::config(format!(
            "{what} series ends before the evaluation span does"
        )));
    }
    let rows: Vec<Vec<Option<f64>>> = (r0..r0 + needed).map(|r| series.row(r).to_vec()).collect();
    TimeSeries::new(
        start,
        Resolution::Hourly,
        series.names().to_vec(),
        series.units().to_vec(),
        rows,
    )
    .map_err(|e| CliError::parse(e.to_string()))
}

/// Up to `count` evenly spaced days across the evaluated set.
fn figure_days(evaluated: &[NaiveDate], count: usize) -> Vec<NaiveDate> {
    if evaluated.len() <= count {
        return evaluated.to_vec();
    }
    (0..count)
        .map(|i| evaluated[i * (evaluated.len() - 1) / (count - 1).max(1)])
        .collect()
}
