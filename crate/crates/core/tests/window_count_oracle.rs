//! Window counting against a brute-force one-pass completeness scan that
//! shares no code with the window builder.

use chrono::NaiveDate;
use flowdisagg_core::ingest::{synth_generate, SynthConfig};
use flowdisagg_core::timeseries::TimeSeries;
use flowdisagg_core::window::build_windows;

/// Independent oracle: per-day completeness booleans, then a linear scan
/// counting days whose six predecessors and themselves are usable.
fn brute_force_window_count(
    daily_weather: &TimeSeries,
    daily_flow: &TimeSeries,
    hourly_weather: &TimeSeries,
    context_days: usize,
) -> usize {
    let n_days = daily_weather.rows();
    let daily_ok: Vec<bool> = (0..n_days)
        .map(|d| daily_weather.is_row_complete(d) && daily_flow.is_row_complete(d))
        .collect();
    let hourly_ok: Vec<bool> = (0..n_days)
        .map(|d| {
            let date = daily_weather.date_of_row(d);
            let midnight = flowdisagg_core::timeseries::utc_midnight(date);
            match hourly_weather.row_at(midnight) {
                Some(r0) if r0 + 24 <= hourly_weather.rows() => {
                    (r0..r0 + 24).all(|r| hourly_weather.is_row_complete(r))
                }
                _ => false,
            }
        })
        .collect();

    let mut count = 0;
    for d in context_days..n_days {
        let context_fine = (d - context_days..d).all(|i| daily_ok[i]);
        if context_fine && daily_ok[d] && hourly_ok[d] {
            count += 1;
        }
    }
    count
}

/// Rebuild a series with some entries punched out (TimeSeries is immutable).
fn punch(series: &TimeSeries, holes: &[(usize, usize)]) -> TimeSeries {
    let rows: Vec<Vec<Option<f64>>> = (0..series.rows())
        .map(|r| {
            (0..series.width())
                .map(|c| {
                    if holes.contains(&(r, c)) {
                        None
                    } else {
                        series.value(r, c)
                    }
                })
                .collect()
        })
        .collect();
    TimeSeries::new(
        series.start(),
        series.resolution(),
        series.names().to_vec(),
        series.units().to_vec(),
        rows,
    )
    .unwrap()
}

#[test]
fn default_synthetic_dataset_yields_394_windows() {
    let data = synth_generate(&SynthConfig::default()).unwrap();
    let set = build_windows(
        &data.daily_weather,
        &data.daily_flow,
        &data.hourly_weather,
        Some(&data.hourly_flow),
        6,
    )
    .unwrap();
    let oracle = brute_force_window_count(
        &data.daily_weather,
        &data.daily_flow,
        &data.hourly_weather,
        6,
    );
    assert_eq!(set.windows.len(), oracle);
    assert_eq!(set.windows.len(), 394); // 400 complete days, context 6
    assert_eq!(set.skipped_days, 0);
    assert_eq!(
        set.windows.first().unwrap().day_id,
        NaiveDate::from_ymd_opt(2020, 1, 7).unwrap()
    );
    // Every constructed window carries evaluation truth for this dataset.
    assert!(set.windows.iter().all(|w| w.target_hourly_flow.is_some()));
}

#[test]
fn gappy_dataset_count_matches_the_scan() {
    let data = synth_generate(&SynthConfig {
        n_days: 90,
        ..SynthConfig::default()
    })
    .unwrap();
    // Punch daily flow on two days, daily weather on one, and an hourly
    // weather hole inside another day.
    let daily_flow = punch(&data.daily_flow, &[(20, 0), (55, 0)]);
    let daily_weather = punch(&data.daily_weather, &[(40, 1)]);
    let hourly_weather = punch(&data.hourly_weather, &[(70 * 24 + 13, 0)]);

    let set = build_windows(&daily_weather, &daily_flow, &hourly_weather, None, 6).unwrap();
    let oracle = brute_force_window_count(&daily_weather, &daily_flow, &hourly_weather, 6);
    assert_eq!(set.windows.len(), oracle);
    assert_eq!(set.skipped_days, set.candidate_days - set.windows.len());
    // Each daily hole costs 7 candidate days, the hourly hole costs 1.
    assert_eq!(set.windows.len(), 90 - 6 - 7 - 7 - 7 - 1);
}

#[test]
fn aggregated_synthetic_flow_reproduces_daily_series() {
    // aggregate(hourly flow, mean) must reproduce the generator's daily
    // flow within 1e-6 relative (it is definitionally the same quantity).
    let data = synth_generate(&SynthConfig {
        n_days: 40,
        ..SynthConfig::default()
    })
    .unwrap();
    let rules = [("flow".to_string(), flowdisagg_core::AggregateRule::Mean)]
        .into_iter()
        .collect();
    let re_daily = data.hourly_flow.aggregate_hourly_to_daily(&rules).unwrap();
    assert_eq!(re_daily.rows(), data.daily_flow.rows());
    for d in 0..re_daily.rows() {
        let a = re_daily.value(d, 0).unwrap();
        let b = data.daily_flow.value(d, 0).unwrap();
        assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
    }
}
