//! Per-day figure data: a CSV with all four series and a small static SVG
//! line chart. Output bytes depend only on the inputs.

use std::fmt::Write as FmtWrite;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use super::{EvalError, EvalReport};
use crate::disagg::DisaggRun;
use crate::timeseries::{utc_midnight, TimeSeries};
use crate::window::HOURS_PER_DAY;

struct DayData<'a> {
    day: NaiveDate,
    run: &'a DisaggRun,
    truth: Option<Vec<f64>>,
    interpolation: Vec<f64>,
}

/// Write `day_<date>.csv` and `day_<date>.svg` for each selected day.
/// Everything is resolved before the first file is created, so an invalid
/// selection produces no partial output.
pub fn emit_figure_data(
    report: &EvalReport,
    runs: &[DisaggRun],
    truth: Option<&TimeSeries>,
    interpolation: &TimeSeries,
    days: &[NaiveDate],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, EvalError> {
    if report.rows.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    if days.is_empty() {
        return Err(EvalError::EmptySelection);
    }

    let mut resolved = Vec::with_capacity(days.len());
    for &day in days {
        let run = runs
            .iter()
            .find(|r| r.result.day_id == day)
            .ok_or(EvalError::MissingDay { day })?;
        let r0 = interpolation
            .row_at(utc_midnight(day))
            .filter(|&r0| r0 + HOURS_PER_DAY <= interpolation.rows())
            .ok_or(EvalError::DayOutOfSpan {
                day,
                series: "interpolation",
            })?;
        let interp: Vec<f64> = (r0..r0 + HOURS_PER_DAY)
            .map(|r| {
                interpolation.value(r, 0).ok_or(EvalError::DayOutOfSpan {
                    day,
                    series: "interpolation",
                })
            })
            .collect::<Result<_, _>>()?;
        let truth_hours = run.truth.clone().or_else(|| {
            truth.and_then(|t| {
                let r0 = t.row_at(utc_midnight(day))?;
                if r0 + HOURS_PER_DAY > t.rows() {
                    return None;
                }
                (r0..r0 + HOURS_PER_DAY).map(|r| t.value(r, 0)).collect()
            })
        });
        resolved.push(DayData {
            day,
            run,
            truth: truth_hours,
            interpolation: interp,
        });
    }

    std::fs::create_dir_all(out_dir)?;
    let mut paths = Vec::with_capacity(resolved.len() * 2);
    for data in &resolved {
        let csv_path = out_dir.join(format!("day_{}.csv", data.day));
        std::fs::write(&csv_path, day_csv(data))?;
        paths.push(csv_path);
        let svg_path = out_dir.join(format!("day_{}.svg", data.day));
        std::fs::write(&svg_path, day_svg(data))?;
        paths.push(svg_path);
    }
    Ok(paths)
}

fn day_csv(data: &DayData<'_>) -> String {
    let mut out = String::from("hour,truth,model_raw,model_corrected,interpolation\n");
    for h in 0..HOURS_PER_DAY {
        let truth_cell = data
            .truth
            .as_ref()
            .map(|t| t[h].to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{h},{truth_cell},{},{},{}",
            data.run.result.hourly_flow_raw[h],
            data.run.result.hourly_flow_corrected[h],
            data.interpolation[h],
        );
    }
    out
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 15.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 35.0;

fn day_svg(data: &DayData<'_>) -> String {
    let mut series: Vec<(&str, &str, &[f64])> = Vec::new();
    if let Some(t) = &data.truth {
        series.push(("truth", "#1f77b4", t));
    }
    series.push(("model_raw", "#999999", &data.run.result.hourly_flow_raw));
    series.push((
        "model_corrected",
        "#d62728",
        &data.run.result.hourly_flow_corrected,
    ));
    series.push(("interpolation", "#2ca02c", &data.interpolation));

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, _, values) in &series {
        for v in *values {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);

    let x = |hour: usize| MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) * hour as f64 / 23.0;
    let y = |v: f64| {
        HEIGHT - MARGIN_BOTTOM - (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) * (v - lo) / (hi - lo)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{MARGIN_LEFT}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">hourly flow, {} (m³/s)</text>",
        data.day
    );
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_BOTTOM
    );
    let _ = writeln!(
        svg,
        "<text x=\"5\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{hi:.2}</text>",
        MARGIN_TOP + 4.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"5\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{lo:.2}</text>",
        HEIGHT - MARGIN_BOTTOM
    );
    for hour in [0usize, 6, 12, 18, 23] {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{hour}</text>",
            x(hour) - 4.0,
            HEIGHT - MARGIN_BOTTOM + 16.0
        );
    }

    for (i, (name, color, values)) in series.iter().enumerate() {
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(h, v)| format!("{:.2},{:.2}", x(h), y(*v)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{name}</text>",
            MARGIN_LEFT + 240.0 + 130.0 * i as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}
