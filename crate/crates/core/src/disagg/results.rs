//! Disaggregation result CSV: `day,hour,raw,corrected,observed_daily_avg[,truth]`.

use std::io::{BufRead, Write};

use chrono::NaiveDate;

use super::{DisaggError, DisaggResult};
use crate::window::HOURS_PER_DAY;

/// One disaggregated day plus, when the evaluation dataset provides it,
/// the true hourly flows.
#[derive(Debug, Clone, PartialEq)]
pub struct DisaggRun {
    pub result: DisaggResult,
    pub truth: Option<Vec<f64>>,
}

/// The truth column is present whenever any run carries ground truth;
/// days without truth leave the cell empty.
pub fn write_results_csv<W: Write>(runs: &[DisaggRun], mut w: W) -> std::io::Result<()> {
    let with_truth = runs.iter().any(|r| r.truth.is_some());
    if with_truth {
        writeln!(w, "day,hour,raw,corrected,observed_daily_avg,truth")?;
    } else {
        writeln!(w, "day,hour,raw,corrected,observed_daily_avg")?;
    }
    for run in runs {
        let r = &run.result;
        for h in 0..HOURS_PER_DAY {
            write!(
                w,
                "{},{},{},{},{}",
                r.day_id, h, r.hourly_flow_raw[h], r.hourly_flow_corrected[h], r.daily_avg_observed
            )?;
            if with_truth {
                match &run.truth {
                    Some(t) => write!(w, ",{}", t[h])?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn read_results_csv<R: BufRead>(r: R) -> Result<Vec<DisaggRun>, DisaggError> {
    let err = |line: usize, message: String| DisaggError::ResultsCsv { line, message };
    let mut lines = r.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?;
    let header = header?;
    let with_truth = match header.as_str() {
        "day,hour,raw,corrected,observed_daily_avg" => false,
        "day,hour,raw,corrected,observed_daily_avg,truth" => true,
        other => return Err(err(1, format!("unrecognized header `{other}`"))),
    };

    struct Partial {
        day: NaiveDate,
        raw: Vec<f64>,
        corrected: Vec<f64>,
        observed: f64,
        truth: Vec<Option<f64>>,
    }
    let mut days: Vec<Partial> = Vec::new();

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = if with_truth { 6 } else { 5 };
        if fields.len() != expected {
            return Err(err(
                line_no,
                format!("expected {expected} fields, got {}", fields.len()),
            ));
        }
        let day: NaiveDate = fields[0]
            .parse()
            .map_err(|e| err(line_no, format!("bad day `{}`: {e}", fields[0])))?;
        let hour: usize = fields[1]
            .parse()
            .map_err(|e| err(line_no, format!("bad hour `{}`: {e}", fields[1])))?;
        let parse = |text: &str, what: &str| -> Result<f64, DisaggError> {
            text.parse()
                .map_err(|e| err(line_no, format!("bad {what} `{text}`: {e}")))
        };
        let raw = parse(fields[2], "raw")?;
        let corrected = parse(fields[3], "corrected")?;
        let observed = parse(fields[4], "observed_daily_avg")?;
        let truth = if with_truth && !fields[5].is_empty() {
            Some(parse(fields[5], "truth")?)
        } else {
            None
        };

        let open_new = days.last().is_none_or(|p| p.day != day);
        if open_new {
            if hour != 0 {
                return Err(err(
                    line_no,
                    format!("day {day} starts at hour {hour}, not 0"),
                ));
            }
            days.push(Partial {
                day,
                raw: Vec::with_capacity(HOURS_PER_DAY),
                corrected: Vec::with_capacity(HOURS_PER_DAY),
                observed,
                truth: Vec::with_capacity(HOURS_PER_DAY),
            });
        }
        let partial = days.last_mut().unwrap();
        if hour != partial.raw.len() {
            return Err(err(
                line_no,
                format!("day {day}: expected hour {}, got {hour}", partial.raw.len()),
            ));
        }
        if observed != partial.observed {
            return Err(err(
                line_no,
                format!("day {day}: observed_daily_avg changes mid-day"),
            ));
        }
        partial.raw.push(raw);
        partial.corrected.push(corrected);
        partial.truth.push(truth);
    }

    days.into_iter()
        .map(|p| {
            if p.raw.len() != HOURS_PER_DAY {
                return Err(DisaggError::ResultsCsv {
                    line: 0,
                    message: format!("day {} has {} hours, expected 24", p.day, p.raw.len()),
                });
            }
            let truth: Option<Vec<f64>> = p.truth.iter().copied().collect();
            Ok(DisaggRun {
                result: DisaggResult::new(p.day, p.raw, p.corrected, p.observed)?,
                truth,
            })
        })
        .collect()
}
