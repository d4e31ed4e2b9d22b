//! Linear-interpolation baseline.
//!
//! Each daily average is anchored at hour 12 of its day (a daily mean is
//! best centered mid-day) and hours are interpolated linearly between
//! consecutive anchors; the leading and trailing half-days extend flat.
//! Missing daily values simply drop their anchor, so the ramp spans them.
//! Anchoring preserves the anchor values exactly but generally does NOT
//! preserve daily means on curved signals.

use super::EvalError;
use crate::timeseries::{Resolution, TimeSeries};
use crate::window::HOURS_PER_DAY;

pub fn linear_interpolate(daily_flow: &TimeSeries) -> Result<TimeSeries, EvalError> {
    if daily_flow.resolution() != Resolution::Daily {
        return Err(EvalError::NotDaily);
    }
    if daily_flow.width() != 1 {
        return Err(EvalError::FlowWidth {
            got: daily_flow.width(),
        });
    }
    let anchors: Vec<(f64, f64)> = (0..daily_flow.rows())
        .filter_map(|d| {
            daily_flow
                .value(d, 0)
                .map(|v| ((d * HOURS_PER_DAY + 12) as f64, v))
        })
        .collect();
    if anchors.len() < 2 {
        return Err(EvalError::NotEnoughAnchors { got: anchors.len() });
    }

    let n_hours = daily_flow.rows() * HOURS_PER_DAY;
    let mut rows = Vec::with_capacity(n_hours);
    let mut segment = 0usize;
    for hour in 0..n_hours {
        let t = hour as f64;
        while segment + 2 < anchors.len() && t > anchors[segment + 1].0 {
            segment += 1;
        }
        let (t0, v0) = anchors[segment];
        let (t1, v1) = anchors[segment + 1];
        let value = if t <= t0 {
            v0
        } else if t >= t1 {
            v1
        } else {
            v0 + (t - t0) / (t1 - t0) * (v1 - v0)
        };
        rows.push(vec![Some(value)]);
    }

    Ok(TimeSeries::new(
        daily_flow.start(),
        Resolution::Hourly,
        daily_flow.names().to_vec(),
        daily_flow.units().to_vec(),
        rows,
    )?)
}
