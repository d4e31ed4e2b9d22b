//! Per-feature z-score normalization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeseries::{TimeSeries, TimeSeriesError};

/// Lower bound for fitted standard deviations.
pub const DEFAULT_STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ScalerError {
    #[error("feature `{feature}` has {count} non-missing values in the mask, need at least 2")]
    InsufficientData { feature: String, count: usize },
    #[error("feature order mismatch: scaler expects {expected:?}, series has {got:?}")]
    FeatureMismatch {
        expected: Vec<String>,
        got: Vec<String>,
    },
    #[error("row has {got} values, scaler expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("row mask index {index} out of range ({rows} rows)")]
    MaskOutOfRange { index: usize, rows: usize },
    #[error(transparent)]
    Series(#[from] TimeSeriesError),
}

/// Fitted per-feature mean and standard deviation (population convention,
/// divide by N), with the std clamped to a floor so constant features stay
/// invertible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    names: Vec<String>,
    means: Vec<f64>,
    stds: Vec<f64>,
    floor: f64,
}

impl Scaler {
    /// Fit over the masked rows of a series, skipping missing entries.
    pub fn fit(series: &TimeSeries, row_mask: &[usize], floor: f64) -> Result<Self, ScalerError> {
        for &r in row_mask {
            if r >= series.rows() {
                return Err(ScalerError::MaskOutOfRange {
                    index: r,
                    rows: series.rows(),
                });
            }
        }
        let columns: Vec<Vec<f64>> = (0..series.width())
            .map(|c| {
                row_mask
                    .iter()
                    .filter_map(|&r| series.value(r, c))
                    .collect()
            })
            .collect();
        Self::fit_columns(series.names().to_vec(), &columns, floor)
    }

    /// Fit from complete rows (no missing entries), e.g. window contents.
    pub fn fit_rows<'a, I>(names: Vec<String>, rows: I, floor: f64) -> Result<Self, ScalerError>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let width = names.len();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
        for row in rows {
            assert_eq!(row.len(), width, "fit_rows: ragged row");
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        Self::fit_columns(names, &columns, floor)
    }

    fn fit_columns(
        names: Vec<String>,
        columns: &[Vec<f64>],
        floor: f64,
    ) -> Result<Self, ScalerError> {
        let mut means = Vec::with_capacity(names.len());
        let mut stds = Vec::with_capacity(names.len());
        for (c, col) in columns.iter().enumerate() {
            if col.len() < 2 {
                return Err(ScalerError::InsufficientData {
                    feature: names[c].clone(),
                    count: col.len(),
                });
            }
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
            means.push(mean);
            stds.push(var.sqrt().max(floor));
        }
        Ok(Self {
            names,
            means,
            stds,
            floor,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    fn check_series(&self, series: &TimeSeries) -> Result<(), ScalerError> {
        if series.names() != self.names.as_slice() {
            return Err(ScalerError::FeatureMismatch {
                expected: self.names.clone(),
                got: series.names().to_vec(),
            });
        }
        Ok(())
    }

    /// z = (x - mean) / std, missing markers untouched.
    pub fn apply(&self, series: &TimeSeries) -> Result<TimeSeries, ScalerError> {
        self.check_series(series)?;
        Ok(series.map_values(|c, x| (x - self.means[c]) / self.stds[c])?)
    }

    /// Exact inverse of [`Scaler::apply`].
    pub fn invert(&self, series: &TimeSeries) -> Result<TimeSeries, ScalerError> {
        self.check_series(series)?;
        Ok(series.map_values(|c, z| z * self.stds[c] + self.means[c])?)
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>, ScalerError> {
        if row.len() != self.width() {
            return Err(ScalerError::WidthMismatch {
                expected: self.width(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(c, &x)| (x - self.means[c]) / self.stds[c])
            .collect())
    }

    pub fn apply_value(&self, col: usize, x: f64) -> f64 {
        (x - self.means[col]) / self.stds[col]
    }

    pub fn invert_value(&self, col: usize, z: f64) -> f64 {
        z * self.stds[col] + self.means[col]
    }
}
