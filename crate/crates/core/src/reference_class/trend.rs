use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use thiserror::Error;

use super::loess::{loess_smooth, LoessError};
use crate::benchmarking::{mann_whitney_u, MannWhitney};
use crate::normalization::OverrunObservation;

pub const MIN_TREND_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrendError {
    #[error("a date trend needs at least {MIN_TREND_POINTS} observations, got {0}")]
    InsufficientData(usize),
    #[error(transparent)]
    Loess(#[from] LoessError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendPoint {
    pub project_id: String,
    pub date: NaiveDate,
    pub value: f64,
    pub fit: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftSide {
    pub n: usize,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSummary {
    pub points: Vec<TrendPoint>,
    pub cutoff: NaiveDate,
    pub before: ShiftSide,
    pub after: ShiftSide,
    /// Rank test of before vs after; absent when either side is empty.
    pub shift_test: Option<MannWhitney>,
}

/// Calendar date as a fractional year, e.g. 1993-07-02 is about 1993.5.
pub fn fractional_year(date: NaiveDate) -> f64 {
    let days_in_year = if date.leap_year() { 366.0 } else { 365.0 };
    date.year() as f64 + date.ordinal0() as f64 / days_in_year
}

fn side(values: &[f64]) -> ShiftSide {
    ShiftSide { n: values.len(), mean: (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64) }
}

/// Loess trend of overruns against their reference dates, plus the
/// before/after comparison at `cutoff` (dates before the cutoff count as before).
pub fn trend_by_date(
    observations: &[OverrunObservation],
    cutoff: NaiveDate,
    span: f64,
    degree: usize,
) -> Result<TrendSummary, TrendError> {
    if observations.len() < MIN_TREND_POINTS {
        return Err(TrendError::InsufficientData(observations.len()));
    }
    let mut ordered: Vec<&OverrunObservation> = observations.iter().collect();
    ordered.sort_by(|a, b| a.reference_date.cmp(&b.reference_date).then_with(|| a.project_id.cmp(&b.project_id)));

    let xy: Vec<(f64, f64)> = ordered.iter().map(|o| (fractional_year(o.reference_date), o.value)).collect();
    let fit = loess_smooth(&xy, span, degree)?;

    let points = ordered
        .iter()
        .zip(fit)
        .map(|(o, f)| TrendPoint {
            project_id: o.project_id.clone(),
            date: o.reference_date,
            value: o.value,
            fit: f.fit,
            ci_low: f.ci_low,
            ci_high: f.ci_high,
        })
        .collect();

    let (before, after): (Vec<&OverrunObservation>, Vec<&OverrunObservation>) =
        ordered.iter().partition(|o| o.reference_date < cutoff);
    let before: Vec<f64> = before.iter().map(|o| o.value).collect();
    let after: Vec<f64> = after.iter().map(|o| o.value).collect();
    let shift_test = (!before.is_empty() && !after.is_empty()).then(|| mann_whitney_u(&before, &after));

    Ok(TrendSummary { points, cutoff, before: side(&before), after: side(&after), shift_test })
}
