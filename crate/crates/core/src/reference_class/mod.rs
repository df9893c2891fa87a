//! Reference classes and uplift curves.
//!
//! A reference class is the set of overruns of comparable past projects at
//! one approval stage. The uplift needed for a certainty `p` (an acceptable
//! chance of overrun of `1 - p`) is the `p`-quantile of those overruns.

mod isotonic;
mod loess;
mod quantile;
mod trend;

use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use isotonic::pool_adjacent_violators;
pub use loess::{loess_smooth, LoessError, LoessPoint, DEFAULT_DEGREE, DEFAULT_SPAN, Z_95};
pub use quantile::{empirical_quantile, QuantileError, QuantileMethod};
pub use trend::{fractional_year, trend_by_date, ShiftSide, TrendError, TrendPoint, TrendSummary, MIN_TREND_POINTS};

use crate::normalization::OverrunObservation;
use crate::registry::{Metric, Money, Stage};

/// Projects below this final outturn are not considered major works
/// (HKD 100 million, in thousands).
pub const DEFAULT_MIN_OUTTURN: Money = Money(100_000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassFilter {
    pub stage: Stage,
    pub metric: Metric,
    pub min_outturn: Money,
    pub exclude_pre_era: bool,
}

impl ClassFilter {
    pub fn new(stage: Stage, metric: Metric) -> Self {
        ClassFilter { stage, metric, min_outturn: DEFAULT_MIN_OUTTURN, exclude_pre_era: true }
    }

    pub fn accepts(&self, o: &OverrunObservation) -> bool {
        o.stage == self.stage
            && o.metric == self.metric
            && o.outturn_nominal >= self.min_outturn
            && !(self.exclude_pre_era && o.pre_era)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMember {
    pub project_id: String,
    pub value: f64,
    pub reference_date: Option<NaiveDate>,
}

/// Filtered overruns, kept both in input order and as ascending order statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceClass {
    pub filter: Option<ClassFilter>,
    members: Vec<ClassMember>,
    sorted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassError {
    #[error("reference class is empty")]
    Empty,
    #[error(transparent)]
    Quantile(#[from] QuantileError),
    #[error(transparent)]
    Loess(#[from] LoessError),
    #[error("probability grid must be ascending within (0, 1]")]
    InvalidGrid,
    #[error("curve has no smoothed values")]
    NotSmoothed,
}

impl ReferenceClass {
    pub fn from_members(filter: Option<ClassFilter>, members: Vec<ClassMember>) -> Self {
        let mut sorted: Vec<f64> = members.iter().map(|m| m.value).collect();
        sorted.sort_by(f64::total_cmp);
        ReferenceClass { filter, members, sorted }
    }

    /// Class from bare `(id, overrun)` pairs.
    pub fn from_values<S: Into<String>>(values: impl IntoIterator<Item = (S, f64)>) -> Self {
        let members = values
            .into_iter()
            .map(|(id, value)| ClassMember { project_id: id.into(), value, reference_date: None })
            .collect();
        Self::from_members(None, members)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in the order they were supplied.
    pub fn members(&self) -> &[ClassMember] {
        &self.members
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Ascending values with member `index` held out.
    pub fn sorted_without(&self, index: usize) -> Vec<f64> {
        let held_out = self.members[index].value;
        let mut out = Vec::with_capacity(self.sorted.len().saturating_sub(1));
        let mut skipped = false;
        for &v in &self.sorted {
            if !skipped && v.to_bits() == held_out.to_bits() {
                skipped = true;
            } else {
                out.push(v);
            }
        }
        out
    }
}

/// Keeps the observations accepted by `filter`. An empty class is returned
/// as such; check [`ReferenceClass::is_empty`].
pub fn build_class(observations: &[OverrunObservation], filter: ClassFilter) -> ReferenceClass {
    let members = observations
        .iter()
        .filter(|o| filter.accepts(o))
        .map(|o| ClassMember {
            project_id: o.project_id.clone(),
            value: o.value,
            reference_date: Some(o.reference_date),
        })
        .collect();
    ReferenceClass::from_members(Some(filter), members)
}

/// Uplift giving certainty `p` of no overrun; the acceptable chance of overrun is `1 - p`.
pub fn uplift(class: &ReferenceClass, p: f64, method: QuantileMethod) -> Result<f64, ClassError> {
    if class.is_empty() {
        return Err(ClassError::Empty);
    }
    Ok(empirical_quantile(&class.sorted, p, method)?)
}

const CERTAINTY_SLACK: f64 = 1e-12;

/// Largest certainty on a 0.01 grid whose uplift does not exceed
/// `uplift_value`; 0 when even the 1% uplift is larger.
pub fn required_certainty(class: &ReferenceClass, uplift_value: f64, method: QuantileMethod) -> f64 {
    if class.is_empty() {
        return 0.0;
    }
    (1..=100)
        .rev()
        .map(|k| k as f64 / 100.0)
        .find(|&p| empirical_quantile(&class.sorted, p, method).is_ok_and(|u| u <= uplift_value + CERTAINTY_SLACK))
        .unwrap_or(0.0)
}

/// 0.01, 0.02, ..., 0.99, 1.0
pub fn default_grid() -> Vec<f64> {
    (1..=100).map(|k| k as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub uplift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedPoint {
    pub p: f64,
    pub uplift: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpliftCurve {
    pub points: Vec<CurvePoint>,
    pub method: QuantileMethod,
    pub smoothed: Option<Vec<SmoothedPoint>>,
    /// True when the values in use (smoothed if present, else raw) are non-decreasing.
    pub monotone: bool,
}

fn non_decreasing(values: impl Iterator<Item = f64>) -> bool {
    let mut prev = f64::NEG_INFINITY;
    for v in values {
        if v < prev {
            return false;
        }
        prev = v;
    }
    true
}

impl UpliftCurve {
    /// `(p, uplift)` pairs in use: smoothed when present, else raw.
    pub fn effective(&self) -> Vec<(f64, f64)> {
        match &self.smoothed {
            Some(s) => s.iter().map(|q| (q.p, q.uplift)).collect(),
            None => self.points.iter().map(|q| (q.p, q.uplift)).collect(),
        }
    }

    pub fn check_monotone(&self) -> bool {
        non_decreasing(self.effective().into_iter().map(|(_, u)| u))
    }

    /// Effective uplift at `p`, linearly interpolated between grid points.
    /// `None` outside the grid.
    pub fn value_at(&self, p: f64) -> Option<f64> {
        let pts = self.effective();
        const EPS: f64 = 1e-9;
        let first = pts.first()?;
        let last = pts.last()?;
        if p < first.0 - EPS || p > last.0 + EPS {
            return None;
        }
        if let Some(&(_, u)) = pts.iter().find(|(q, _)| (q - p).abs() <= EPS) {
            return Some(u);
        }
        let i = pts.partition_point(|(q, _)| *q < p);
        let (p0, u0) = pts[i - 1];
        let (p1, u1) = pts[i];
        Some(u0 + (p - p0) / (p1 - p0) * (u1 - u0))
    }

    /// Adds a loess smooth of the raw points (with 95% interval).
    pub fn smooth(mut self, span: f64, degree: usize) -> Result<Self, ClassError> {
        let xy: Vec<(f64, f64)> = self.points.iter().map(|q| (q.p, q.uplift)).collect();
        let fit = loess_smooth(&xy, span, degree)?;
        self.smoothed = Some(
            fit.into_iter()
                .map(|f| SmoothedPoint { p: f.x, uplift: f.fit, ci_low: f.ci_low, ci_high: f.ci_high })
                .collect(),
        );
        self.monotone = self.check_monotone();
        Ok(self)
    }
}

pub fn uplift_curve(class: &ReferenceClass, grid: &[f64], method: QuantileMethod) -> Result<UpliftCurve, ClassError> {
    if class.is_empty() {
        return Err(ClassError::Empty);
    }
    if grid.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) || !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(ClassError::InvalidGrid);
    }
    let points = grid
        .iter()
        .map(|&p| Ok(CurvePoint { p, uplift: uplift(class, p, method)? }))
        .collect::<Result<Vec<_>, ClassError>>()?;
    Ok(UpliftCurve { points, method, smoothed: None, monotone: true })
}

/// Projects the smoothed uplifts onto non-decreasing values. Interval bounds
/// move with their point so the band stays around the adjusted value.
pub fn isotonic_adjust(curve: &UpliftCurve) -> Result<UpliftCurve, ClassError> {
    let smoothed = curve.smoothed.as_ref().ok_or(ClassError::NotSmoothed)?;
    let raw: Vec<f64> = smoothed.iter().map(|s| s.uplift).collect();
    let adjusted = pool_adjacent_violators(&raw);
    let smoothed = smoothed
        .iter()
        .zip(adjusted)
        .map(|(s, u)| {
            let shift = u - s.uplift;
            SmoothedPoint { p: s.p, uplift: u, ci_low: s.ci_low + shift, ci_high: s.ci_high + shift }
        })
        .collect();
    Ok(UpliftCurve { points: curve.points.clone(), method: curve.method, smoothed: Some(smoothed), monotone: true })
}

#[derive(Debug, Error)]
pub enum CurveIoError {
    #[error("curve file, line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Writes `p,uplift_raw,uplift_smoothed,ci_low,ci_high`.
pub fn write_curve_csv<W: Write>(curve: &UpliftCurve, sink: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["p", "uplift_raw", "uplift_smoothed", "ci_low", "ci_high"])?;
    for (i, pt) in curve.points.iter().enumerate() {
        let s = curve.smoothed.as_ref().and_then(|s| s.get(i));
        w.write_record([
            format!("{:.2}", pt.p),
            format!("{:.6}", pt.uplift),
            fmt_opt(s.map(|s| s.uplift)),
            fmt_opt(s.map(|s| s.ci_low)),
            fmt_opt(s.map(|s| s.ci_high)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct CurveRow {
    p: f64,
    uplift_raw: f64,
    uplift_smoothed: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
}

/// Reads a curve written by [`write_curve_csv`]. The monotone flag reflects
/// the values read, so a hand-edited curve may come back non-monotone.
pub fn read_curve_csv<R: Read>(source: R, method: QuantileMethod) -> Result<UpliftCurve, CurveIoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut points = Vec::new();
    let mut smoothed = Vec::new();
    let mut smoothed_rows = 0usize;
    for row in reader.deserialize() {
        let row: CurveRow = row?;
        let line = points.len() as u64 + 2;
        if !(row.p > 0.0 && row.p <= 1.0) || points.last().is_some_and(|q: &CurvePoint| q.p >= row.p) {
            return Err(CurveIoError::Malformed {
                line,
                message: format!("probability {} out of order or range", row.p),
            });
        }
        points.push(CurvePoint { p: row.p, uplift: row.uplift_raw });
        if let Some(u) = row.uplift_smoothed {
            smoothed_rows += 1;
            smoothed.push(SmoothedPoint {
                p: row.p,
                uplift: u,
                ci_low: row.ci_low.unwrap_or(u),
                ci_high: row.ci_high.unwrap_or(u),
            });
        }
    }
    if smoothed_rows != 0 && smoothed_rows != points.len() {
        return Err(CurveIoError::Malformed {
            line: 0,
            message: "smoothed column must be filled on every row or none".to_string(),
        });
    }
    let mut curve = UpliftCurve { points, method, smoothed: (smoothed_rows > 0).then_some(smoothed), monotone: false };
    curve.monotone = curve.check_monotone();
    Ok(curve)
}
