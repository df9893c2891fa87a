//! Project records, deflator series and benchmark constants.
//!
//! Files are the source of truth: `projects.csv` holds one wide row per
//! completed project, `deflators.csv` a contiguous year/index series and
//! `benchmark.json` the published summary statistics of an external sample.

mod benchmark;
mod deflator;
mod proforma;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use benchmark::{parse_benchmark_constants, BenchmarkConstants, RawBenchmarkSamples};
pub use deflator::{parse_deflator_series, DeflatorSeries};
pub use proforma::{parse_project_records, parse_project_records_unchecked, write_project_records, PROFORMA_COLUMNS};

/// Relative tolerance used for the estimate and disbursement consistency checks.
pub const CONSISTENCY_TOLERANCE: f64 = 0.005;

/// Approval category at which an estimate was logged. `C < B < A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    C,
    B,
    A,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::C, Stage::B, Stage::A];

    pub fn index(self) -> usize {
        match self {
            Stage::C => 0,
            Stage::B => 1,
            Stage::A => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::C => "C",
            Stage::B => "B",
            Stage::A => "A",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "C" | "c" => Ok(Stage::C),
            "B" | "b" => Ok(Stage::B),
            "A" | "a" => Ok(Stage::A),
            other => Err(format!("unknown stage `{other}` (expected C, B or A)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cost,
    Schedule,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Cost, Metric::Schedule];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Cost => "cost",
            Metric::Schedule => "schedule",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cost" => Ok(Metric::Cost),
            "schedule" => Ok(Metric::Schedule),
            other => Err(format!("unknown metric `{other}` (expected cost or schedule)")),
        }
    }
}

/// Whole HKD thousands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Money(pub i64);

impl Money {
    pub fn thousands(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Everything logged when a project was upgraded to one approval stage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageEstimate {
    pub upgrade_date: Option<NaiveDate>,
    pub base_estimate: Option<Money>,
    pub contingency: Option<Money>,
    pub approved_estimate: Option<Money>,
    pub planned_completion: Option<NaiveDate>,
    /// Price-level year of the money fields above.
    pub price_level_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectRecord {
    pub id: String,
    pub stages: [StageEstimate; 3],
    pub construction_start: Option<NaiveDate>,
    pub actual_completion: NaiveDate,
    /// Final cost in year-of-expenditure terms.
    pub outturn_nominal: Money,
    /// Actual yearly disbursements in nominal terms, when retrievable.
    pub disbursements: Option<BTreeMap<i32, Money>>,
}

impl ProjectRecord {
    pub fn new(id: impl Into<String>, actual_completion: NaiveDate, outturn_nominal: Money) -> Self {
        ProjectRecord {
            id: id.into(),
            stages: Default::default(),
            construction_start: None,
            actual_completion,
            outturn_nominal,
            disbursements: None,
        }
    }

    pub fn stage(&self, stage: Stage) -> &StageEstimate {
        &self.stages[stage.index()]
    }

    pub fn stage_mut(&mut self, stage: Stage) -> &mut StageEstimate {
        &mut self.stages[stage.index()]
    }

    /// Year in which construction spending is assumed to start: the
    /// construction start if known, else the Category A upgrade.
    pub fn spend_start(&self) -> Option<NaiveDate> {
        self.construction_start.or(self.stage(Stage::A).upgrade_date)
    }

    /// Whether a cost overrun can be computed at `stage`.
    pub fn has_cost_data(&self, stage: Stage) -> bool {
        let s = self.stage(stage);
        s.upgrade_date.is_some()
            && matches!(s.base_estimate, Some(m) if m.0 > 0)
            && self.outturn_nominal.0 > 0
            && (self.disbursements.is_some() || self.spend_start().is_some())
    }

    /// Whether a schedule overrun can be computed at `stage`.
    pub fn has_schedule_data(&self, stage: Stage) -> bool {
        let s = self.stage(stage);
        match (s.upgrade_date, s.planned_completion) {
            (Some(from), Some(planned)) => planned > from && self.actual_completion > from,
            _ => false,
        }
    }

    pub fn has_data(&self, stage: Stage, metric: Metric) -> bool {
        match metric {
            Metric::Cost => self.has_cost_data(stage),
            Metric::Schedule => self.has_schedule_data(stage),
        }
    }
}

/// One broken record invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    StageOrder { earlier: Stage, later: Stage },
    EstimateMismatch { stage: Stage, base: i64, contingency: i64, approved: i64 },
    CompletionBeforeUpgrade { stage: Stage },
    NonPositiveOutturn { outturn: i64 },
    DisbursementMismatch { sum: i64, outturn: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StageOrder { earlier, later } => {
                write!(f, "Category {later} upgrade date precedes Category {earlier} upgrade date")
            }
            Violation::EstimateMismatch { stage, base, contingency, approved } => write!(
                f,
                "Category {stage}: approved estimate {approved} differs from base {base} + contingency {contingency}"
            ),
            Violation::CompletionBeforeUpgrade { stage } => {
                write!(f, "actual completion precedes Category {stage} upgrade date")
            }
            Violation::NonPositiveOutturn { outturn } => write!(f, "outturn {outturn} is not positive"),
            Violation::DisbursementMismatch { sum, outturn } => {
                write!(f, "disbursements sum to {sum} but outturn is {outturn}")
            }
        }
    }
}

fn relative_mismatch(actual: i64, expected: i64) -> bool {
    let scale = (expected.abs()).max(actual.abs()) as f64;
    if scale == 0.0 {
        return false;
    }
    ((actual - expected) as f64).abs() > CONSISTENCY_TOLERANCE * scale
}

/// Checks every record invariant; an empty report means the record is consistent.
pub fn validate_record(record: &ProjectRecord) -> Vec<Violation> {
    let mut report = Vec::new();

    let dated: Vec<(Stage, NaiveDate)> =
        Stage::ALL.iter().filter_map(|&s| record.stage(s).upgrade_date.map(|d| (s, d))).collect();
    for (i, &(earlier, d_earlier)) in dated.iter().enumerate() {
        for &(later, d_later) in &dated[i + 1..] {
            if d_later < d_earlier {
                report.push(Violation::StageOrder { earlier, later });
            }
        }
    }

    for stage in Stage::ALL {
        let s = record.stage(stage);
        if let (Some(base), Some(cont), Some(approved)) = (s.base_estimate, s.contingency, s.approved_estimate) {
            if relative_mismatch(approved.0, base.0 + cont.0) {
                report.push(Violation::EstimateMismatch {
                    stage,
                    base: base.0,
                    contingency: cont.0,
                    approved: approved.0,
                });
            }
        }
    }

    for &(stage, date) in &dated {
        if record.actual_completion < date {
            report.push(Violation::CompletionBeforeUpgrade { stage });
        }
    }

    if record.outturn_nominal.0 <= 0 {
        report.push(Violation::NonPositiveOutturn { outturn: record.outturn_nominal.0 });
    } else if let Some(disb) = &record.disbursements {
        let sum: i64 = disb.values().map(|m| m.0).sum();
        if relative_mismatch(sum, record.outturn_nominal.0) {
            report.push(Violation::DisbursementMismatch { sum, outturn: record.outturn_nominal.0 });
        }
    }

    report
}

/// Number of records with a computable overrun, per stage and metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StageAvailability {
    pub cost: [usize; 3],
    pub schedule: [usize; 3],
}

impl StageAvailability {
    pub fn get(&self, stage: Stage, metric: Metric) -> usize {
        match metric {
            Metric::Cost => self.cost[stage.index()],
            Metric::Schedule => self.schedule[stage.index()],
        }
    }
}

pub fn stage_availability(records: &[ProjectRecord]) -> StageAvailability {
    let mut out = StageAvailability::default();
    for record in records {
        for stage in Stage::ALL {
            if record.has_cost_data(stage) {
                out.cost[stage.index()] += 1;
            }
            if record.has_schedule_data(stage) {
                out.schedule[stage.index()] += 1;
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("line {line}, column `{column}`: {message}")]
    Malformed { line: u64, column: String, message: String },
    #[error("header is missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: duplicate project id `{id}`")]
    DuplicateId { line: u64, id: String },
    #[error("line {line}: project `{id}` has no actual completion date")]
    Undated { line: u64, id: String },
    #[error("line {line}: project `{id}`: {violation}")]
    Inconsistent { line: u64, id: String, violation: Violation },
    #[error("deflator series has a gap: year {missing} is missing")]
    DeflatorGap { missing: i32 },
    #[error("deflator year {0} appears more than once")]
    DeflatorDuplicate(i32),
    #[error("deflator index for {year} is not positive ({index})")]
    NonPositiveIndex { year: i32, index: f64 },
    #[error("deflator series is empty")]
    EmptyDeflators,
    #[error("deflator year {year} is outside the covered range {first}-{last}")]
    YearOutOfRange { year: i32, first: i32, last: i32 },
    #[error("benchmark `{label}`: {message}")]
    InvalidBenchmark { label: String, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
