//! Constant-price conversion and overrun computation.
//!
//! Nominal outturn costs are spread over construction years (actual
//! disbursements when recorded, else a standard disbursement profile), moved
//! to the estimate's price-level year with the deflator series and compared
//! with the base estimate excluding contingencies.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use thiserror::Error;

use crate::registry::{DeflatorSeries, Metric, Money, ProjectRecord, RegistryError, Stage};

/// Standard disbursement profiles in whole percent of outturn per project
/// year, for construction durations of 1 to 10 years. Rows 4 and 6 sum to
/// 101 and row 10 to 99; they are kept as published.
const PUBLISHED_PROFILES: [&[u32]; 10] = [
    &[100],
    &[49, 51],
    &[17, 65, 18],
    &[9, 40, 42, 10],
    &[6, 22, 43, 23, 6],
    &[4, 13, 32, 33, 14, 5],
    &[3, 8, 21, 32, 23, 9, 4],
    &[3, 4, 10, 20, 25, 20, 11, 7],
    &[3, 4, 10, 20, 25, 20, 11, 4, 3],
    &[2, 3, 7, 14, 21, 22, 15, 8, 4, 3],
];

pub const MAX_PROFILE_YEARS: u32 = 10;

/// ERA (risk-based contingency estimating) was introduced in mid-1993.
pub fn default_era_cutoff() -> NaiveDate {
    NaiveDate::from_ymd_opt(1993, 7, 1).expect("valid date")
}

#[derive(Debug, Error)]
pub enum NormalizationError {
    #[error("no disbursement profile for a {0}-year project (expected 1 to 10)")]
    ProfileDuration(u32),
    #[error("disbursement profile has no positive share")]
    ZeroProfile,
    #[error("estimate must be positive, got {0}")]
    NonPositiveEstimate(f64),
    #[error("actual cost must be positive, got {0}")]
    NonPositiveActual(f64),
    #[error("planned duration from {reference} to {planned} is not positive")]
    NonPositivePlannedDuration { reference: NaiveDate, planned: NaiveDate },
    #[error("actual duration from {reference} to {actual} is not positive")]
    NonPositiveActualDuration { reference: NaiveDate, actual: NaiveDate },
    #[error("project `{id}`: {source}")]
    Project {
        id: String,
        #[source]
        source: Box<NormalizationError>,
    },
    #[error(transparent)]
    Deflator(#[from] RegistryError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisbursementProfile {
    shares: Vec<f64>,
}

impl DisbursementProfile {
    pub fn new(shares: Vec<f64>) -> Self {
        DisbursementProfile { shares }
    }

    pub fn duration_years(&self) -> u32 {
        self.shares.len() as u32
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }
}

/// Published profile row in whole percent, exactly as tabulated.
pub fn published_percentages(duration_years: u32) -> Result<&'static [u32], NormalizationError> {
    if !(1..=MAX_PROFILE_YEARS).contains(&duration_years) {
        return Err(NormalizationError::ProfileDuration(duration_years));
    }
    Ok(PUBLISHED_PROFILES[duration_years as usize - 1])
}

/// Published profile row as fractions, not renormalized.
pub fn disbursement_profile(duration_years: u32) -> Result<DisbursementProfile, NormalizationError> {
    let row = published_percentages(duration_years)?;
    Ok(DisbursementProfile::new(row.iter().map(|&p| f64::from(p) / 100.0).collect()))
}

pub fn renormalize_profile(profile: &DisbursementProfile) -> Result<DisbursementProfile, NormalizationError> {
    let total: f64 = profile.shares.iter().sum();
    if !(total > 0.0) || profile.shares.iter().any(|s| *s < 0.0) {
        return Err(NormalizationError::ZeroProfile);
    }
    Ok(DisbursementProfile::new(profile.shares.iter().map(|s| s / total).collect()))
}

/// Spreads a nominal total over consecutive years starting at `first_year`.
/// The profile is expected to be renormalized.
pub fn spread_outturn(total_nominal: f64, first_year: i32, profile: &DisbursementProfile) -> BTreeMap<i32, f64> {
    profile.shares.iter().enumerate().map(|(k, share)| (first_year + k as i32, total_nominal * share)).collect()
}

/// Sum of yearly nominal amounts expressed in `target_year` prices.
pub fn to_constant_prices(
    yearly_nominal: &[(i32, f64)],
    deflators: &DeflatorSeries,
    target_year: i32,
) -> Result<f64, RegistryError> {
    let target = deflators.index(target_year)?;
    yearly_nominal.iter().try_fold(0.0, |acc, &(year, amount)| Ok(acc + amount * target / deflators.index(year)?))
}

pub fn cost_overrun(actual_constant: f64, base_estimate_constant: f64) -> Result<f64, NormalizationError> {
    if !(base_estimate_constant > 0.0) {
        return Err(NormalizationError::NonPositiveEstimate(base_estimate_constant));
    }
    if !(actual_constant > 0.0) {
        return Err(NormalizationError::NonPositiveActual(actual_constant));
    }
    Ok((actual_constant - base_estimate_constant) / base_estimate_constant)
}

/// Relative overrun of the time to completion, both durations counted in
/// calendar days from `reference_date`.
pub fn schedule_overrun(
    reference_date: NaiveDate,
    planned_completion: NaiveDate,
    actual_completion: NaiveDate,
) -> Result<f64, NormalizationError> {
    let planned = (planned_completion - reference_date).num_days();
    let actual = (actual_completion - reference_date).num_days();
    if planned <= 0 {
        return Err(NormalizationError::NonPositivePlannedDuration {
            reference: reference_date,
            planned: planned_completion,
        });
    }
    if actual <= 0 {
        return Err(NormalizationError::NonPositiveActualDuration {
            reference: reference_date,
            actual: actual_completion,
        });
    }
    Ok((actual - planned) as f64 / planned as f64)
}

/// One relative overrun of a project at an approval stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverrunObservation {
    pub project_id: String,
    pub stage: Stage,
    pub metric: Metric,
    pub value: f64,
    /// Upgrade date of the stage the estimate belongs to.
    pub reference_date: NaiveDate,
    pub pre_era: bool,
    pub outturn_nominal: Money,
}

/// Year in which money is compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriceBasis {
    /// Price-level year of the stage estimate.
    #[default]
    EstimateYear,
    /// Year of actual completion.
    OutturnYear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeriveOptions {
    pub era_cutoff: NaiveDate,
    pub price_basis: PriceBasis,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions { era_cutoff: default_era_cutoff(), price_basis: PriceBasis::EstimateYear }
    }
}

const DAYS_PER_YEAR: f64 = 365.25;

/// Construction duration in whole years, clamped to the profile table.
pub fn profile_years(start: NaiveDate, completion: NaiveDate) -> u32 {
    let years = (completion - start).num_days() as f64 / DAYS_PER_YEAR;
    (years.round().max(1.0) as u32).min(MAX_PROFILE_YEARS)
}

/// Nominal outturn by year: actual disbursements when recorded, otherwise the
/// outturn spread with the standard profile for the construction duration.
pub fn yearly_outturn(record: &ProjectRecord) -> Option<Vec<(i32, f64)>> {
    if let Some(disb) = &record.disbursements {
        return Some(disb.iter().map(|(&y, m)| (y, m.as_f64())).collect());
    }
    let start = record.spend_start()?;
    let years = profile_years(start, record.actual_completion);
    let profile = renormalize_profile(&disbursement_profile(years).ok()?).ok()?;
    Some(spread_outturn(record.outturn_nominal.as_f64(), start.year(), &profile).into_iter().collect())
}

fn era_reference(record: &ProjectRecord) -> Option<NaiveDate> {
    record
        .stage(Stage::C)
        .upgrade_date
        .or_else(|| Stage::ALL.iter().filter_map(|&s| record.stage(s).upgrade_date).min())
}

/// Whether the project entered the pipeline (Category C upgrade, else its
/// earliest upgrade) before `era_cutoff`.
pub fn is_pre_era(record: &ProjectRecord, era_cutoff: NaiveDate) -> bool {
    era_reference(record).is_some_and(|d| d < era_cutoff)
}

/// Cost and schedule overruns for every stage of `record` with enough data.
pub fn derive_observations(
    record: &ProjectRecord,
    deflators: &DeflatorSeries,
    options: &DeriveOptions,
) -> Result<Vec<OverrunObservation>, NormalizationError> {
    let wrap = |e: NormalizationError| NormalizationError::Project { id: record.id.clone(), source: Box::new(e) };
    let pre_era = is_pre_era(record, options.era_cutoff);
    let yearly = yearly_outturn(record);
    let mut out = Vec::new();

    for stage in Stage::ALL {
        let est = record.stage(stage);
        let Some(reference_date) = est.upgrade_date else {
            continue;
        };
        let observation = |metric, value| OverrunObservation {
            project_id: record.id.clone(),
            stage,
            metric,
            value,
            reference_date,
            pre_era,
            outturn_nominal: record.outturn_nominal,
        };

        if record.has_cost_data(stage) {
            if let (Some(base), Some(yearly)) = (est.base_estimate, yearly.as_ref()) {
                let price_year = est.price_level_year.unwrap_or(reference_date.year());
                let target = match options.price_basis {
                    PriceBasis::EstimateYear => price_year,
                    PriceBasis::OutturnYear => record.actual_completion.year(),
                };
                let actual = to_constant_prices(yearly, deflators, target).map_err(|e| wrap(e.into()))?;
                let estimate = to_constant_prices(&[(price_year, base.as_f64())], deflators, target)
                    .map_err(|e| wrap(e.into()))?;
                out.push(observation(Metric::Cost, cost_overrun(actual, estimate).map_err(wrap)?));
            }
        }

        if record.has_schedule_data(stage) {
            if let Some(planned) = est.planned_completion {
                let value = schedule_overrun(reference_date, planned, record.actual_completion).map_err(wrap)?;
                out.push(observation(Metric::Schedule, value));
            }
        }
    }
    Ok(out)
}

/// Observations of every record, in record order.
pub fn derive_all(
    records: &[ProjectRecord],
    deflators: &DeflatorSeries,
    options: &DeriveOptions,
) -> Result<Vec<OverrunObservation>, NormalizationError> {
    let mut out = Vec::new();
    for r in records {
        out.extend(derive_observations(r, deflators, options)?);
    }
    Ok(out)
}
