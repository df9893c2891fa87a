//! Descriptive statistics, two-sample tests and phase durations used to
//! compare a reference class with an external benchmark.

mod fisher;
mod rank_test;

use std::io::Write;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

pub use fisher::proportion_test;
pub use rank_test::{mann_whitney_u, midranks, MannWhitney, RankTestMethod, EXACT_MAX_N};

use crate::registry::{BenchmarkConstants, Metric, ProjectRecord, Stage};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchmarkError {
    #[error("descriptive statistics of an empty sample")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 when `n == 1`.
    pub sd: f64,
    pub sd_defined: bool,
    /// Share of strictly positive values.
    pub overrun_frequency: f64,
    pub overruns: usize,
}

pub fn descriptive_stats(values: &[f64]) -> Result<DescriptiveStats, BenchmarkError> {
    let n = values.len();
    if n == 0 {
        return Err(BenchmarkError::EmptyInput);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd_defined = n >= 2;
    let sd =
        if sd_defined { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    let overruns = values.iter().filter(|&&v| v > 0.0).count();
    Ok(DescriptiveStats { n, mean, sd, sd_defined, overrun_frequency: overruns as f64 / n as f64, overruns })
}

/// Overruns of one stage and metric.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSample {
    pub stage: Stage,
    pub metric: Metric,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    MeanOverrun,
    OverrunFrequency,
    OverrunSd,
    MeanDurationYears,
}

/// One cell of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonCell {
    pub metric: Option<Metric>,
    pub measure: Measure,
    pub stage: Stage,
    pub value: f64,
    pub benchmark: Option<f64>,
    /// Only Category C estimates share the benchmark's decision-to-build baseline.
    pub comparable: bool,
    pub p_value: Option<f64>,
    /// Test that produced `p_value`, or why none was computed.
    pub test: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageStats {
    pub stage: Stage,
    pub metric: Metric,
    pub stats: DescriptiveStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub benchmark_label: Option<String>,
    pub benchmark_n: Option<u32>,
    pub stages: Vec<StageStats>,
    pub cells: Vec<ComparisonCell>,
    pub notes: Vec<String>,
}

const TEST_MEAN: &str = "mann-whitney u (two-sided)";
const TEST_FREQ: &str = "fisher exact (two-sided)";
const NO_SAMPLE: &str = "unavailable: benchmark has summary constants only";
const NO_TEST: &str = "none";

fn benchmark_value(c: &BenchmarkConstants, metric: Metric, measure: Measure) -> f64 {
    match (metric, measure) {
        (Metric::Cost, Measure::MeanOverrun) => c.mean_cost_overrun,
        (Metric::Cost, Measure::OverrunFrequency) => c.cost_overrun_frequency,
        (Metric::Cost, Measure::OverrunSd) => c.cost_overrun_sd,
        (Metric::Schedule, Measure::MeanOverrun) => c.mean_schedule_overrun,
        (Metric::Schedule, Measure::OverrunFrequency) => c.schedule_overrun_frequency,
        (Metric::Schedule, Measure::OverrunSd) => c.schedule_overrun_sd,
        (_, Measure::MeanDurationYears) => c.mean_duration_years,
    }
}

fn raw_sample<'a>(c: Option<&'a BenchmarkConstants>, metric: Metric) -> Option<&'a [f64]> {
    let s = c?.samples.as_ref()?;
    let v = match metric {
        Metric::Cost => &s.cost,
        Metric::Schedule => &s.schedule,
    };
    (!v.is_empty()).then_some(v.as_slice())
}

/// Builds the stage-by-measure comparison. Significance tests are run only
/// where the benchmark ships raw samples; `durations_years` are the total
/// project durations from Category C upgrade to completion.
pub fn benchmark_report(
    samples: &[StageSample],
    constants: Option<&BenchmarkConstants>,
    durations_years: Option<&[f64]>,
) -> BenchmarkReport {
    let mut stages = Vec::new();
    let mut cells = Vec::new();

    for sample in samples {
        let Ok(stats) = descriptive_stats(&sample.values) else {
            continue;
        };
        stages.push(StageStats { stage: sample.stage, metric: sample.metric, stats });
        let raw = raw_sample(constants, sample.metric);
        let comparable = sample.stage == Stage::C;

        for measure in [Measure::MeanOverrun, Measure::OverrunFrequency, Measure::OverrunSd] {
            let value = match measure {
                Measure::MeanOverrun => stats.mean,
                Measure::OverrunFrequency => stats.overrun_frequency,
                _ => stats.sd,
            };
            let (p_value, test) = match (measure, raw, constants) {
                (_, _, None) => (None, NO_TEST.to_string()),
                (Measure::MeanOverrun, Some(bm), _) => {
                    (Some(mann_whitney_u(&sample.values, bm).p_value), TEST_MEAN.to_string())
                }
                (Measure::OverrunFrequency, Some(bm), _) => {
                    let k_bm = bm.iter().filter(|&&v| v > 0.0).count() as u64;
                    let p = proportion_test(stats.overruns as u64, stats.n as u64, k_bm, bm.len() as u64);
                    (Some(p), TEST_FREQ.to_string())
                }
                (Measure::OverrunSd | Measure::MeanDurationYears, _, _) => (None, NO_TEST.to_string()),
                (_, None, Some(_)) => (None, NO_SAMPLE.to_string()),
            };
            cells.push(ComparisonCell {
                metric: Some(sample.metric),
                measure,
                stage: sample.stage,
                value,
                benchmark: constants.map(|c| benchmark_value(c, sample.metric, measure)),
                comparable,
                p_value,
                test,
            });
        }
    }

    if let Some(d) = durations_years.filter(|d| !d.is_empty()) {
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let raw =
            constants.and_then(|c| c.samples.as_ref()).map(|s| s.duration_years.as_slice()).filter(|s| !s.is_empty());
        let (p_value, test) = match (raw, constants) {
            (_, None) => (None, NO_TEST.to_string()),
            (Some(bm), _) => (Some(mann_whitney_u(d, bm).p_value), TEST_MEAN.to_string()),
            (None, Some(_)) => (None, NO_SAMPLE.to_string()),
        };
        cells.push(ComparisonCell {
            metric: None,
            measure: Measure::MeanDurationYears,
            stage: Stage::C,
            value: mean,
            benchmark: constants.map(|c| c.mean_duration_years),
            comparable: true,
            p_value,
            test,
        });
    }

    let mut notes = vec!["Only Category C estimates are directly comparable to the benchmark baseline.".to_string()];
    if constants.is_some_and(|c| c.samples.is_none()) {
        notes.push("Benchmark supplies summary constants only; p-values are unavailable.".to_string());
    }
    if constants.is_none() {
        notes.push("No benchmark supplied; reference class statistics only.".to_string());
    }

    BenchmarkReport {
        benchmark_label: constants.map(|c| c.label.clone()),
        benchmark_n: constants.map(|c| c.n_projects),
        stages,
        cells,
        notes,
    }
}

fn measure_key(metric: Option<Metric>, measure: Measure) -> String {
    match (metric, measure) {
        (_, Measure::MeanDurationYears) => "mean_duration_years".to_string(),
        (Some(m), Measure::MeanOverrun) => format!("mean_{m}_overrun"),
        (Some(m), Measure::OverrunFrequency) => format!("{m}_overrun_frequency"),
        (Some(m), Measure::OverrunSd) => format!("{m}_overrun_sd"),
        (None, _) => "unknown".to_string(),
    }
}

/// Writes the comparison in table layout: one row per measure, the benchmark
/// value, then value and p-value per stage.
pub fn write_report_csv<W: Write>(report: &BenchmarkReport, sink: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["measure", "benchmark", "cat_c", "cat_c_p", "cat_b", "cat_b_p", "cat_a", "cat_a_p", "test"])?;
    let rows = Metric::ALL
        .iter()
        .flat_map(|&m| [Measure::MeanOverrun, Measure::OverrunFrequency, Measure::OverrunSd].map(|x| (Some(m), x)))
        .chain([(None, Measure::MeanDurationYears)]);
    for (metric, measure) in rows {
        let row_cells: Vec<&ComparisonCell> = report
            .cells
            .iter()
            .filter(|c| c.measure == measure && (measure == Measure::MeanDurationYears || c.metric == metric))
            .collect();
        if row_cells.is_empty() {
            continue;
        }
        let mut record =
            vec![measure_key(metric, measure), row_cells[0].benchmark.map(|b| format!("{b:.4}")).unwrap_or_default()];
        for stage in Stage::ALL {
            let cell = row_cells.iter().find(|c| c.stage == stage);
            record.push(cell.map(|c| format!("{:.4}", c.value)).unwrap_or_default());
            record.push(cell.and_then(|c| c.p_value).map(|p| format!("{p:.4}")).unwrap_or_default());
        }
        let mut tests: Vec<&str> = row_cells.iter().map(|c| c.test.as_str()).collect();
        tests.dedup();
        record.push(tests.join("; "));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Durations (years) of one project's phases from Category C upgrade to completion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseBreakdown {
    pub project_id: String,
    pub c_to_b: Option<f64>,
    pub b_to_a: Option<f64>,
    pub a_to_construction: Option<f64>,
    pub construction: Option<f64>,
    /// Consecutive known milestones; their durations sum to `total_years`.
    pub segments: Vec<PhaseSegment>,
    pub total_years: f64,
    pub preconstruction_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSegment {
    pub from: String,
    pub to: String,
    pub years: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub phases: Vec<PhaseBreakdown>,
    /// Records left out, with the reason.
    pub skipped: Vec<(String, String)>,
    pub mean_total_years: Option<f64>,
    pub mean_preconstruction_share: Option<f64>,
}

const DAYS_PER_YEAR: f64 = 365.25;

fn years_between(a: NaiveDate, b: NaiveDate) -> f64 {
    (b - a).num_days() as f64 / DAYS_PER_YEAR
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn phase_breakdown(records: &[ProjectRecord]) -> PhaseReport {
    let mut phases = Vec::new();
    let mut skipped = Vec::new();

    for r in records {
        let Some(c) = r.stage(Stage::C).upgrade_date else {
            skipped.push((r.id.clone(), "no Category C upgrade date".to_string()));
            continue;
        };
        let b = r.stage(Stage::B).upgrade_date;
        let a = r.stage(Stage::A).upgrade_date;
        let start = r.construction_start;
        let end = r.actual_completion;

        let milestones: Vec<(&str, NaiveDate)> =
            [("C", Some(c)), ("B", b), ("A", a), ("construction start", start), ("completion", Some(end))]
                .into_iter()
                .filter_map(|(name, d)| d.map(|d| (name, d)))
                .collect();
        if milestones.windows(2).any(|w| w[1].1 < w[0].1) {
            skipped.push((r.id.clone(), "milestone dates out of order".to_string()));
            continue;
        }
        let total_years = years_between(c, end);
        if total_years <= 0.0 {
            skipped.push((r.id.clone(), "completion not after Category C upgrade".to_string()));
            continue;
        }
        let segments = milestones
            .windows(2)
            .map(|w| PhaseSegment {
                from: w[0].0.to_string(),
                to: w[1].0.to_string(),
                years: years_between(w[0].1, w[1].1),
            })
            .collect();
        let span = |x: Option<NaiveDate>, y: Option<NaiveDate>| Some(years_between(x?, y?));
        phases.push(PhaseBreakdown {
            project_id: r.id.clone(),
            c_to_b: span(Some(c), b),
            b_to_a: span(b, a),
            a_to_construction: span(a, start),
            construction: span(start, Some(end)),
            segments,
            total_years,
            preconstruction_share: start.map(|s| years_between(c, s) / total_years),
        });
    }

    let totals: Vec<f64> = phases.iter().map(|p| p.total_years).collect();
    let shares: Vec<f64> = phases.iter().filter_map(|p| p.preconstruction_share).collect();
    PhaseReport { mean_total_years: mean(&totals), mean_preconstruction_share: mean(&shares), phases, skipped }
}
