use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rcf_core::benchmarking::{benchmark_report, phase_breakdown, write_report_csv, StageSample};
use rcf_core::contingency::{tier_allocation, ContingencyError, TierScheme};
use rcf_core::normalization::{derive_all, is_pre_era, DeriveOptions, OverrunObservation};
use rcf_core::reference_class::{
    build_class, isotonic_adjust, read_curve_csv, trend_by_date, uplift, uplift_curve, write_curve_csv, ClassError,
    ClassFilter, QuantileMethod, ReferenceClass, UpliftCurve,
};
use rcf_core::registry::{
    parse_benchmark_constants, parse_deflator_series, parse_project_records, parse_project_records_unchecked,
    stage_availability, validate_record, BenchmarkConstants, DeflatorSeries,
};
use rcf_core::validation::{leave_one_out, loov_summary, write_loov_csv};
use rcf_core::{Metric, Money, ProjectRecord, Stage};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::{svg, Command};

pub fn dispatch<W: Write>(command: &Command, config: &RunConfig, stdout: &mut W) -> CliResult<()> {
    match command {
        Command::Overruns { all, trend } => overruns(config, *all, *trend, stdout),
        Command::Uplift { both } => uplift_table(config, *both, stdout),
        Command::Validate => validate(config, stdout),
        Command::Benchmark => benchmark(config, stdout),
        Command::Curve { no_adjust } => curve(config, *no_adjust, stdout),
        Command::Tiers { base, scheme, curve, no_adjust } => {
            tiers(config, Money(*base), scheme, curve.as_deref(), *no_adjust, stdout)
        }
        Command::Check => check(config, stdout),
    }
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    path.as_deref().ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn load_records(config: &RunConfig) -> CliResult<Vec<ProjectRecord>> {
    let path = required(&config.projects, "projects")?;
    Ok(parse_project_records(open(path)?)?)
}

fn load_deflators(config: &RunConfig) -> CliResult<DeflatorSeries> {
    let path = required(&config.deflators, "deflators")?;
    Ok(parse_deflator_series(open(path)?, config.deflator_base_year)?)
}

/// First entry of the benchmark file, if one was given.
fn load_benchmark(config: &RunConfig) -> CliResult<Option<BenchmarkConstants>> {
    match &config.benchmark {
        None => Ok(None),
        Some(path) => Ok(parse_benchmark_constants(open(path)?)?.into_iter().next()),
    }
}

fn observations(config: &RunConfig, records: &[ProjectRecord]) -> CliResult<Vec<OverrunObservation>> {
    let deflators = load_deflators(config)?;
    let options = DeriveOptions { era_cutoff: config.era_cutoff, ..Default::default() };
    Ok(derive_all(records, &deflators, &options)?)
}

fn filter(config: &RunConfig, stage: Stage, metric: Metric) -> ClassFilter {
    ClassFilter { stage, metric, min_outturn: config.min_outturn, exclude_pre_era: true }
}

fn class_for(config: &RunConfig) -> CliResult<ReferenceClass> {
    let records = load_records(config)?;
    let obs = observations(config, &records)?;
    let class = build_class(&obs, filter(config, config.stage, config.metric));
    if class.is_empty() {
        return Err(CliError::EmptyClass(format!(
            "no Category {} {} overruns left after filtering",
            config.stage, config.metric
        )));
    }
    Ok(class)
}

fn class_error(e: ClassError) -> CliError {
    match e {
        ClassError::Empty => CliError::EmptyClass(e.to_string()),
        ClassError::InvalidGrid | ClassError::Quantile(_) => CliError::Usage(e.to_string()),
        ClassError::Loess(_) | ClassError::NotSmoothed => CliError::InvalidCurve(e.to_string()),
    }
}

/// Raw curve on the grid, optionally loess-smoothed and isotonic-adjusted.
fn build_curve(config: &RunConfig, class: &ReferenceClass, smooth: bool, adjust: bool) -> CliResult<UpliftCurve> {
    let raw = uplift_curve(class, &config.grid, config.method).map_err(class_error)?;
    if !smooth {
        return Ok(raw);
    }
    let smoothed = raw.smooth(config.span, config.degree).map_err(class_error)?;
    if adjust {
        isotonic_adjust(&smoothed).map_err(class_error)
    } else {
        Ok(smoothed)
    }
}

/// Sends `body` to `<out>/<name>` when an output directory is set, else to `stdout`.
fn emit<W: Write>(config: &RunConfig, name: &str, body: &[u8], stdout: &mut W) -> CliResult<()> {
    match &config.out {
        Some(dir) => write_file(dir, name, body),
        None => Ok(stdout.write_all(body)?),
    }
}

fn write_file(dir: &Path, name: &str, body: &[u8]) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    w.write_all(body)?;
    w.flush()?;
    Ok(())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), String>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(CliError::Data)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

fn pct(x: f64) -> String {
    format!("{:+.1}%", x * 100.0)
}

fn overruns<W: Write>(config: &RunConfig, all: bool, trend: bool, stdout: &mut W) -> CliResult<()> {
    let records = load_records(config)?;
    let obs = observations(config, &records)?;
    let keep = |o: &&OverrunObservation| {
        if all {
            o.stage == config.stage && o.metric == config.metric
        } else if trend {
            filter(config, config.stage, config.metric).accepts(&OverrunObservation { pre_era: false, ..(*o).clone() })
        } else {
            filter(config, config.stage, config.metric).accepts(o)
        }
    };
    let selected: Vec<OverrunObservation> = obs.iter().filter(keep).cloned().collect();

    if trend {
        let summary = trend_by_date(&selected, config.era_cutoff, config.span, config.degree)
            .map_err(|e| CliError::EmptyClass(e.to_string()))?;
        let table = csv_bytes(|buf| {
            writeln!(buf, "project,date,overrun,fit,ci_low,ci_high").map_err(|e| e.to_string())?;
            for p in &summary.points {
                writeln!(
                    buf,
                    "{},{},{:.6},{:.6},{:.6},{:.6}",
                    p.project_id, p.date, p.value, p.fit, p.ci_low, p.ci_high
                )
                .map_err(|e| e.to_string())?;
            }
            Ok(())
        })?;
        emit(config, "trend.csv", &table, stdout)?;
        if let Some(dir) = &config.out {
            write_file(dir, "trend.json", &json_bytes(&summary)?)?;
        }
        return Ok(());
    }

    let table = csv_bytes(|buf| {
        writeln!(buf, "project,stage,metric,overrun,reference_date,pre_era,outturn").map_err(|e| e.to_string())?;
        for o in &selected {
            writeln!(
                buf,
                "{},{},{},{:.6},{},{},{}",
                o.project_id, o.stage, o.metric, o.value, o.reference_date, o.pre_era, o.outturn_nominal.0
            )
            .map_err(|e| e.to_string())?;
        }
        Ok(())
    })?;
    emit(config, "overruns.csv", &table, stdout)
}

fn uplift_table<W: Write>(config: &RunConfig, both: bool, stdout: &mut W) -> CliResult<()> {
    let class = class_for(config)?;
    let methods: Vec<QuantileMethod> =
        if both { vec![QuantileMethod::Inf, QuantileMethod::Interpolated] } else { vec![config.method] };
    let smoothed = if config.smooth { Some(build_curve(config, &class, true, true)?) } else { None };

    let mut rows: Vec<(f64, &str, &str, f64)> = Vec::new();
    for &p in &config.p_levels {
        for &m in &methods {
            rows.push((p, m.as_str(), "raw", uplift(&class, p, m).map_err(class_error)?));
        }
        if let Some(curve) = &smoothed {
            let u = curve
                .value_at(p)
                .ok_or_else(|| CliError::Usage(format!("p = {p} lies outside the probability grid")))?;
            rows.push((p, config.method.as_str(), "smoothed", u));
        }
    }
    let table = csv_bytes(|buf| {
        writeln!(buf, "p,method,source,uplift,uplift_pct").map_err(|e| e.to_string())?;
        for (p, m, src, u) in &rows {
            writeln!(buf, "{p:.2},{m},{src},{u:.6},{}", pct(*u)).map_err(|e| e.to_string())?;
        }
        Ok(())
    })?;
    emit(config, "uplift.csv", &table, stdout)
}

#[derive(Serialize)]
struct LoovReport {
    stage: Stage,
    metric: Metric,
    method: &'static str,
    n: usize,
    summary: Vec<rcf_core::validation::LoovSummary>,
}

fn validate<W: Write>(config: &RunConfig, stdout: &mut W) -> CliResult<()> {
    let class = class_for(config)?;
    let rows = leave_one_out(&class, &config.p_levels, config.method).map_err(|e| match e {
        rcf_core::validation::ValidationError::TooFewProjects(_) => CliError::EmptyClass(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let table = csv_bytes(|buf| write_loov_csv(&rows, buf).map_err(|e| e.to_string()))?;
    emit(config, "loov.csv", &table, stdout)?;

    let summary: Vec<_> = config.p_levels.iter().filter_map(|&p| loov_summary(&rows, p)).collect();
    for s in &summary {
        eprintln!("P{}: {}/{} prevented", (s.p * 100.0).round() as i64, s.hits, s.n);
    }
    if let Some(dir) = &config.out {
        let report = LoovReport {
            stage: config.stage,
            metric: config.metric,
            method: config.method.as_str(),
            n: rows.len(),
            summary,
        };
        write_file(dir, "loov_summary.json", &json_bytes(&report)?)?;
    }
    Ok(())
}

fn benchmark<W: Write>(config: &RunConfig, stdout: &mut W) -> CliResult<()> {
    let records = load_records(config)?;
    let obs = observations(config, &records)?;
    let constants = load_benchmark(config)?;

    let samples: Vec<StageSample> = Metric::ALL
        .iter()
        .flat_map(|&metric| Stage::ALL.iter().map(move |&stage| (stage, metric)))
        .map(|(stage, metric)| StageSample {
            stage,
            metric,
            values: build_class(&obs, filter(config, stage, metric)).members().iter().map(|m| m.value).collect(),
        })
        .collect();

    let in_class: Vec<ProjectRecord> = records
        .into_iter()
        .filter(|r| r.outturn_nominal >= config.min_outturn && !is_pre_era(r, config.era_cutoff))
        .collect();
    let phases = phase_breakdown(&in_class);
    let durations: Vec<f64> = phases.phases.iter().map(|p| p.total_years).collect();

    let report = benchmark_report(&samples, constants.as_ref(), Some(&durations));
    if report.stages.is_empty() {
        return Err(CliError::EmptyClass("no overruns left after filtering".to_string()));
    }
    let table = csv_bytes(|buf| write_report_csv(&report, buf).map_err(|e| e.to_string()))?;
    emit(config, "benchmark.csv", &table, stdout)?;
    if let Some(dir) = &config.out {
        #[derive(Serialize)]
        struct Full<'a> {
            report: &'a rcf_core::benchmarking::BenchmarkReport,
            phases: &'a rcf_core::benchmarking::PhaseReport,
        }
        write_file(dir, "benchmark.json", &json_bytes(&Full { report: &report, phases: &phases })?)?;
    }
    Ok(())
}

fn curve<W: Write>(config: &RunConfig, no_adjust: bool, stdout: &mut W) -> CliResult<()> {
    let class = class_for(config)?;
    let curve = build_curve(config, &class, true, !no_adjust)?;
    let table = csv_bytes(|buf| write_curve_csv(&curve, buf).map_err(|e| e.to_string()))?;
    emit(config, "curve.csv", &table, stdout)?;
    if let Some(dir) = &config.out {
        let markers = config
            .p_levels
            .iter()
            .map(|&p| Ok((p, uplift(&class, p, config.method).map_err(class_error)?)))
            .collect::<CliResult<Vec<_>>>()?;
        let title = format!(
            "Category {} {} uplift ({} projects, {} quantiles)",
            config.stage,
            config.metric,
            class.len(),
            config.method.as_str()
        );
        write_file(dir, "curve.svg", svg::render_curve(&curve, &markers, &title).as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TiersReport<'a> {
    scheme: &'a TierScheme,
    method: &'static str,
    source: String,
    allocation: rcf_core::contingency::TierAllocation,
}

fn tiers<W: Write>(
    config: &RunConfig,
    base: Money,
    scheme: &str,
    curve_file: Option<&Path>,
    no_adjust: bool,
    stdout: &mut W,
) -> CliResult<()> {
    let scheme = TierScheme::parse(scheme).map_err(|e| CliError::Usage(e.to_string()))?;
    let (curve, source) = match curve_file {
        Some(path) => {
            let curve = read_curve_csv(open(path)?, config.method).map_err(|e| CliError::Data(e.to_string()))?;
            let curve = if curve.smoothed.is_some() && !no_adjust && !curve.monotone {
                isotonic_adjust(&curve).map_err(class_error)?
            } else {
                curve
            };
            (curve, format!("curve file {}", path.display()))
        }
        None => {
            let class = class_for(config)?;
            let curve = build_curve(config, &class, config.smooth, !no_adjust)?;
            let source = if config.smooth { "smoothed reference class" } else { "raw reference class" };
            (curve, source.to_string())
        }
    };
    let allocation = tier_allocation(base, &curve, &scheme).map_err(|e| match e {
        ContingencyError::NonMonotoneCurve => CliError::InvalidCurve(e.to_string()),
        ContingencyError::OutsideCurve { .. } => CliError::InvalidCurve(e.to_string()),
        ContingencyError::Class(c) => class_error(c),
        _ => CliError::Usage(e.to_string()),
    })?;
    let report = TiersReport { scheme: &scheme, method: config.method.as_str(), source, allocation };
    emit(config, "tiers.json", &json_bytes(&report)?, stdout)
}

fn check<W: Write>(config: &RunConfig, stdout: &mut W) -> CliResult<()> {
    let path = required(&config.projects, "projects")?;
    let records = parse_project_records_unchecked(open(path)?)?;
    let mut report = Vec::new();
    let mut problems = 0usize;
    for r in &records {
        for v in validate_record(r) {
            problems += 1;
            writeln!(report, "{}: {v}", r.id)?;
        }
    }
    let avail = stage_availability(&records);
    writeln!(report, "records: {}", records.len())?;
    for metric in Metric::ALL {
        let counts: Vec<String> = Stage::ALL.iter().map(|&s| format!("{s}={}", avail.get(s, metric))).collect();
        writeln!(report, "{metric} data by stage: {}", counts.join(" "))?;
    }
    if problems == 0 && config.deflators.is_some() {
        observations(config, &records)?;
        writeln!(report, "deflators cover every project")?;
    }
    writeln!(report, "violations: {problems}")?;
    emit(config, "check.txt", &report, stdout)?;
    if problems > 0 {
        return Err(CliError::Data(format!("{problems} record violation(s)")));
    }
    Ok(())
}
