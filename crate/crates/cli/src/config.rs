//! Run configuration: built-in defaults, overridden by a flat `key = value`
//! file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rcf_core::normalization::default_era_cutoff;
use rcf_core::reference_class::{default_grid, QuantileMethod, DEFAULT_DEGREE, DEFAULT_MIN_OUTTURN, DEFAULT_SPAN};
use rcf_core::{Metric, Money, Stage};

use crate::error::CliError;
use crate::Overrides;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub projects: Option<PathBuf>,
    pub deflators: Option<PathBuf>,
    pub benchmark: Option<PathBuf>,
    pub deflator_base_year: Option<i32>,
    pub stage: Stage,
    pub metric: Metric,
    pub p_levels: Vec<f64>,
    pub method: QuantileMethod,
    pub smooth: bool,
    pub span: f64,
    pub degree: usize,
    pub era_cutoff: NaiveDate,
    pub min_outturn: Money,
    pub grid: Vec<f64>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            projects: None,
            deflators: None,
            benchmark: None,
            deflator_base_year: None,
            stage: Stage::C,
            metric: Metric::Cost,
            p_levels: vec![0.5, 0.8],
            method: QuantileMethod::Interpolated,
            smooth: false,
            span: DEFAULT_SPAN,
            degree: DEFAULT_DEGREE,
            era_cutoff: default_era_cutoff(),
            min_outturn: DEFAULT_MIN_OUTTURN,
            grid: default_grid(),
            out: None,
        }
    }
}

pub fn parse_probabilities(s: &str) -> Result<Vec<f64>, String> {
    let ps = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("`{t}` is not a probability")))
        .collect::<Result<Vec<_>, _>>()?;
    if ps.is_empty() {
        return Err("empty probability list".to_string());
    }
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(format!("probability {p} is outside (0, 1]"));
    }
    Ok(ps)
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

/// Reads a `key = value` file. `#` starts a comment; keys accept `-` or `_`.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected `key = value`", path.display(), i + 1)))?;
        out.insert(key.trim().replace('-', "_"), value.trim().to_string());
    }
    Ok(out)
}

fn apply_file(config: &mut RunConfig, entries: &BTreeMap<String, String>, dir: &Path) -> Result<(), CliError> {
    let usage = |key: &str, msg: String| CliError::Usage(format!("config key `{key}`: {msg}"));
    let path = |v: &str| {
        let p = PathBuf::from(v);
        if p.is_relative() {
            dir.join(p)
        } else {
            p
        }
    };
    for (key, value) in entries {
        let v = value.as_str();
        match key.as_str() {
            "projects" => config.projects = Some(path(v)),
            "deflators" => config.deflators = Some(path(v)),
            "benchmark" => config.benchmark = Some(path(v)),
            "out" => config.out = Some(path(v)),
            "deflator_base_year" => {
                config.deflator_base_year = Some(v.parse().map_err(|_| usage(key, format!("bad year `{v}`")))?)
            }
            "stage" => config.stage = v.parse().map_err(|e| usage(key, e))?,
            "metric" => config.metric = v.parse().map_err(|e| usage(key, e))?,
            "p" => config.p_levels = parse_probabilities(v).map_err(|e| usage(key, e))?,
            "grid" => config.grid = parse_probabilities(v).map_err(|e| usage(key, e))?,
            "method" => config.method = v.parse().map_err(|e| usage(key, e))?,
            "smooth" => config.smooth = parse_bool(v).map_err(|e| usage(key, e))?,
            "span" => config.span = v.parse().map_err(|_| usage(key, format!("bad span `{v}`")))?,
            "degree" => config.degree = v.parse().map_err(|_| usage(key, format!("bad degree `{v}`")))?,
            "era_cutoff" => config.era_cutoff = v.parse().map_err(|_| usage(key, format!("bad date `{v}`")))?,
            "min_outturn" => {
                config.min_outturn = Money(v.parse().map_err(|_| usage(key, format!("bad amount `{v}`")))?)
            }
            other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
        }
    }
    Ok(())
}

fn apply_flags(config: &mut RunConfig, o: &Overrides) -> Result<(), CliError> {
    macro_rules! set {
        ($field:ident) => {
            if let Some(v) = &o.$field {
                config.$field = v.clone().into();
            }
        };
    }
    set!(projects);
    set!(deflators);
    set!(benchmark);
    set!(out);
    set!(stage);
    set!(metric);
    set!(method);
    set!(span);
    set!(degree);
    set!(era_cutoff);
    if let Some(y) = o.deflator_base_year {
        config.deflator_base_year = Some(y);
    }
    if let Some(p) = &o.p {
        config.p_levels = parse_probabilities(p).map_err(|e| CliError::Usage(format!("--p: {e}")))?;
    }
    if let Some(g) = &o.grid {
        config.grid = parse_probabilities(g).map_err(|e| CliError::Usage(format!("--grid: {e}")))?;
    }
    if let Some(m) = o.min_outturn {
        config.min_outturn = Money(m);
    }
    if o.smooth {
        config.smooth = true;
    }
    Ok(())
}

/// Merges defaults, the optional config file and flags, then checks that
/// every referenced input file exists.
pub fn resolve(o: &Overrides) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    if let Some(file) = &o.config {
        let entries = read_config_file(file)?;
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        apply_file(&mut config, &entries, &dir)?;
    }
    apply_flags(&mut config, o)?;

    if !(config.span > 0.0 && config.span <= 1.0) {
        return Err(CliError::Usage(format!("span {} is outside (0, 1]", config.span)));
    }
    if !(1..=2).contains(&config.degree) {
        return Err(CliError::Usage(format!("degree must be 1 or 2, got {}", config.degree)));
    }
    if config.grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("grid must be strictly ascending".to_string()));
    }
    if config.min_outturn.0 < 0 {
        return Err(CliError::Usage("min-outturn must be non-negative".to_string()));
    }
    for path in [&config.projects, &config.deflators, &config.benchmark].into_iter().flatten() {
        if !path.exists() {
            return Err(CliError::Data(format!("input file {} does not exist", path.display())));
        }
    }
    Ok(config)
}
