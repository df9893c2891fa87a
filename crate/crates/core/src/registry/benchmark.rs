use std::io::Read;

use serde::{Deserialize, Serialize};

use super::RegistryError;

/// Summary statistics of an external benchmark sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConstants {
    pub label: String,
    pub n_projects: u32,
    pub mean_cost_overrun: f64,
    pub cost_overrun_frequency: f64,
    pub cost_overrun_sd: f64,
    pub mean_schedule_overrun: f64,
    pub schedule_overrun_frequency: f64,
    pub schedule_overrun_sd: f64,
    pub mean_duration_years: f64,
    /// Raw per-project values, when the benchmark owner supplies them.
    /// Significance tests are only computed against raw samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<RawBenchmarkSamples>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawBenchmarkSamples {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cost: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub duration_years: Vec<f64>,
}

impl BenchmarkConstants {
    /// Published summary of the international road project benchmark
    /// (863 projects, 34 countries; decision-to-build baseline).
    pub fn international_roads() -> Self {
        BenchmarkConstants {
            label: "international roads".to_string(),
            n_projects: 863,
            mean_cost_overrun: 0.20,
            cost_overrun_frequency: 0.9,
            cost_overrun_sd: 0.30,
            mean_schedule_overrun: 0.38,
            schedule_overrun_frequency: 0.6,
            schedule_overrun_sd: 0.85,
            mean_duration_years: 5.5,
            samples: None,
        }
    }

    pub fn check(&self) -> Result<(), RegistryError> {
        let bad = |message: &str| {
            Err(RegistryError::InvalidBenchmark { label: self.label.clone(), message: message.to_string() })
        };
        if self.n_projects < 1 {
            return bad("n_projects must be at least 1");
        }
        for f in [self.cost_overrun_frequency, self.schedule_overrun_frequency] {
            if !(0.0..=1.0).contains(&f) {
                return bad("frequencies must lie in [0, 1]");
            }
        }
        for sd in [self.cost_overrun_sd, self.schedule_overrun_sd] {
            if !(sd >= 0.0) {
                return bad("standard deviations must be non-negative");
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<BenchmarkConstants>),
    One(BenchmarkConstants),
}

/// Parses `benchmark.json`: an array of constants objects (a single object is
/// also accepted). Labels must be unique.
pub fn parse_benchmark_constants<R: Read>(source: R) -> Result<Vec<BenchmarkConstants>, RegistryError> {
    let parsed: OneOrMany = serde_json::from_reader(source)?;
    let all = match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(c) => vec![c],
    };
    for (i, c) in all.iter().enumerate() {
        c.check()?;
        if all[..i].iter().any(|o| o.label == c.label) {
            return Err(RegistryError::InvalidBenchmark {
                label: c.label.clone(),
                message: "label appears more than once".to_string(),
            });
        }
    }
    Ok(all)
}
