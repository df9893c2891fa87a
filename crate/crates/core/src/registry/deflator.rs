use std::io::Read;

use serde::Deserialize;

use super::RegistryError;

/// Contiguous year → price index series, normalized so `index(base_year) == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatorSeries {
    base_year: i32,
    first_year: i32,
    indices: Vec<f64>,
}

impl DeflatorSeries {
    /// Builds a series from `(year, index)` pairs in any order and normalizes it
    /// to `base_year` (the first year when `None`).
    pub fn from_pairs(pairs: &[(i32, f64)], base_year: Option<i32>) -> Result<Self, RegistryError> {
        if pairs.is_empty() {
            return Err(RegistryError::EmptyDeflators);
        }
        let mut sorted = pairs.to_vec();
        sorted.sort_by_key(|&(y, _)| y);
        for w in sorted.windows(2) {
            if w[1].0 == w[0].0 {
                return Err(RegistryError::DeflatorDuplicate(w[0].0));
            }
            if w[1].0 != w[0].0 + 1 {
                return Err(RegistryError::DeflatorGap { missing: w[0].0 + 1 });
            }
        }
        for &(year, index) in &sorted {
            if !(index > 0.0 && index.is_finite()) {
                return Err(RegistryError::NonPositiveIndex { year, index });
            }
        }
        let first_year = sorted[0].0;
        let series =
            DeflatorSeries { base_year: first_year, first_year, indices: sorted.iter().map(|&(_, i)| i).collect() };
        series.rebased(base_year.unwrap_or(first_year))
    }

    /// Same series renormalized to a different base year.
    pub fn rebased(&self, base_year: i32) -> Result<Self, RegistryError> {
        let at_base = self.index(base_year)?;
        Ok(DeflatorSeries {
            base_year,
            first_year: self.first_year,
            indices: self.indices.iter().map(|i| i / at_base).collect(),
        })
    }

    pub fn base_year(&self) -> i32 {
        self.base_year
    }

    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.first_year + self.indices.len() as i32 - 1
    }

    pub fn index(&self, year: i32) -> Result<f64, RegistryError> {
        if year < self.first_year || year > self.last_year() {
            return Err(RegistryError::YearOutOfRange { year, first: self.first_year, last: self.last_year() });
        }
        Ok(self.indices[(year - self.first_year) as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.indices.iter().enumerate().map(|(k, &i)| (self.first_year + k as i32, i))
    }
}

#[derive(Deserialize)]
struct DeflatorRow {
    year: i32,
    index: f64,
}

/// Parses `deflators.csv` (`year,index`).
pub fn parse_deflator_series<R: Read>(source: R, base_year: Option<i32>) -> Result<DeflatorSeries, RegistryError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut pairs = Vec::new();
    for row in reader.deserialize() {
        let row: DeflatorRow = row?;
        pairs.push((row.year, row.index));
    }
    DeflatorSeries::from_pairs(&pairs, base_year)
}
