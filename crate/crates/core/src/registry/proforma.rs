use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;

use super::{validate_record, Money, ProjectRecord, RegistryError, Stage};

/// Column layout of `projects.csv`, in output order.
pub const PROFORMA_COLUMNS: [&str; 23] = [
    "id",
    "date_c",
    "date_b",
    "date_a",
    "base_c",
    "cont_c",
    "approved_c",
    "planned_completion_c",
    "base_b",
    "cont_b",
    "approved_b",
    "planned_completion_b",
    "base_a",
    "cont_a",
    "approved_a",
    "planned_completion_a",
    "price_level_year_c",
    "price_level_year_b",
    "price_level_year_a",
    "construction_start",
    "actual_completion",
    "outturn_nominal",
    "disbursements",
];

fn suffix(stage: Stage) -> &'static str {
    match stage {
        Stage::C => "c",
        Stage::B => "b",
        Stage::A => "a",
    }
}

struct Row<'a> {
    line: u64,
    cells: &'a csv::StringRecord,
    columns: &'a [usize; 23],
}

impl Row<'_> {
    fn raw(&self, name: &str) -> Option<&str> {
        let pos = PROFORMA_COLUMNS.iter().position(|c| *c == name).expect("known column");
        self.cells.get(self.columns[pos]).map(str::trim).filter(|s| !s.is_empty())
    }

    fn malformed(&self, column: &str, message: impl Into<String>) -> RegistryError {
        RegistryError::Malformed { line: self.line, column: column.to_string(), message: message.into() }
    }

    fn parsed<T: FromStr>(&self, name: &str, what: &str) -> Result<Option<T>, RegistryError> {
        match self.raw(name) {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|_| self.malformed(name, format!("expected {what}, found `{s}`"))),
        }
    }

    fn date(&self, name: &str) -> Result<Option<NaiveDate>, RegistryError> {
        self.parsed(name, "an ISO-8601 date (YYYY-MM-DD)")
    }

    fn money(&self, name: &str) -> Result<Option<Money>, RegistryError> {
        Ok(self.parsed::<i64>(name, "whole HKD thousands")?.map(Money))
    }

    fn disbursements(&self) -> Result<Option<BTreeMap<i32, Money>>, RegistryError> {
        const COL: &str = "disbursements";
        let Some(raw) = self.raw(COL) else {
            return Ok(None);
        };
        let mut out = BTreeMap::new();
        for pair in raw.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (year, amount) = pair
                .split_once(':')
                .ok_or_else(|| self.malformed(COL, format!("expected `year:amount`, found `{pair}`")))?;
            let year: i32 = year.trim().parse().map_err(|_| self.malformed(COL, format!("bad year in `{pair}`")))?;
            let amount: i64 =
                amount.trim().parse().map_err(|_| self.malformed(COL, format!("bad amount in `{pair}`")))?;
            if out.insert(year, Money(amount)).is_some() {
                return Err(self.malformed(COL, format!("year {year} listed twice")));
            }
        }
        Ok(Some(out))
    }
}

fn column_positions(headers: &csv::StringRecord) -> Result<[usize; 23], RegistryError> {
    let mut columns = [0usize; 23];
    for (slot, name) in columns.iter_mut().zip(PROFORMA_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| RegistryError::MissingColumn(name.to_string()))?;
    }
    Ok(columns)
}

fn parse_rows<R: Read>(source: R) -> Result<Vec<(u64, ProjectRecord)>, RegistryError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let columns = column_positions(reader.headers()?)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();

    for result in reader.records() {
        let cells = result?;
        let line = cells.position().map(|p| p.line()).unwrap_or(0);
        let row = Row { line, cells: &cells, columns: &columns };

        let id = row.raw("id").ok_or_else(|| row.malformed("id", "project id is empty"))?.to_string();
        if !seen.insert(id.clone()) {
            return Err(RegistryError::DuplicateId { line, id });
        }
        let actual_completion =
            row.date("actual_completion")?.ok_or_else(|| RegistryError::Undated { line, id: id.clone() })?;
        let outturn_nominal =
            row.money("outturn_nominal")?.ok_or_else(|| row.malformed("outturn_nominal", "outturn is required"))?;

        let mut record = ProjectRecord::new(id, actual_completion, outturn_nominal);
        for stage in Stage::ALL {
            let s = suffix(stage);
            let est = record.stage_mut(stage);
            est.upgrade_date = row.date(&format!("date_{s}"))?;
            est.base_estimate = row.money(&format!("base_{s}"))?;
            est.contingency = row.money(&format!("cont_{s}"))?;
            est.approved_estimate = row.money(&format!("approved_{s}"))?;
            est.planned_completion = row.date(&format!("planned_completion_{s}"))?;
            est.price_level_year = row.parsed(&format!("price_level_year_{s}"), "a year")?;
        }
        record.construction_start = row.date("construction_start")?;
        record.disbursements = row.disbursements()?;
        out.push((line, record));
    }
    Ok(out)
}

/// Parses `projects.csv` without checking record invariants.
///
/// Use [`super::validate_record`] on the result to obtain violation reports.
pub fn parse_project_records_unchecked<R: Read>(source: R) -> Result<Vec<ProjectRecord>, RegistryError> {
    Ok(parse_rows(source)?.into_iter().map(|(_, r)| r).collect())
}

/// Parses `projects.csv` and rejects the first record that breaks an invariant.
pub fn parse_project_records<R: Read>(source: R) -> Result<Vec<ProjectRecord>, RegistryError> {
    let rows = parse_rows(source)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, record) in rows {
        if let Some(violation) = validate_record(&record).into_iter().next() {
            return Err(RegistryError::Inconsistent { line, id: record.id, violation });
        }
        out.push(record);
    }
    Ok(out)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_project_records<W: Write>(records: &[ProjectRecord], sink: W) -> Result<(), RegistryError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(PROFORMA_COLUMNS)?;
    for r in records {
        let mut row: Vec<String> = Vec::with_capacity(PROFORMA_COLUMNS.len());
        row.push(r.id.clone());
        for stage in Stage::ALL {
            row.push(opt(r.stage(stage).upgrade_date));
        }
        for stage in Stage::ALL {
            let s = r.stage(stage);
            row.push(opt(s.base_estimate));
            row.push(opt(s.contingency));
            row.push(opt(s.approved_estimate));
            row.push(opt(s.planned_completion));
        }
        for stage in Stage::ALL {
            row.push(opt(r.stage(stage).price_level_year));
        }
        row.push(opt(r.construction_start));
        row.push(r.actual_completion.to_string());
        row.push(r.outturn_nominal.to_string());
        row.push(
            r.disbursements
                .as_ref()
                .map(|d| d.iter().map(|(y, m)| format!("{y}:{m}")).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
        );
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}
