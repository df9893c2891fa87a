//! Leave-one-out validation: hold out each project, rebuild the class from
//! the rest and check whether the suggested uplift would have covered it.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::reference_class::{empirical_quantile, QuantileError, QuantileMethod, ReferenceClass};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("leave-one-out needs at least 2 projects, got {0}")]
    TooFewProjects(usize),
    #[error("no probability levels requested")]
    NoLevels,
    #[error(transparent)]
    Quantile(#[from] QuantileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelCheck {
    pub p: f64,
    pub uplift: f64,
    /// `actual <= uplift`
    pub prevented: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoovRow {
    pub project_id: String,
    pub actual: f64,
    pub levels: Vec<LevelCheck>,
}

impl LoovRow {
    pub fn at(&self, p: f64) -> Option<&LevelCheck> {
        self.levels.iter().find(|l| (l.p - p).abs() < 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoovSummary {
    pub p: f64,
    pub hits: usize,
    pub n: usize,
    pub rate: f64,
}

/// One row per class member, in the class's input order.
pub fn leave_one_out(
    class: &ReferenceClass,
    p_levels: &[f64],
    method: QuantileMethod,
) -> Result<Vec<LoovRow>, ValidationError> {
    if class.len() < 2 {
        return Err(ValidationError::TooFewProjects(class.len()));
    }
    if p_levels.is_empty() {
        return Err(ValidationError::NoLevels);
    }
    class
        .members()
        .iter()
        .enumerate()
        .map(|(i, member)| {
            let rest = class.sorted_without(i);
            let levels = p_levels
                .iter()
                .map(|&p| {
                    let uplift = empirical_quantile(&rest, p, method)?;
                    Ok(LevelCheck { p, uplift, prevented: member.value <= uplift })
                })
                .collect::<Result<Vec<_>, ValidationError>>()?;
            Ok(LoovRow { project_id: member.project_id.clone(), actual: member.value, levels })
        })
        .collect()
}

/// Hit count at level `p`; `None` when no row carries that level.
pub fn loov_summary(rows: &[LoovRow], p: f64) -> Option<LoovSummary> {
    let checks: Vec<&LevelCheck> = rows.iter().filter_map(|r| r.at(p)).collect();
    if checks.is_empty() {
        return None;
    }
    let hits = checks.iter().filter(|c| c.prevented).count();
    Some(LoovSummary { p, hits, n: checks.len(), rate: hits as f64 / checks.len() as f64 })
}

/// Signed whole percent, e.g. `+18%`, `-47%`, `0%`.
pub fn format_percent(fraction: f64) -> String {
    let pct = (fraction * 100.0).round() as i64;
    if pct > 0 {
        format!("+{pct}%")
    } else {
        format!("{pct}%")
    }
}

fn level_label(p: f64) -> String {
    format!("p{}", (p * 100.0).round() as i64)
}

/// `project,p50_uplift,p80_uplift,actual,p50_prevented,p80_prevented` for
/// levels 0.5 and 0.8; other levels follow the same naming.
pub fn write_loov_csv<W: Write>(rows: &[LoovRow], sink: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(sink);
    let levels: Vec<f64> = rows.first().map(|r| r.levels.iter().map(|l| l.p).collect()).unwrap_or_default();
    let mut header = vec!["project".to_string()];
    header.extend(levels.iter().map(|&p| format!("{}_uplift", level_label(p))));
    header.push("actual".to_string());
    header.extend(levels.iter().map(|&p| format!("{}_prevented", level_label(p))));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.project_id.clone()];
        rec.extend(r.levels.iter().map(|l| format_percent(l.uplift)));
        rec.push(format_percent(r.actual));
        rec.extend(r.levels.iter().map(|l| if l.prevented { "yes" } else { "no" }.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
