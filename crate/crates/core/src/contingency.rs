//! De-biased estimates and tiered contingency allocation.
//!
//! A tier scheme splits the total contingency needed for the highest
//! certainty into tranches held at increasing levels of authority, e.g.
//! contract, project and portfolio.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reference_class::{uplift, ClassError, QuantileMethod, ReferenceClass, UpliftCurve};
use crate::registry::Money;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContingencyError {
    #[error("base estimate must be positive, got {0}")]
    NonPositiveBase(i64),
    #[error("tier scheme is empty")]
    EmptyScheme,
    #[error("tier `{0}`: certainty must lie in (0, 1]")]
    CertaintyOutOfRange(String),
    #[error("tier certainties must be strictly increasing (`{0}`)")]
    NotIncreasing(String),
    #[error("uplift curve is not monotone; apply the isotonic adjustment first")]
    NonMonotoneCurve,
    #[error("tier `{name}` certainty {p} lies outside the curve")]
    OutsideCurve { name: String, p: f64 },
    #[error("project certainty {project} exceeds portfolio certainty {portfolio}")]
    LevelsOutOfOrder { project: f64, portfolio: f64 },
    #[error("malformed tier `{0}` (expected name:certainty)")]
    MalformedTier(String),
    #[error(transparent)]
    Class(#[from] ClassError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tier {
    pub name: String,
    pub certainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TierScheme {
    tiers: Vec<Tier>,
    pub note: Option<String>,
}

impl TierScheme {
    pub fn new(tiers: Vec<Tier>) -> Result<Self, ContingencyError> {
        if tiers.is_empty() {
            return Err(ContingencyError::EmptyScheme);
        }
        for (i, t) in tiers.iter().enumerate() {
            if !(t.certainty > 0.0 && t.certainty <= 1.0) {
                return Err(ContingencyError::CertaintyOutOfRange(t.name.clone()));
            }
            if i > 0 && t.certainty <= tiers[i - 1].certainty {
                return Err(ContingencyError::NotIncreasing(t.name.clone()));
            }
        }
        Ok(TierScheme { tiers, note: None })
    }

    /// Contract tier around P50-P55 (P55 used), project tier up to about
    /// P60, portfolio tier up to P80.
    pub fn three_tier_preset() -> Self {
        let tiers = [("contract", 0.55), ("project", 0.60), ("portfolio", 0.80)]
            .into_iter()
            .map(|(name, certainty)| Tier { name: name.to_string(), certainty })
            .collect();
        let mut scheme = TierScheme::new(tiers).expect("preset is valid");
        scheme.note = Some("contract tier is described as roughly P50-P55; the upper end P55 is used".to_string());
        scheme
    }

    /// Parses `name:p,name:p,...`, or the preset name `three-tier`.
    pub fn parse(spec: &str) -> Result<Self, ContingencyError> {
        if matches!(spec.trim(), "three-tier" | "preset" | "default") {
            return Ok(Self::three_tier_preset());
        }
        let tiers = spec
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| {
                let (name, p) =
                    item.split_once(':').ok_or_else(|| ContingencyError::MalformedTier(item.to_string()))?;
                let certainty = p.trim().parse().map_err(|_| ContingencyError::MalformedTier(item.to_string()))?;
                Ok(Tier { name: name.trim().to_string(), certainty })
            })
            .collect::<Result<Vec<_>, ContingencyError>>()?;
        Self::new(tiers)
    }

    pub fn tiers(&self) -> &[Tier] {
        &self.tiers
    }
}

/// `base * (1 + uplift(p))`, in the units of `base`.
pub fn debias_estimate(
    base_estimate: Money,
    class: &ReferenceClass,
    p: f64,
    method: QuantileMethod,
) -> Result<f64, ContingencyError> {
    if base_estimate.0 <= 0 {
        return Err(ContingencyError::NonPositiveBase(base_estimate.0));
    }
    Ok(base_estimate.as_f64() * (1.0 + uplift(class, p, method)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TierTranche {
    pub name: String,
    pub certainty: f64,
    pub cumulative_uplift: f64,
    pub tranche: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TierAllocation {
    pub base_estimate: Money,
    pub tiers: Vec<TierTranche>,
    pub total_funded: Money,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn round_money(x: f64) -> i64 {
    x.round() as i64
}

/// Splits the contingency for the top tier into tranches. Amounts are whole
/// thousands; the top tier takes the rounding residual so that tranches sum
/// to `total_funded - base` exactly.
pub fn tier_allocation(
    base_estimate: Money,
    curve: &UpliftCurve,
    scheme: &TierScheme,
) -> Result<TierAllocation, ContingencyError> {
    if base_estimate.0 <= 0 {
        return Err(ContingencyError::NonPositiveBase(base_estimate.0));
    }
    if !curve.check_monotone() {
        return Err(ContingencyError::NonMonotoneCurve);
    }
    let uplifts = scheme
        .tiers
        .iter()
        .map(|t| {
            curve
                .value_at(t.certainty)
                .ok_or_else(|| ContingencyError::OutsideCurve { name: t.name.clone(), p: t.certainty })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(allocate(base_estimate, scheme, &uplifts))
}

fn allocate(base: Money, scheme: &TierScheme, uplifts: &[f64]) -> TierAllocation {
    let b = base.as_f64();
    let top = *uplifts.last().expect("scheme is non-empty");
    let total_contingency = round_money(b * top);
    let mut tiers = Vec::with_capacity(uplifts.len());
    let mut allocated = 0i64;
    let mut prev_cum = 0i64;
    for (k, (tier, &u)) in scheme.tiers.iter().zip(uplifts).enumerate() {
        let amount = if k + 1 == uplifts.len() {
            total_contingency - allocated
        } else {
            let cum = round_money(b * u);
            let a = cum - prev_cum;
            prev_cum = cum;
            a
        };
        allocated += amount;
        tiers.push(TierTranche {
            name: tier.name.clone(),
            certainty: tier.certainty,
            cumulative_uplift: u,
            tranche: Money(amount),
        });
    }
    TierAllocation {
        base_estimate: base,
        tiers,
        total_funded: Money(base.0 + total_contingency),
        note: scheme.note.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioPool {
    pub project_uplift: f64,
    pub portfolio_uplift: f64,
    /// `base * (1 + project_uplift)` per project.
    pub project_funding: Vec<f64>,
    /// Sum of `base * (portfolio_uplift - project_uplift)`.
    pub pooled_reserve: f64,
}

/// Funds each project at `project_p` and pools the gap up to `portfolio_p`.
/// Projects are treated as a simple sum; correlation is not modelled.
pub fn portfolio_pool(
    base_estimates: &[Money],
    class: &ReferenceClass,
    project_p: f64,
    portfolio_p: f64,
    method: QuantileMethod,
) -> Result<PortfolioPool, ContingencyError> {
    if project_p > portfolio_p {
        return Err(ContingencyError::LevelsOutOfOrder { project: project_p, portfolio: portfolio_p });
    }
    let project_uplift = uplift(class, project_p, method)?;
    let portfolio_uplift = uplift(class, portfolio_p, method)?;
    pool_with_uplifts(base_estimates, project_uplift, portfolio_uplift)
}

pub fn pool_with_uplifts(
    base_estimates: &[Money],
    project_uplift: f64,
    portfolio_uplift: f64,
) -> Result<PortfolioPool, ContingencyError> {
    if let Some(bad) = base_estimates.iter().find(|b| b.0 <= 0) {
        return Err(ContingencyError::NonPositiveBase(bad.0));
    }
    let project_funding = base_estimates.iter().map(|b| b.as_f64() * (1.0 + project_uplift)).collect();
    let pooled_reserve = base_estimates.iter().map(|b| b.as_f64() * (portfolio_uplift - project_uplift)).sum();
    Ok(PortfolioPool { project_uplift, portfolio_uplift, project_funding, pooled_reserve })
}
