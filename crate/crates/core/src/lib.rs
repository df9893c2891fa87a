//! Reference class forecasting for capital works programmes.
//!
//! The pipeline runs in three steps: build a reference class of completed
//! projects, derive the empirical distribution of their cost and schedule
//! overruns, and read uplifts off that distribution for a chosen level of
//! certainty. Around that core sit the supporting pieces:
//!
//! * [`registry`] parses the project proforma, deflator series and external
//!   benchmark constants.
//! * [`normalization`] moves money to constant prices and computes overruns.
//! * [`reference_class`] filters observations and computes quantile uplifts,
//!   loess-smoothed uplift curves and date trends.
//! * [`validation`] runs leave-one-out checks on a reference class.
//! * [`benchmarking`] provides descriptive statistics, rank and exact tests,
//!   and project phase breakdowns.
//! * [`contingency`] turns uplift curves into de-biased estimates and tiered
//!   contingency allocations.

pub mod benchmarking;
pub mod contingency;
pub mod normalization;
pub mod reference_class;
pub mod registry;
pub mod validation;

pub use registry::{Metric, Money, ProjectRecord, Stage};
