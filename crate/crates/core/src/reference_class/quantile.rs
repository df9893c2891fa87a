use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// Order-statistic rule used to read a quantile off a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantileMethod {
    /// `inf { x : p <= F(x) }` on the empirical distribution; always a sample member.
    Inf,
    /// Linear interpolation between order statistics at `h = (n - 1) p + 1`.
    #[default]
    Interpolated,
}

impl QuantileMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            QuantileMethod::Inf => "inf",
            QuantileMethod::Interpolated => "interp",
        }
    }
}

impl fmt::Display for QuantileMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuantileMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" => Ok(QuantileMethod::Inf),
            "interp" | "interpolated" => Ok(QuantileMethod::Interpolated),
            other => Err(format!("unknown quantile method `{other}` (expected inf or interp)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantileError {
    #[error("quantile of an empty sample")]
    EmptySample,
    #[error("probability {0} is outside (0, 1]")]
    ProbabilityOutOfRange(f64),
}

// Absorbs representation error in probabilities such as 0.1 * 3.
const P_SLACK: f64 = 1e-12;

/// Quantile of an ascending sample.
pub fn empirical_quantile(sorted: &[f64], p: f64, method: QuantileMethod) -> Result<f64, QuantileError> {
    if sorted.is_empty() {
        return Err(QuantileError::EmptySample);
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(QuantileError::ProbabilityOutOfRange(p));
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]), "sample must be sorted");
    let n = sorted.len();
    match method {
        QuantileMethod::Inf => {
            let nf = n as f64;
            // smallest rank k with k / n >= p
            let mut k = ((p * nf).ceil() as usize).clamp(1, n);
            while k > 1 && (k - 1) as f64 / nf + P_SLACK >= p {
                k -= 1;
            }
            while k < n && (k as f64 / nf + P_SLACK) < p {
                k += 1;
            }
            Ok(sorted[k - 1])
        }
        QuantileMethod::Interpolated => {
            let h = (n - 1) as f64 * p + 1.0;
            let lo = (h.floor() as usize).clamp(1, n);
            let hi = (h.ceil() as usize).clamp(1, n);
            let frac = h - lo as f64;
            let (a, b) = (sorted[lo - 1], sorted[hi - 1]);
            if frac <= 0.0 || a == b {
                Ok(a)
            } else {
                Ok(a + frac * (b - a))
            }
        }
    }
}
