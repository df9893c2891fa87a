//! Locally weighted polynomial regression with pointwise 95% intervals.
//!
//! At every data abscissa a polynomial of the requested degree is fitted by
//! weighted least squares to the `ceil(span * n)` nearest points with tricube
//! weights. The fit is linear in the responses, `fit_i = l_i . y`, so its
//! standard error is `sigma * |l_i|` with `sigma^2` estimated from the
//! residuals on `n - trace(L)` degrees of freedom.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_SPAN: f64 = 0.75;
pub const DEFAULT_DEGREE: usize = 2;
pub const Z_95: f64 = 1.96;

// Relative singular value cutoff for the local design.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoessPoint {
    pub x: f64,
    pub fit: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoessError {
    #[error("loess of degree {degree} needs at least {needed} points, got {got}")]
    TooFewPoints { degree: usize, needed: usize, got: usize },
    #[error("span must lie in (0, 1], got {0}")]
    InvalidSpan(f64),
    #[error("degree must be 1 or 2, got {0}")]
    InvalidDegree(usize),
    #[error("non-finite input at position {0}")]
    NonFinite(usize),
}

fn tricube(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        let t = 1.0 - r * r * r;
        t * t * t
    }
}

/// Smoother row `l` (length n) such that the local fit at `x0` is `l . y`.
fn local_row(xs: &[f64], x0: f64, q: usize, degree: usize) -> Vec<f64> {
    let n = xs.len();
    let dist: Vec<f64> = xs.iter().map(|x| (x - x0).abs()).collect();
    let mut sorted = dist.clone();
    sorted.sort_by(f64::total_cmp);
    let bandwidth = sorted[q - 1];

    let mut row = vec![0.0; n];
    if bandwidth <= 0.0 {
        // every point in the window sits on x0: weighted mean
        let at: Vec<usize> = (0..n).filter(|&j| dist[j] == 0.0).collect();
        let w = 1.0 / at.len() as f64;
        for j in at {
            row[j] = w;
        }
        return row;
    }

    let window: Vec<(usize, f64)> = (0..n)
        .filter_map(|j| {
            let w = tricube(dist[j] / bandwidth);
            (w > 0.0).then_some((j, w))
        })
        .collect();

    for deg in (0..=degree).rev() {
        let k = deg + 1;
        let m = window.len();
        let mut design = DMatrix::<f64>::zeros(m, k);
        for (r, &(j, w)) in window.iter().enumerate() {
            let u = (xs[j] - x0) / bandwidth;
            let sw = w.sqrt();
            let mut pow = 1.0;
            for c in 0..k {
                design[(r, c)] = sw * pow;
                pow *= u;
            }
        }
        let svd = design.svd(true, true);
        let max_sv = svd.singular_values.max();
        if svd.rank(max_sv * RANK_TOL) < k {
            continue;
        }
        let pinv = match svd.pseudo_inverse(max_sv * RANK_TOL) {
            Ok(p) => p,
            Err(_) => continue,
        };
        for (r, &(j, w)) in window.iter().enumerate() {
            row[j] = pinv[(0, r)] * w.sqrt();
        }
        return row;
    }
    unreachable!("a degree-0 fit on a non-empty window always has full rank")
}

/// Loess fit and 95% pointwise interval at every input abscissa, in input order.
pub fn loess_smooth(points: &[(f64, f64)], span: f64, degree: usize) -> Result<Vec<LoessPoint>, LoessError> {
    if !(1..=2).contains(&degree) {
        return Err(LoessError::InvalidDegree(degree));
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(LoessError::InvalidSpan(span));
    }
    let n = points.len();
    if n < degree + 2 {
        return Err(LoessError::TooFewPoints { degree, needed: degree + 2, got: n });
    }
    if let Some(i) = points.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(LoessError::NonFinite(i));
    }

    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let q = ((span * n as f64).ceil() as usize).clamp(1, n);

    let rows: Vec<Vec<f64>> = xs.iter().map(|&x0| local_row(&xs, x0, q, degree)).collect();
    let fits: Vec<f64> = rows.iter().map(|l| l.iter().zip(ys.iter()).map(|(a, b)| a * b).sum()).collect();

    let trace: f64 = rows.iter().enumerate().map(|(i, l)| l[i]).sum();
    let rss: f64 = fits.iter().zip(ys.iter()).map(|(f, y)| (y - f) * (y - f)).sum();
    let dof = n as f64 - trace;
    let sigma = if dof > 1e-8 { (rss / dof).sqrt() } else { 0.0 };

    Ok(xs
        .iter()
        .zip(fits.iter())
        .zip(rows.iter())
        .map(|((&x, &fit), l)| {
            let half = Z_95 * sigma * l.iter().map(|v| v * v).sum::<f64>().sqrt();
            LoessPoint { x, fit, ci_low: fit - half, ci_high: fit + half }
        })
        .collect())
}
