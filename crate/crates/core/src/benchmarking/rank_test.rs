use std::cmp::Ordering;

use serde::Serialize;
use statrs::function::erf::erfc;

/// Largest combined sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankTestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitney {
    /// Pairs with `a > b`, ties counting one half.
    pub u_a: f64,
    pub u_b: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: RankTestMethod,
}

/// Midranks (1-based) of the concatenation `a ++ b`.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// `counts[u]` = number of arrangements of `m` a's and `n` b's whose U_a is `u`.
fn exact_counts(m: usize, n: usize) -> Vec<u64> {
    // table[i][j] is the distribution for i a's and j b's
    let max_u = m * n;
    let mut table = vec![vec![Vec::<u64>::new(); n + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=n {
            let mut dist = vec![0u64; i * j + 1];
            if i == 0 || j == 0 {
                dist[0] = 1;
            } else {
                // largest element is an a: it beats all j b's
                for (u, c) in table[i - 1][j].iter().enumerate() {
                    dist[u + j] += c;
                }
                for (u, c) in table[i][j - 1].iter().enumerate() {
                    dist[u] += c;
                }
            }
            table[i][j] = dist;
        }
    }
    let out = std::mem::take(&mut table[m][n]);
    debug_assert_eq!(out.len(), max_u + 1);
    out
}

fn normal_two_sided(z: f64) -> f64 {
    erfc(z / std::f64::consts::SQRT_2)
}

/// Mann-Whitney U test. Exact two-sided p for small untied samples,
/// otherwise the normal approximation with tie and continuity corrections.
pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64]) -> MannWhitney {
    let (m, n) = (sample_a.len(), sample_b.len());
    let combined: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let ranks = midranks(&combined);
    let rank_sum_a: f64 = ranks[..m].iter().sum();
    let mf = m as f64;
    let nf = n as f64;
    let u_a = rank_sum_a - mf * (mf + 1.0) / 2.0;
    let u_b = mf * nf - u_a;

    if m == 0 || n == 0 {
        return MannWhitney { u_a, u_b, p_value: 1.0, method: RankTestMethod::Exact };
    }

    let mut sorted = combined.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }

    if m + n <= EXACT_MAX_N && tie_term == 0.0 {
        let counts = exact_counts(m, n);
        let total: u64 = counts.iter().sum();
        let u = u_a.round() as usize;
        let lower: u64 = counts[..=u].iter().sum();
        let upper: u64 = counts[u..].iter().sum();
        let p = 2.0 * lower.min(upper) as f64 / total as f64;
        return MannWhitney { u_a, u_b, p_value: p.min(1.0), method: RankTestMethod::Exact };
    }

    let big_n = mf + nf;
    let mean = mf * nf / 2.0;
    let var = mf * nf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((u_a - mean).abs() - 0.5).max(0.0) / var.sqrt();
        normal_two_sided(z).min(1.0)
    };
    MannWhitney { u_a, u_b, p_value: p, method: RankTestMethod::NormalApprox }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert_eq!(r.u_a, 0.0);
        assert_eq!(r.u_b, 9.0);
        assert_eq!(r.method, RankTestMethod::Exact);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        let s = mann_whitney_u(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]);
        assert_eq!(s.p_value, r.p_value);
        assert_eq!(s.u_a, 9.0);
    }

    #[test]
    fn identical_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        assert_eq!(r.u_a, 4.5);
        assert_eq!(r.method, RankTestMethod::NormalApprox);
        assert!(r.p_value >= 0.99);
    }

    #[test]
    fn midranks_with_ties() {
        assert_eq!(midranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn exact_counts_sum_to_binomial() {
        let c = exact_counts(4, 3);
        assert_eq!(c.iter().sum::<u64>(), 35);
        assert_eq!(c.len(), 13);
        // symmetric
        assert!(c.iter().eq(c.iter().rev()));
    }

    #[test]
    fn large_sample_uses_normal_approximation() {
        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (10..30).map(|x| f64::from(x) + 0.5).collect();
        let r = mann_whitney_u(&a, &b);
        assert_eq!(r.method, RankTestMethod::NormalApprox);
        assert!(r.p_value < 0.05 && r.p_value > 0.0);
        assert_eq!(r.u_a + r.u_b, 400.0);
    }
}
