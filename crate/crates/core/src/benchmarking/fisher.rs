use statrs::function::factorial::ln_binomial;

// Tables whose probability is within this relative margin of the observed
// one count as "as extreme".
const REL_TOL: f64 = 1e-7;

/// Two-sided Fisher exact test comparing `k1` successes out of `n1` with
/// `k2` out of `n2`. Sums the probabilities of all tables with the same
/// margins that are no more likely than the observed table.
pub fn proportion_test(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    assert!(k1 <= n1 && k2 <= n2, "successes cannot exceed trials");
    let successes = k1 + k2;
    let total = n1 + n2;
    let ln_denominator = ln_binomial(total, successes);
    let ln_pmf = |x: u64| ln_binomial(n1, x) + ln_binomial(n2, successes - x) - ln_denominator;

    let lo = successes.saturating_sub(n2);
    let hi = successes.min(n1);
    let observed = ln_pmf(k1).exp();
    let p: f64 = (lo..=hi).map(|x| ln_pmf(x).exp()).filter(|&q| q <= observed * (1.0 + REL_TOL)).sum();
    p.min(1.0)
}
