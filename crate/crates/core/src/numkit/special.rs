//! Log-space helpers for factorial-weighted sums.

/// ln(n!).
///
/// Exact products are used up to 170 (the largest factorial representable in
/// an `f64`); beyond that a Stirling series truncated after the n^-7 term,
/// whose error is far below one ulp there.
pub fn log_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 170 {
        let mut acc = 1.0_f64;
        for k in 2..=n {
            acc *= k as f64;
        }
        return acc.ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

/// Table of ln(k!) for k = 0..=n.
pub fn log_factorial_table(n: usize) -> Vec<f64> {
    (0..=n as u64).map(log_factorial).collect()
}

/// ln of the Poisson pmf with mean `mean` at `n`. `mean = 0` gives the
/// degenerate distribution at 0.
pub fn log_poisson_pmf(mean: f64, n: u64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + n as f64 * mean.ln() - log_factorial(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        let exact = 3_628_800_f64.ln();
        assert!((log_factorial(10) - exact).abs() <= 1e-12 * exact);
        assert!((log_factorial(10) - 15.104_412_573_075_516).abs() < 1e-12);
    }

    #[test]
    fn stirling_branch_matches_summation() {
        // Summation of ln k in extended steps: compare across the 170 seam.
        for n in [171_u64, 200, 500, 1500] {
            let direct: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
            let rel = (log_factorial(n) - direct).abs() / direct;
            assert!(rel < 1e-13, "n = {n}: rel err {rel}");
        }
    }

    #[test]
    fn table_matches_function() {
        let t = log_factorial_table(400);
        for (k, v) in t.iter().enumerate() {
            assert_eq!(*v, log_factorial(k as u64));
        }
    }

    #[test]
    fn poisson_pmf() {
        assert!((log_poisson_pmf(1.0, 0).exp() - (-1.0_f64).exp()).abs() < 1e-15);
        // Poisson(4) at 4.
        let p = log_poisson_pmf(4.0, 4).exp();
        assert!((p - (-4.0_f64).exp() * 256.0 / 24.0).abs() < 1e-15);
        assert_eq!(log_poisson_pmf(0.0, 0), 0.0);
        assert_eq!(log_poisson_pmf(0.0, 3), f64::NEG_INFINITY);
    }
}
