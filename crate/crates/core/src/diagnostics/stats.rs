//! Classical test statistics used by the cross-validation checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value and the
/// usual small-sample correction of the scaling `√n_e + 0.12 + 0.11/√n_e`.
/// Ties make the test conservative.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "KS test needs nonempty samples"
    );
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable_by(f64::total_cmp);
    y.sort_unstable_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let s = ne.sqrt();
    TestResult {
        statistic: d,
        p_value: kolmogorov_sf((s + 0.12 + 0.11 / s) * d),
    }
}

/// Pearson goodness-of-fit test with `k − 1` degrees of freedom.
pub fn chi_square_gof(observed: &[f64], expected: &[f64]) -> TestResult {
    assert_eq!(observed.len(), expected.len());
    assert!(observed.len() >= 2);
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).expect("positive degrees of freedom");
    TestResult {
        statistic: stat,
        p_value: dist.sf(stat),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn kolmogorov_values() {
        // Q(1) = 0.26999967167735456, Q(1.36) ≈ 0.0494
        assert_relative_eq!(
            kolmogorov_sf(1.0),
            0.269_999_671_677_354_6,
            max_relative = 1e-12
        );
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_detects_shift_and_accepts_null() {
        let mut rng = RngStream::new(0, 0);
        let a: Vec<f64> = (0..2000).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng.random()).collect();
        let c: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() + 0.1).collect();
        assert!(ks_two_sample(&a, &b).p_value > 0.01);
        assert!(ks_two_sample(&a, &c).p_value < 1e-6);
        assert_eq!(ks_two_sample(&a, &a).statistic, 0.0);
    }

    #[test]
    fn ks_statistic_brute_force() {
        let a = [0.1, 0.5, 0.5, 2.0];
        let b = [0.3, 0.5, 1.0];
        let mut d: f64 = 0.0;
        for &t in a.iter().chain(&b) {
            let fa = a.iter().filter(|&&x| x <= t).count() as f64 / 4.0;
            let fb = b.iter().filter(|&&x| x <= t).count() as f64 / 3.0;
            d = d.max((fa - fb).abs());
        }
        assert_relative_eq!(ks_two_sample(&a, &b).statistic, d);
    }

    #[test]
    fn chi_square_reference() {
        let r = chi_square_gof(&[10.0, 20.0, 30.0], &[20.0, 20.0, 20.0]);
        assert_relative_eq!(r.statistic, 10.0);
        // P(χ²₂ > 10) = e^{−5}
        assert_relative_eq!(r.p_value, (-5.0f64).exp(), max_relative = 1e-10);
    }
}
