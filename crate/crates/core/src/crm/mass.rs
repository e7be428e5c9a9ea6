//! Exact samplers for the total mass `W*_α = W_α([0, α])` and for its
//! exponentially tilted versions, plus the zero-truncated Poisson.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};

use super::params::{GgpParams, TiltedStableSpec};
use crate::error::{Error, Result};

/// One exact draw of `W*_α`.
///
/// * `σ = 0`: Gamma(α, rate τ).
/// * `σ < 0`: compound Poisson, `Poisson(−(α/σ) τ^σ)` jumps i.i.d. Gamma(−σ, τ).
/// * `0 < σ < 1`: exponentially tilted stable with Laplace transform
///   `exp(−(α/σ)((τ+t)^σ − τ^σ))`, drawn by double rejection.
pub fn sample_total_mass<R: Rng + ?Sized>(params: &GgpParams, rng: &mut R) -> f64 {
    let (alpha, sigma, tau) = (params.alpha(), params.sigma(), params.tau());
    if sigma == 0.0 {
        gamma_draw(alpha, tau, rng)
    } else if sigma < 0.0 {
        let rate = -(alpha / sigma) * tau.powf(sigma);
        let k = poisson_draw(rate, rng);
        if k == 0 {
            0.0
        } else {
            gamma_draw(-sigma * k as f64, tau, rng)
        }
    } else {
        // W = V0^{1/σ} S with S tilted stable of index σ and Λ = V0 τ^σ.
        let v0 = alpha / sigma;
        let big_lambda = v0 * tau.powf(sigma);
        let ln_s = ln_tilted_stable(sigma, big_lambda, rng);
        (v0.ln() / sigma + ln_s).exp()
    }
}

/// Draw from the total-mass law tilted by `e^{−c w}`: the `(α, σ, τ + c)`
/// total-mass law in every regime (for `σ < 0` tilting a compound Poisson
/// tilts both the rate and the jump law, which is again of GGP form).
pub fn sample_tilted_total_mass<R: Rng + ?Sized>(
    spec: &TiltedStableSpec,
    rng: &mut R,
) -> Result<f64> {
    let params = spec.base.tilted(spec.tilt)?;
    Ok(sample_total_mass(&params, rng))
}

pub(crate) fn gamma_draw<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("gamma parameters validated by caller")
        .sample(rng)
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    let x: f64 = Poisson::new(rate)
        .expect("finite positive Poisson rate")
        .sample(rng);
    x as u64
}

/// Zero-truncated Poisson draw, `P(k) ∝ λ^k / k!` for `k ≥ 1`.
pub fn sample_truncated_poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<u64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!(
            "truncated Poisson needs rate > 0, got {rate}"
        )));
    }
    Ok(truncated_poisson(rate, rng))
}

#[inline]
pub(crate) fn truncated_poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate < 1.0 {
        // Inverse CDF from k = 1; P(1) = λ / (e^λ − 1).
        let u: f64 = rng.random();
        let mut k = 1u64;
        let mut pk = rate / rate.exp_m1();
        let mut cdf = pk;
        while u > cdf && k < 1_000 {
            k += 1;
            pk *= rate / k as f64;
            cdf += pk;
        }
        k
    } else {
        // Acceptance probability 1 − e^{−λ} ≥ 0.63.
        let dist = Poisson::new(rate).expect("finite positive Poisson rate");
        loop {
            let k: f64 = dist.sample(rng);
            if k >= 1.0 {
                return k as u64;
            }
        }
    }
}

/// Zolotarev's function in log form:
/// `ln B(u)` with `B(u) = sin(αu)^α sin((1−α)u)^{1−α} / sin u`.
#[inline]
fn ln_zolotarev_b(alpha: f64, u: f64) -> f64 {
    alpha * (alpha * u).sin().ln() + (1.0 - alpha) * ((1.0 - alpha) * u).sin().ln() - u.sin().ln()
}

/// `ln S` for a positive stable `S` with `E[e^{−tS}] = e^{−t^α}` (Kanter).
pub(crate) fn ln_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    loop {
        let u = PI * rng.random::<f64>();
        if u <= 0.0 {
            continue;
        }
        let e: f64 = Exp1.sample(rng);
        let ln_a = ln_zolotarev_b(alpha, u) / (1.0 - alpha);
        let v = (1.0 - alpha) / alpha * (ln_a - e.ln());
        if v.is_finite() {
            return v;
        }
    }
}

/// `ln S` where `S` has Laplace transform `exp(−((λ+t)^α − λ^α))` and
/// `Λ = λ^α`.
///
/// For `Λ ≤ 1` a stable draw is accepted with probability `e^{−λS}` (mean
/// acceptance `e^{−Λ}`). Larger `Λ` uses a double rejection on the joint law
/// of the Zolotarev angle `U` and `X = S^{−α/(1−α)}`, whose density is
/// `∝ A(u) exp(−A(u) x − λ x^{−(1−α)/α})` with `A = B^{1/(1−α)}`: `U` comes
/// from a dominating mixture (Gaussian bump at 0, flat, and a `1/√(π−u)`
/// spike) and `X | U` from a normal/flat/exponential envelope around the mode
/// of its log-concave conditional. Expected cost is bounded uniformly in `Λ`.
pub(crate) fn ln_tilted_stable<R: Rng + ?Sized>(alpha: f64, big_lambda: f64, rng: &mut R) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    if big_lambda <= 1.0 {
        let ln_lambda = big_lambda.ln() / alpha;
        loop {
            let ln_s = ln_positive_stable(alpha, rng);
            let log_accept = -(ln_lambda + ln_s).exp();
            let e: f64 = Exp1.sample(rng);
            if -e <= log_accept || big_lambda == 0.0 {
                return ln_s;
            }
        }
    }
    double_rejection(alpha, big_lambda, rng)
}

fn double_rejection<R: Rng + ?Sized>(alpha: f64, big_lambda: f64, rng: &mut R) -> f64 {
    let c1 = FRAC_PI_2.sqrt();
    let sqrt_pi = PI.sqrt();
    let b = (1.0 - alpha) / alpha;
    let ln_b0 = alpha * alpha.ln() + (1.0 - alpha) * (1.0 - alpha).ln();
    let ln_big_lambda = big_lambda.ln();

    let gamma = big_lambda * alpha * (1.0 - alpha);
    let sg = gamma.sqrt();
    let c3 = (2.0 + c1) * sg;
    let xi = (1.0 + SQRT_2 * c3) / PI;
    let psi = c3 * (-gamma * PI * PI / 8.0).exp() / sqrt_pi;
    let w1 = c1 * xi / sg;
    let w2 = 2.0 * sqrt_pi * psi;
    let w3 = xi * PI;

    loop {
        // Angle U from the dominating mixture.
        let v: f64 = rng.random();
        let u = if gamma >= 1.0 {
            if v < w1 / (w1 + w2) {
                let n: f64 = StandardNormal.sample(rng);
                n.abs() / sg
            } else {
                let w: f64 = rng.random();
                PI * (1.0 - w * w)
            }
        } else {
            let w: f64 = rng.random();
            if v < w3 / (w3 + w2) {
                PI * w
            } else {
                PI * (1.0 - w * w)
            }
        };
        if !(u > 0.0 && u < PI) {
            continue;
        }
        let ln_bu = ln_zolotarev_b(alpha, u);
        let zeta2 = (ln_bu - ln_b0).exp();
        let zeta = zeta2.sqrt();
        // Exponential-tail scale of the X envelope.
        let z = 1.0 / -(-(alpha / (sg * zeta)).ln_1p() / alpha).exp_m1();
        let target = ((1.0 + c1) * sg * zeta + z) * (-big_lambda * (zeta2 - 1.0)).exp();
        let mut dom = psi / (PI - u).sqrt();
        dom += if gamma >= 1.0 {
            xi * (-gamma * u * u / 2.0).exp()
        } else {
            xi
        };
        let w: f64 = rng.random();
        if !(w * PI * dom <= target) {
            continue;
        }

        // X | U around the mode m of exp(−a x − λ x^{−b}).
        let ln_a = ln_bu / (1.0 - alpha);
        let a = ln_a.exp();
        let ln_m = ln_big_lambda + alpha * (b.ln() - ln_a);
        let m = ln_m.exp();
        let delta = (alpha * m / a).sqrt();
        let a1 = delta * c1;
        let a3 = z / a;
        let s = a1 + delta + a3;
        let v2: f64 = rng.random();
        let (x, correction) = if v2 < a1 / s {
            let n: f64 = StandardNormal.sample(rng);
            (m - delta * n.abs(), n * n / 2.0)
        } else if v2 < (a1 + delta) / s {
            (m + delta * rng.random::<f64>(), 0.0)
        } else {
            let e: f64 = Exp1.sample(rng);
            (m + delta + e * a3, e)
        };
        if !(x > 0.0) || !x.is_finite() {
            continue;
        }
        // φ(x) = a(x − m) + λ(x^{−b} − m^{−b}) ≥ 0
        let lam_m_b = (ln_big_lambda / alpha - b * ln_m).exp();
        let phi = a * (x - m) + lam_m_b * ((b * (ln_m - x.ln())).exp() - 1.0);
        let e: f64 = Exp1.sample(rng);
        if phi - correction <= e {
            return -b * x.ln();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crm::levy::psi;
    use crate::rng::RngStream;

    fn params(a: f64, s: f64, t: f64) -> GgpParams {
        GgpParams::new(a, s, t).unwrap()
    }

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    /// Empirical Laplace transform against `exp(−α ψ(t))` within `k` SEs.
    fn check_laplace(p: &GgpParams, draws: &[f64], ts: &[f64], k: f64) {
        for &t in ts {
            let vals: Vec<f64> = draws.iter().map(|w| (-t * w).exp()).collect();
            let (m, sd) = mean_sd(&vals);
            let se = sd / (draws.len() as f64).sqrt();
            let expected = (-p.alpha() * psi(p.sigma(), p.tau(), t)).exp();
            assert!(
                (m - expected).abs() <= k * se + 1e-12,
                "params {p:?} t={t}: empirical {m} vs {expected} (se {se})"
            );
        }
    }

    #[test]
    fn envelope_dominates_angle_marginal() {
        // t(u) ≤ π d(u) on a grid of (α, Λ): the precondition for exactness.
        let c1 = FRAC_PI_2.sqrt();
        for ai in 1..50 {
            let alpha = ai as f64 / 50.0;
            let ln_b0 = alpha * alpha.ln() + (1.0 - alpha) * (1.0 - alpha).ln();
            for li in 0..40 {
                let big_lambda = 10f64.powf(li as f64 * 0.15);
                let gamma = big_lambda * alpha * (1.0 - alpha);
                let sg = gamma.sqrt();
                let c3 = (2.0 + c1) * sg;
                let xi = (1.0 + SQRT_2 * c3) / PI;
                let ln_psi = c3.ln() - gamma * PI * PI / 8.0 - 0.5 * PI.ln();
                for ui in 1..2000 {
                    let u = PI * ui as f64 / 2000.0;
                    let zeta2 = (ln_zolotarev_b(alpha, u) - ln_b0).exp();
                    let zeta = zeta2.sqrt();
                    let z = 1.0 / -(-(alpha / (sg * zeta)).ln_1p() / alpha).exp_m1();
                    let ln_t = ((1.0 + c1) * sg * zeta + z).ln() - big_lambda * (zeta2 - 1.0);
                    let l1 = ln_psi - 0.5 * (PI - u).ln();
                    let l2 = if gamma >= 1.0 {
                        xi.ln() - gamma * u * u / 2.0
                    } else {
                        xi.ln()
                    };
                    let hi = l1.max(l2);
                    let ln_d = hi + ((l1 - hi).exp() + (l2 - hi).exp()).ln() + PI.ln();
                    assert!(ln_t <= ln_d + 1e-12, "α={alpha} Λ={big_lambda} u={u}");
                }
            }
        }
    }

    #[test]
    fn gamma_total_mass_mean() {
        let p = params(300.0, 0.0, 1.0);
        let mut rng = RngStream::new(1, 0);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_total_mass(&p, &mut rng))
            .collect();
        let (m, sd) = mean_sd(&draws);
        let se = sd / (draws.len() as f64).sqrt();
        assert!((m - 300.0).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn tilted_stable_total_mass_mean() {
        // E[W*] = α τ^{σ−1}
        let p = params(300.0, 0.5, 1.0);
        let mut rng = RngStream::new(2, 0);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_total_mass(&p, &mut rng))
            .collect();
        let (m, sd) = mean_sd(&draws);
        let se = sd / (draws.len() as f64).sqrt();
        assert!((m - 300.0).abs() < 3.0 * se, "{m} ± {se}");
        // Var = α σ... second cumulant α (1−σ) τ^{σ−2}
        let var = sd * sd;
        assert!((var / 150.0 - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn laplace_transform_grid() {
        let mut rng = RngStream::new(3, 0);
        for &(a, s, t) in &[
            (1.0, 0.5, 1.0),
            (5.0, 0.2, 0.5),
            (2.0, 0.8, 3.0),
            (50.0, 0.3, 2.0),
            (0.5, 0.5, 0.0),
            (3.0, 0.05, 1.0),
            (10.0, 0.95, 1.0),
            (4.0, -0.7, 1.5),
        ] {
            let p = params(a, s, t);
            let draws: Vec<f64> = (0..40_000)
                .map(|_| sample_total_mass(&p, &mut rng))
                .collect();
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            let ts: Vec<f64> = [0.1, 0.5, 1.0, 2.0]
                .iter()
                .map(|x| x / mean.max(1e-3))
                .collect();
            check_laplace(&p, &draws, &ts, 4.0);
        }
    }

    #[test]
    fn both_regimes_agree_at_switch() {
        // Λ just below and above 1 must give the same law; compare moments.
        let mut rng = RngStream::new(4, 0);
        for &alpha in &[0.3, 0.7] {
            for &lam in &[0.999, 1.001, 3.0] {
                let draws: Vec<f64> = (0..100_000)
                    .map(|_| ln_tilted_stable(alpha, lam, &mut rng).exp())
                    .collect();
                let (m, sd) = mean_sd(&draws);
                // Laplace exponent (λ+t)^α − λ^α: mean α λ^{α−1}, var α(1−α) λ^{α−2}
                let l = lam.powf(1.0 / alpha);
                let mean = alpha * l.powf(alpha - 1.0);
                let var = alpha * (1.0 - alpha) * l.powf(alpha - 2.0);
                let se = sd / (draws.len() as f64).sqrt();
                assert!(
                    (m - mean).abs() < 4.0 * se,
                    "α={alpha} Λ={lam}: {m} vs {mean}"
                );
                assert!(
                    (sd * sd / var - 1.0).abs() < 0.05,
                    "α={alpha} Λ={lam}: var {} vs {var}",
                    sd * sd
                );
            }
        }
    }

    #[test]
    fn huge_tilt_is_fast_and_correct() {
        let mut rng = RngStream::new(5, 0);
        let p = params(200.0, 0.4, 1.0).tilted(5_000.0).unwrap();
        let draws: Vec<f64> = (0..20_000)
            .map(|_| sample_total_mass(&p, &mut rng))
            .collect();
        let (m, sd) = mean_sd(&draws);
        let mean = 200.0 * p.tau().powf(0.4 - 1.0);
        assert!((m - mean).abs() < 4.0 * sd / (draws.len() as f64).sqrt());
    }

    #[test]
    fn tilting_identity() {
        // E[e^{−tX}] = exp(−α[ψ(t+c) − ψ(c)])
        let mut rng = RngStream::new(6, 0);
        for &(a, s, t, c) in &[
            (3.0, 0.5, 1.0, 2.0),
            (2.0, 0.0, 1.0, 1.5),
            (4.0, -1.0, 1.0, 0.5),
            (1.0, 0.7, 0.0, 1.0),
        ] {
            let base = params(a, s, t);
            let spec = TiltedStableSpec::new(base, c).unwrap();
            let draws: Vec<f64> = (0..10_000)
                .map(|_| sample_tilted_total_mass(&spec, &mut rng).unwrap())
                .collect();
            for &tt in &[0.5, 1.0, 2.0] {
                let vals: Vec<f64> = draws.iter().map(|w| (-tt * w).exp()).collect();
                let (m, sd) = mean_sd(&vals);
                let expected = (-a * (psi(s, t, tt + c) - psi(s, t, c))).exp();
                assert!(
                    (m - expected).abs() <= 4.0 * sd / 100.0 + 1e-12,
                    "{base:?} c={c} t={tt}"
                );
            }
        }
    }

    #[test]
    fn truncated_poisson_mean() {
        let mut rng = RngStream::new(7, 0);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| truncated_poisson(1.0, &mut rng) as f64)
            .collect();
        let (m, sd) = mean_sd(&draws);
        let expected = 1.0 / (1.0 - (-1.0f64).exp());
        assert!((m - expected).abs() < 3.0 * sd / (draws.len() as f64).sqrt());
        for &rate in &[0.3, 2.5, 40.0] {
            let draws: Vec<f64> = (0..50_000)
                .map(|_| truncated_poisson(rate, &mut rng) as f64)
                .collect();
            let (m, sd) = mean_sd(&draws);
            let expected = rate / (1.0 - (-rate).exp());
            assert!(
                (m - expected).abs() < 4.0 * sd / (draws.len() as f64).sqrt(),
                "rate {rate}"
            );
        }
    }

    #[test]
    fn truncated_poisson_support_and_limits() {
        let mut rng = RngStream::new(8, 0);
        assert!((0..1_000_000).all(|_| truncated_poisson(0.7, &mut rng) >= 1));
        assert!((0..100_000).all(|_| truncated_poisson(1e-9, &mut rng) == 1));
        assert!(sample_truncated_poisson(0.0, &mut rng).is_err());
        assert!(sample_truncated_poisson(-1.0, &mut rng).is_err());
    }

    #[test]
    fn compound_poisson_mass_has_atom_at_zero() {
        // P(W* = 0) = exp(−(α/−σ) τ^σ) = e^{−1} for α=1, σ=−1, τ=1
        let p = params(1.0, -1.0, 1.0);
        let mut rng = RngStream::new(9, 0);
        let n = 50_000;
        let zeros = (0..n)
            .filter(|_| sample_total_mass(&p, &mut rng) == 0.0)
            .count() as f64
            / n as f64;
        let expected = (-1.0f64).exp();
        assert!((zeros - expected).abs() < 4.0 * (expected * (1.0 - expected) / n as f64).sqrt());
    }
}
