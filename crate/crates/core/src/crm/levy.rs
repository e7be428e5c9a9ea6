//! Lévy intensity of the GGP and the quantities derived from it.
//!
//! All functions are per unit of restriction size: the intensity of the
//! restricted measure on `[0, α]` is `α ρ(dw)`.

use statrs::function::gamma::{gamma_lr, gamma_ur};

use super::params::GgpParams;
use super::special::{ln_gamma, ln_upper_gamma};
use crate::error::{Error, Result};

/// `ln ρ(w) = −(1+σ) ln w − τ w − ln Γ(1−σ)`, no domain check.
#[inline]
pub fn ln_levy_density_unchecked(sigma: f64, tau: f64, w: f64) -> f64 {
    -(1.0 + sigma) * w.ln() - tau * w - ln_gamma(1.0 - sigma)
}

pub fn ln_levy_density(params: &GgpParams, w: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::domain(format!("Lévy density needs w > 0, got {w}")));
    }
    Ok(ln_levy_density_unchecked(params.sigma(), params.tau(), w))
}

/// `ρ(w) = w^{−1−σ} e^{−τw} / Γ(1−σ)`.
pub fn levy_density(params: &GgpParams, w: f64) -> Result<f64> {
    ln_levy_density(params, w).map(f64::exp)
}

/// `ln ρ̄(x)` where `ρ̄(x) = ∫_x^∞ ρ(dw)`.
pub fn ln_tail_intensity(params: &GgpParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "tail intensity needs x > 0, got {x}"
        )));
    }
    Ok(ln_tail_unchecked(params.sigma(), params.tau(), x))
}

pub(crate) fn ln_tail_unchecked(sigma: f64, tau: f64, x: f64) -> f64 {
    if tau == 0.0 {
        -sigma * x.ln() - sigma.ln() - ln_gamma(1.0 - sigma)
    } else {
        sigma * tau.ln() + ln_upper_gamma(-sigma, tau * x) - ln_gamma(1.0 - sigma)
    }
}

pub fn tail_intensity(params: &GgpParams, x: f64) -> Result<f64> {
    ln_tail_intensity(params, x).map(f64::exp)
}

/// Total Lévy mass `ρ̄(0+)`; finite only when `σ < 0`, where it equals
/// `τ^σ / (−σ)`.
pub fn total_levy_mass(params: &GgpParams) -> f64 {
    if params.sigma() < 0.0 {
        params.tau().powf(params.sigma()) / -params.sigma()
    } else {
        f64::INFINITY
    }
}

const LN_X_MIN: f64 = -690.775_527_898_213_7; // ln 1e-300
const LN_X_MAX: f64 = 690.775_527_898_213_7;

/// Inverse tail intensity: the `x` with `ρ̄(x) = y`.
///
/// Closed form when `τ = 0`; otherwise a safeguarded Newton iteration on
/// `ln ρ̄` against `ln x` inside the bracket `[1e−300, 1e300]`, falling back to
/// bisection whenever a Newton step leaves the bracket.
pub fn inv_tail_intensity(params: &GgpParams, y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain(format!(
            "inverse tail intensity needs y > 0, got {y}"
        )));
    }
    let total = total_levy_mass(params);
    if y >= total {
        return Err(Error::NotInvertible { y, total });
    }
    Ok(inv_tail_from(params.sigma(), params.tau(), y.ln(), None))
}

/// Same as [`inv_tail_intensity`] on `ln y`, with an optional warm start
/// `ln x0`. Callers guarantee `y` is below the total Lévy mass.
pub(crate) fn inv_tail_from(sigma: f64, tau: f64, ln_y: f64, warm: Option<f64>) -> f64 {
    if tau == 0.0 {
        // x = (σ Γ(1−σ) y)^{−1/σ}
        return (-(sigma.ln() + ln_gamma(1.0 - sigma) + ln_y) / sigma).exp();
    }
    let lg = ln_gamma(1.0 - sigma);
    // d ln ρ̄ / d ln x = −x ρ(x) / ρ̄(x)
    let slope = |u: f64, ln_tail: f64| {
        let x = u.exp();
        -(u + (-(1.0 + sigma) * u - tau * x - lg) - ln_tail).exp()
    };

    let mut lo = LN_X_MIN;
    let mut hi = LN_X_MAX;
    let mut u = match warm {
        Some(w) if w > lo && w < hi => w,
        _ => {
            if sigma > 0.0 {
                // stable-tail guess, exact as x → 0
                (-(sigma.ln() + lg + ln_y - sigma * tau.ln()) / sigma)
                    .min(hi - 1.0)
                    .max(lo + 1.0)
            } else {
                0.0
            }
        }
    };
    let mut prev_err = f64::INFINITY;
    for _ in 0..300 {
        let ln_tail = ln_tail_unchecked(sigma, tau, u.exp());
        let fu = ln_tail - ln_y;
        if fu == 0.0 {
            return u.exp();
        }
        if fu > 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let d = slope(u, ln_tail);
        let mut next = if d.is_finite() && d < 0.0 && fu.is_finite() {
            u - fu / d
        } else {
            f64::NAN
        };
        // bisect when Newton leaves the bracket or stalls
        if !(next > lo && next < hi) || fu.abs() > 0.5 * prev_err {
            next = 0.5 * (lo + hi);
        }
        prev_err = fu.abs();
        if (next - u).abs() <= 1e-14 * (1.0 + u.abs()) || hi - lo <= 1e-14 * (1.0 + u.abs()) {
            return next.exp();
        }
        u = next;
    }
    u.exp()
}

/// Laplace exponent per unit `α`: `ψ(t) = ∫ (1 − e^{−tw}) ρ(dw)`.
/// `E[e^{−t W*_α}] = e^{−α ψ(t)}`.
pub fn laplace_exponent(params: &GgpParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!(
            "Laplace exponent needs t ≥ 0, got {t}"
        )));
    }
    Ok(psi(params.sigma(), params.tau(), t))
}

/// `ψ_{σ,τ}(t)` without checks. Valid on the admissible region.
#[inline]
pub fn psi(sigma: f64, tau: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if tau == 0.0 {
        return t.powf(sigma) / sigma;
    }
    let l = (t / tau).ln_1p();
    if sigma == 0.0 {
        l
    } else {
        // τ^σ ((1 + t/τ)^σ − 1) / σ
        tau.powf(sigma) * (sigma * l).exp_m1() / sigma
    }
}

/// `κ(m, z) = ∫ w^m e^{−zw} ρ(dw) = Γ(m−σ)/Γ(1−σ) (z+τ)^{σ−m}`.
pub fn kappa(params: &GgpParams, m: u64, z: f64) -> Result<f64> {
    ln_kappa(params, m, z).map(f64::exp)
}

pub fn ln_kappa(params: &GgpParams, m: u64, z: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::domain("kappa needs m ≥ 1"));
    }
    if !(z >= 0.0) || !(z + params.tau() > 0.0) {
        return Err(Error::domain(format!(
            "kappa needs z ≥ 0 and z + τ > 0, got z={z}"
        )));
    }
    Ok(ln_kappa_unchecked(
        params.sigma(),
        params.tau(),
        m as f64,
        z,
    ))
}

#[inline]
pub fn ln_kappa_unchecked(sigma: f64, tau: f64, m: f64, z: f64) -> f64 {
    ln_gamma(m - sigma) - ln_gamma(1.0 - sigma) + (sigma - m) * (z + tau).ln()
}

/// `∫_0^ε w ρ(dw)`: mean mass per unit `α` carried by jumps below `ε`.
pub fn mass_below(params: &GgpParams, eps: f64) -> f64 {
    let (s, t) = (params.sigma(), params.tau());
    if t == 0.0 {
        eps.powf(1.0 - s) / ((1.0 - s) * ln_gamma(1.0 - s).exp())
    } else {
        t.powf(s - 1.0) * gamma_lr(1.0 - s, t * eps)
    }
}

/// `∫_ε^∞ w ρ(dw)`; infinite for the stable case `τ = 0`.
pub fn mass_above(params: &GgpParams, eps: f64) -> f64 {
    let (s, t) = (params.sigma(), params.tau());
    if t == 0.0 {
        f64::INFINITY
    } else {
        t.powf(s - 1.0) * gamma_ur(1.0 - s, t * eps)
    }
}
