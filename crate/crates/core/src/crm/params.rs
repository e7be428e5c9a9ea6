use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters `(α, σ, τ)` of a GGP restricted to `[0, α]`.
///
/// Admissible region: `σ ≤ 0, τ > 0` (finite activity when `σ < 0`,
/// gamma process when `σ = 0`) or `0 < σ < 1, τ ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct GgpParams {
    alpha: f64,
    sigma: f64,
    tau: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha: f64,
    sigma: f64,
    tau: f64,
}

impl TryFrom<RawParams> for GgpParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        GgpParams::new(r.alpha, r.sigma, r.tau)
    }
}

impl From<GgpParams> for RawParams {
    fn from(p: GgpParams) -> Self {
        RawParams {
            alpha: p.alpha,
            sigma: p.sigma,
            tau: p.tau,
        }
    }
}

pub fn in_region(sigma: f64, tau: f64) -> bool {
    if !(sigma.is_finite() && tau.is_finite()) {
        return false;
    }
    (sigma <= 0.0 && tau > 0.0) || (sigma > 0.0 && sigma < 1.0 && tau >= 0.0)
}

impl GgpParams {
    pub fn new(alpha: f64, sigma: f64, tau: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        if !in_region(sigma, tau) {
            return Err(Error::OutOfRegion { sigma, tau });
        }
        Ok(Self { alpha, sigma, tau })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Same `(σ, τ)` with a different restriction size.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.sigma, self.tau)
    }

    /// Infinitely many jumps on any interval.
    pub fn is_infinite_activity(&self) -> bool {
        self.sigma >= 0.0
    }

    /// Exponentially tilted parameters `(α, σ, τ + c)`.
    pub fn tilted(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(Error::domain(format!("tilt must be nonnegative, got {c}")));
        }
        Self::new(self.alpha, self.sigma, self.tau + c)
    }
}

/// Validates raw `(α, σ, τ)`.
pub fn validate_params(alpha: f64, sigma: f64, tau: f64) -> Result<GgpParams> {
    GgpParams::new(alpha, sigma, tau)
}

/// Law of the total mass tilted by `e^{−c w}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltedStableSpec {
    pub base: GgpParams,
    pub tilt: f64,
}

impl TiltedStableSpec {
    pub fn new(base: GgpParams, tilt: f64) -> Result<Self> {
        if !(tilt >= 0.0) || !tilt.is_finite() {
            return Err(Error::domain(format!(
                "tilt must be nonnegative, got {tilt}"
            )));
        }
        Ok(Self { base, tilt })
    }
}
