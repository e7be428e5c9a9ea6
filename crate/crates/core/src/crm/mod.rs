//! Lévy-measure mathematics and exact samplers for the GGP family.

pub mod levy;
pub mod mass;
pub mod params;
pub mod special;

pub use levy::{
    inv_tail_intensity, kappa, laplace_exponent, levy_density, ln_kappa, ln_levy_density,
    mass_above, mass_below, tail_intensity, total_levy_mass,
};
pub use mass::{sample_tilted_total_mass, sample_total_mass, sample_truncated_poisson};
pub use params::{in_region, validate_params, GgpParams, TiltedStableSpec};
