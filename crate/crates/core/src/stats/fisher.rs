use crate::{Error, Result};

/// Largest |γ| passed to the Fisher-z transform.
pub const FISHER_CLIP: f64 = 0.999999;

/// `½ ln((1+γ)/(1−γ))`, infinite at |γ| = 1.
pub fn fisher_z(gamma: f64) -> f64 {
    gamma.atanh()
}

pub fn fisher_z_inv(z: f64) -> f64 {
    z.tanh()
}

/// Clips |γ| to [`FISHER_CLIP`]; the flag reports whether clipping
/// happened. |γ| > 1 or `NaN` is an error.
pub fn clip_for_fisher(gamma: f64) -> Result<(f64, bool)> {
    if !(gamma.abs() <= 1.0) {
        return Err(Error::Stats(format!("correlation {gamma} outside [-1, 1]")));
    }
    if gamma.abs() > FISHER_CLIP {
        Ok((FISHER_CLIP.copysign(gamma), true))
    } else {
        Ok((gamma, false))
    }
}
