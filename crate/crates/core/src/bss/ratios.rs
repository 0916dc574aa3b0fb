use serde::Serialize;

use super::decompose::{Decomposition, DecompositionMode};

/// Output range of every energy ratio, in dB (symmetric).
pub const RATIO_LIMIT_DB: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BssRatios {
    pub sdr: f64,
    pub sir: f64,
    pub sar: f64,
}

impl BssRatios {
    pub fn clamped(self) -> Self {
        let c = |v: f64| v.clamp(-RATIO_LIMIT_DB, RATIO_LIMIT_DB);
        Self {
            sdr: c(self.sdr),
            sir: c(self.sir),
            sar: c(self.sar),
        }
    }
}

/// `10 log10(num / den)`. A zero numerator gives `-inf`, otherwise a zero
/// denominator gives `+inf`.
fn ratio_db(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        f64::NEG_INFINITY
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        10.0 * (num / den).log10()
    }
}

/// Unclamped SDR/SIR/SAR.
///
/// The SAR numerator is `E[s_target + e_interf]` for FIR decompositions and
/// `E[s_target]` for scale-invariant ones; with the latter,
/// `10^(-SDR/10) = 10^(-SIR/10) + 10^(-SAR/10)`.
pub fn raw_ratios(dec: &Decomposition) -> BssRatios {
    let target = dec.s_target.energy();
    let interf = dec.e_interf.energy();
    let artif = dec.e_artif.energy();
    let distortion = dec
        .e_interf
        .add(&dec.e_artif)
        .expect("decomposition components share one shape")
        .energy();
    let sar_num = match dec.mode {
        DecompositionMode::FullFir { .. } => dec.artifact_free().energy(),
        DecompositionMode::ScaleInvariant => target,
    };
    BssRatios {
        sdr: ratio_db(target, distortion),
        sir: ratio_db(target, interf),
        sar: ratio_db(sar_num, artif),
    }
}

/// SDR/SIR/SAR clamped to `[-30, 30]` dB.
pub fn ratios(dec: &Decomposition) -> BssRatios {
    raw_ratios(dec).clamped()
}
