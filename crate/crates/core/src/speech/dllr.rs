use serde::{Deserialize, Serialize};

use super::lpc::{autocorrelation, levinson_durbin, quadratic_form};
use crate::signal::{
    channel_mean, frame_count, frame_geometry, require_mono_or_stereo, resample, window, WindowKind,
};
use crate::{AudioSignal, Error, Result};

/// Per-frame distances are limited to this value before averaging.
pub const LLR_CAP: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DllrParams {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub lpc_order: usize,
    /// Both signals are resampled to this rate before analysis.
    pub internal_rate: u32,
}

impl Default for DllrParams {
    fn default() -> Self {
        Self {
            frame_ms: 30.0,
            hop_ms: 7.5,
            lpc_order: 16,
            internal_rate: 16000,
        }
    }
}

/// Raw log-likelihood ratio of one frame pair (before flooring and
/// capping), or `None` when either frame has no LPC model.
///
/// Both frames are expected to be windowed already.
pub fn llr_frame(reference: &[f64], test: &[f64], order: usize) -> Option<f64> {
    let r_ref = autocorrelation(reference, order);
    let r_test = autocorrelation(test, order);
    let a_ref = levinson_durbin(&r_ref).ok()?.coefficients;
    let a_test = levinson_durbin(&r_test).ok()?.coefficients;
    let num = quadratic_form(&a_test, &r_ref);
    let den = quadratic_form(&a_ref, &r_ref);
    if !(den > 0.0 && num > 0.0) {
        return None;
    }
    Some((num / den).ln())
}

/// Floors each frame distance at 0, caps it at [`LLR_CAP`], and averages.
pub fn mean_capped_llr(per_frame: &[f64]) -> Option<f64> {
    if per_frame.is_empty() {
        return None;
    }
    let sum: f64 = per_frame.iter().map(|d| d.clamp(0.0, LLR_CAP)).sum();
    Some(sum / per_frame.len() as f64)
}

/// Log-likelihood ratio distance of `test` from `reference`, in `[0, 2]`.
pub fn dllr(reference: &AudioSignal, test: &AudioSignal, params: &DllrParams) -> Result<f64> {
    if params.lpc_order < 2 {
        return Err(Error::InvalidParameter(format!(
            "lpc_order must be at least 2, got {}",
            params.lpc_order
        )));
    }
    reference.check_compatible(test)?;
    require_mono_or_stereo(reference, "dLLR")?;
    let reference = resample(reference, params.internal_rate)?;
    let test = resample(test, params.internal_rate)?;
    let (frame_len, hop) = frame_geometry(params.frame_ms, params.hop_ms, params.internal_rate)?;
    if frame_len <= params.lpc_order {
        return Err(Error::InvalidParameter(format!(
            "{frame_len}-sample frames are too short for LPC order {}",
            params.lpc_order
        )));
    }
    let win = window(WindowKind::Hann, frame_len);

    let mut scores = Vec::new();
    for (r, t) in reference.channels().iter().zip(test.channels()) {
        let distances: Vec<f64> = (0..frame_count(r.len(), frame_len, hop))
            .filter_map(|m| {
                let span = m * hop..m * hop + frame_len;
                let rw: Vec<f64> = r[span.clone()].iter().zip(&win).map(|(x, w)| x * w).collect();
                let tw: Vec<f64> = t[span].iter().zip(&win).map(|(x, w)| x * w).collect();
                llr_frame(&rw, &tw, params.lpc_order)
            })
            .collect();
        if let Some(mean) = mean_capped_llr(&distances) {
            scores.push(mean);
        }
    }
    if scores.is_empty() {
        return Err(Error::Degenerate("dLLR: every frame is degenerate".into()));
    }
    channel_mean(&scores)
}
