use serde::{Deserialize, Serialize};

use super::bands::{band_edges, critical_band_energies, SpectrumAnalyzer};
use crate::signal::{
    channel_mean, frame_count, frame_geometry, require_mono_or_stereo, window, WindowKind,
};
use crate::{AudioSignal, Error, Result};

/// Frequency-weighted segmental SNR configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FwSnrSegParams {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub band_count: usize,
    /// Per-band SNR clamp `[lo, hi]` in dB.
    pub snr_clamp: [f64; 2],
    /// Exponent applied to the reference band magnitude to form the weight.
    pub weight_exponent: f64,
    /// Reference frames quieter than this (dBFS, mean square) are skipped.
    pub silence_gate_db: f64,
}

impl Default for FwSnrSegParams {
    fn default() -> Self {
        Self {
            frame_ms: 30.0,
            hop_ms: 7.5,
            band_count: 25,
            snr_clamp: [-10.0, 35.0],
            weight_exponent: 0.2,
            silence_gate_db: -60.0,
        }
    }
}

impl FwSnrSegParams {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.snr_clamp;
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "snr_clamp needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(self.weight_exponent > 0.0 && self.weight_exponent <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "weight_exponent must be in (0, 1], got {}",
                self.weight_exponent
            )));
        }
        Ok(())
    }
}

/// Frequency-weighted segmental SNR of `test` against `reference`, in dB.
///
/// Stereo input is scored per channel and averaged; channels in which every
/// frame falls under the silence gate do not contribute.
pub fn fwsnrseg(reference: &AudioSignal, test: &AudioSignal, params: &FwSnrSegParams) -> Result<f64> {
    params.validate()?;
    reference.check_compatible(test)?;
    require_mono_or_stereo(reference, "fwSNRseg")?;
    let rate = reference.sample_rate();
    let (frame_len, hop) = frame_geometry(params.frame_ms, params.hop_ms, rate)?;
    let edges = band_edges(rate, params.band_count)?;
    let bin_hz = rate as f64 / frame_len as f64;
    let win = window(WindowKind::Hann, frame_len);
    let mut analyzer = SpectrumAnalyzer::new(frame_len);

    let mut scores = Vec::with_capacity(reference.channel_count());
    for (r, t) in reference.channels().iter().zip(test.channels()) {
        let mut sum = 0.0;
        let mut count = 0usize;
        for m in 0..frame_count(r.len(), frame_len, hop) {
            let span = m * hop..m * hop + frame_len;
            let (rf, tf) = (&r[span.clone()], &t[span]);
            let mean_square = rf.iter().map(|x| x * x).sum::<f64>() / frame_len as f64;
            if 10.0 * mean_square.log10() < params.silence_gate_db {
                continue;
            }
            let rw: Vec<f64> = rf.iter().zip(&win).map(|(x, w)| x * w).collect();
            let tw: Vec<f64> = tf.iter().zip(&win).map(|(x, w)| x * w).collect();
            let b_ref = critical_band_energies(&analyzer.magnitudes(&rw), bin_hz, &edges);
            let b_test = critical_band_energies(&analyzer.magnitudes(&tw), bin_hz, &edges);
            if let Some(score) = frame_score(&b_ref, &b_test, params) {
                sum += score;
                count += 1;
            }
        }
        if count > 0 {
            scores.push(sum / count as f64);
        }
    }
    if scores.is_empty() {
        return Err(Error::Degenerate(
            "fwSNRseg: no reference frame above the silence gate".into(),
        ));
    }
    channel_mean(&scores)
}

/// Weighted mean of clamped per-band SNRs, `None` when all weights vanish.
fn frame_score(b_ref: &[f64], b_test: &[f64], params: &FwSnrSegParams) -> Option<f64> {
    let [lo, hi] = params.snr_clamp;
    // accumulate the shortfall below the upper clamp so that a perfect
    // match scores exactly `hi`
    let mut shortfall = 0.0;
    let mut den = 0.0;
    for (&r, &t) in b_ref.iter().zip(b_test) {
        let diff2 = (r - t) * (r - t);
        let snr = if diff2 == 0.0 {
            hi
        } else {
            (10.0 * (r * r / diff2).log10()).clamp(lo, hi)
        };
        let w = r.powf(params.weight_exponent);
        shortfall += w * (hi - snr);
        den += w;
    }
    (den > 0.0).then(|| hi - shortfall / den)
}
