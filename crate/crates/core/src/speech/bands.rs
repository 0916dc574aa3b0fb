use std::sync::Arc;

use rustfft::{num_complex::Complex, Fft, FftPlanner};

use crate::{Error, Result};

/// Band edges in Hz, `band_count + 1` values spaced uniformly on the Bark
/// scale from 0 Hz to Nyquist.
pub fn band_edges(sample_rate: u32, band_count: usize) -> Result<Vec<f64>> {
    if band_count == 0 {
        return Err(Error::InvalidParameter("band_count must be at least 1".into()));
    }
    let nyquist = sample_rate as f64 / 2.0;
    let z_lo = hz_to_bark(0.0);
    let z_hi = hz_to_bark(nyquist);
    let mut edges: Vec<f64> = (0..=band_count)
        .map(|i| bark_to_hz(z_lo + (z_hi - z_lo) * i as f64 / band_count as f64))
        .collect();
    edges[0] = 0.0;
    edges[band_count] = nyquist;
    if edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "band edges for {band_count} bands at {sample_rate} Hz are not strictly increasing"
        )));
    }
    Ok(edges)
}

// Traunmüller's approximation.
fn hz_to_bark(f: f64) -> f64 {
    26.81 * f / (1960.0 + f) - 0.53
}

fn bark_to_hz(z: f64) -> f64 {
    1960.0 * (z + 0.53) / (26.28 - z)
}

/// Per-band magnitude: the root of the summed power of the bins whose
/// centre frequency falls in `[lo, hi)` (the last band also takes `hi`).
///
/// `bin_hz` is the spacing between bins. Bands containing no bin are 0.
pub fn critical_band_energies(spectrum: &[f64], bin_hz: f64, band_edges: &[f64]) -> Vec<f64> {
    let bands = band_edges.len().saturating_sub(1);
    let mut power = vec![0.0; bands];
    for (k, &mag) in spectrum.iter().enumerate() {
        if let Some(j) = band_of(k as f64 * bin_hz, band_edges) {
            power[j] += mag * mag;
        }
    }
    power.into_iter().map(f64::sqrt).collect()
}

fn band_of(freq: f64, edges: &[f64]) -> Option<usize> {
    let last = edges.len().checked_sub(2)?;
    if freq < edges[0] || freq > edges[last + 1] {
        return None;
    }
    // first edge strictly above freq
    let idx = edges.partition_point(|&e| e <= freq);
    Some(idx.saturating_sub(1).min(last))
}

/// Reusable forward FFT returning the one-sided magnitude spectrum.
pub(crate) struct SpectrumAnalyzer {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
}

impl SpectrumAnalyzer {
    pub fn new(len: usize) -> Self {
        Self {
            fft: FftPlanner::new().plan_fft_forward(len),
            buf: vec![Complex::default(); len],
        }
    }

    pub fn magnitudes(&mut self, frame: &[f64]) -> Vec<f64> {
        for (b, &x) in self.buf.iter_mut().zip(frame) {
            *b = Complex::new(x, 0.0);
        }
        self.fft.process(&mut self.buf);
        self.buf[..frame.len() / 2 + 1].iter().map(|c| c.norm()).collect()
    }
}

/// One-sided magnitude spectrum (`len/2 + 1` bins) of a real frame.
pub fn magnitude_spectrum(frame: &[f64]) -> Vec<f64> {
    SpectrumAnalyzer::new(frame.len()).magnitudes(frame)
}
