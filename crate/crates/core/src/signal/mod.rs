//! Audio container and the primitives every measure builds on.

mod frame;
mod resample;
mod wav;

pub use frame::{frame_count, frame_stream, window, Frame, WindowKind};
pub(crate) use frame::frame_geometry;
pub use resample::resample;
pub use wav::{load_wav, save_wav, save_wav_as, SampleFormat};

use crate::{Error, Result};

/// Multichannel sampled waveform.
///
/// Samples are held as `f64` in the nominal range `[-1, 1]`; all channels
/// have the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSignal("sample rate must be positive".into()));
        }
        let Some(first) = channels.first() else {
            return Err(Error::InvalidSignal("at least one channel is required".into()));
        };
        let len = first.len();
        if let Some((idx, ch)) = channels.iter().enumerate().find(|(_, c)| c.len() != len) {
            return Err(Error::InvalidSignal(format!(
                "channel {idx} has {} samples, channel 0 has {len}",
                ch.len()
            )));
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate)
    }

    /// All-zero signal with the same shape and rate as `self`.
    pub fn zeros_like(&self) -> Self {
        Self {
            channels: vec![vec![0.0; self.len()]; self.channel_count()],
            sample_rate: self.sample_rate,
        }
    }

    /// Rebuilds a signal from a channel-major flat buffer.
    pub fn from_flat(flat: &[f64], channel_count: usize, sample_rate: u32) -> Result<Self> {
        if channel_count == 0 || flat.len() % channel_count != 0 {
            return Err(Error::InvalidSignal(format!(
                "{} samples cannot be split into {channel_count} channels",
                flat.len()
            )));
        }
        let len = flat.len() / channel_count;
        let channels = flat.chunks(len.max(1)).map(<[f64]>::to_vec).collect();
        if len == 0 {
            return Self::new(vec![Vec::new(); channel_count], sample_rate);
        }
        Self::new(channels, sample_rate)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, idx: usize) -> &[f64] {
        &self.channels[idx]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Single-channel signal holding channel `idx`.
    pub fn select_channel(&self, idx: usize) -> Self {
        Self {
            channels: vec![self.channels[idx].clone()],
            sample_rate: self.sample_rate,
        }
    }

    /// Channel-major concatenation of all channels.
    pub fn flatten(&self) -> Vec<f64> {
        self.channels.concat()
    }

    /// Sum of squares over every sample of every channel.
    pub fn energy(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .map(|x| x * x)
            .sum()
    }

    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, gain: f64) -> Self {
        self.map(|x| x * gain)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|&x| f(x)).collect())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Element-wise sum. Shapes and rates must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Element-wise difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            channels: self
                .channels
                .iter()
                .zip(&other.channels)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
            sample_rate: self.sample_rate,
        })
    }

    /// Checks that `other` has the same rate, channel count and length.
    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::Mismatch(format!(
                "sample rates differ ({} Hz vs {} Hz)",
                self.sample_rate, other.sample_rate
            )));
        }
        if self.channel_count() != other.channel_count() {
            return Err(Error::Mismatch(format!(
                "channel counts differ ({} vs {})",
                self.channel_count(),
                other.channel_count()
            )));
        }
        if self.len() != other.len() {
            return Err(Error::Mismatch(format!(
                "lengths differ ({} vs {} samples)",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// Mean of per-channel scores, the stereo policy for mono-only measures.
pub fn channel_mean(per_channel: &[f64]) -> Result<f64> {
    if per_channel.is_empty() {
        return Err(Error::InvalidParameter(
            "channel_mean of an empty score list".into(),
        ));
    }
    Ok(per_channel.iter().sum::<f64>() / per_channel.len() as f64)
}

/// Rejects signals with more channels than a mono/stereo-only measure defines.
pub(crate) fn require_mono_or_stereo(signal: &AudioSignal, what: &str) -> Result<()> {
    if signal.channel_count() > 2 {
        return Err(Error::UnsupportedFormat(format!(
            "{what} is defined for mono and stereo only, got {} channels",
            signal.channel_count()
        )));
    }
    Ok(())
}
