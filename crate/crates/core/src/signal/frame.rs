use std::f64::consts::PI;

use super::AudioSignal;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    Rectangular,
    /// Symmetric Hann, `0.5 - 0.5 cos(2πn / (N-1))`; sums to `(N-1)/2`.
    #[default]
    Hann,
}

/// A windowed block of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: Vec<f64>,
    pub start_index: usize,
    pub window_kind: WindowKind,
}

pub fn window(kind: WindowKind, len: usize) -> Vec<f64> {
    match kind {
        WindowKind::Rectangular => vec![1.0; len],
        WindowKind::Hann if len == 1 => vec![1.0],
        WindowKind::Hann => (0..len)
            .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
            .collect(),
    }
}

/// Number of whole frames in `len` samples; the trailing partial frame is
/// discarded.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if frame_len == 0 || hop == 0 || len < frame_len {
        0
    } else {
        (len - frame_len) / hop + 1
    }
}

pub(crate) fn ms_to_samples(ms: f64, rate: u32) -> usize {
    (ms * rate as f64 / 1000.0).round() as usize
}

/// Splits every channel into windowed frames.
///
/// A frame longer than the signal yields an empty sequence rather than an
/// error.
pub fn frame_stream(
    signal: &AudioSignal,
    frame_ms: f64,
    hop_ms: f64,
    window_kind: WindowKind,
) -> Result<Vec<Vec<Frame>>> {
    let (frame_len, hop) = frame_geometry(frame_ms, hop_ms, signal.sample_rate())?;
    let win = window(window_kind, frame_len);
    Ok(signal
        .channels()
        .iter()
        .map(|ch| {
            (0..frame_count(ch.len(), frame_len, hop))
                .map(|m| {
                    let start = m * hop;
                    Frame {
                        samples: ch[start..start + frame_len]
                            .iter()
                            .zip(&win)
                            .map(|(x, w)| x * w)
                            .collect(),
                        start_index: start,
                        window_kind,
                    }
                })
                .collect()
        })
        .collect())
}

/// Frame and hop lengths in samples, validated.
pub(crate) fn frame_geometry(frame_ms: f64, hop_ms: f64, rate: u32) -> Result<(usize, usize)> {
    if !(hop_ms > 0.0 && frame_ms >= hop_ms) {
        return Err(Error::InvalidParameter(format!(
            "need frame_ms >= hop_ms > 0, got frame {frame_ms} ms, hop {hop_ms} ms"
        )));
    }
    let frame_len = ms_to_samples(frame_ms, rate);
    let hop = ms_to_samples(hop_ms, rate);
    if hop == 0 {
        return Err(Error::InvalidParameter(format!(
            "hop of {hop_ms} ms is shorter than one sample at {rate} Hz"
        )));
    }
    Ok((frame_len, hop))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_frame() {
        let s = AudioSignal::mono(vec![0.1; 480], 48000).unwrap();
        let frames = frame_stream(&s, 10.0, 10.0, WindowKind::Rectangular).unwrap();
        assert_eq!(frames[0].len(), 1);
    }

    #[test]
    fn thirty_ms_frames_at_48k() {
        let s = AudioSignal::mono(vec![0.0; 48000], 48000).unwrap();
        let frames = frame_stream(&s, 30.0, 7.5, WindowKind::Hann).unwrap();
        assert_eq!(frames[0].len(), 130);
        assert_eq!(frames[0][1].start_index, 360);
        assert_eq!(frames[0][0].samples.len(), 1440);
    }

    #[test]
    fn frame_longer_than_signal_is_empty() {
        let s = AudioSignal::mono(vec![0.0; 100], 1000).unwrap();
        let frames = frame_stream(&s, 200.0, 50.0, WindowKind::Hann).unwrap();
        assert!(frames[0].is_empty());
    }

    #[test]
    fn bad_geometry_rejected() {
        let s = AudioSignal::mono(vec![0.0; 100], 1000).unwrap();
        assert!(frame_stream(&s, 10.0, 20.0, WindowKind::Hann).is_err());
        assert!(frame_stream(&s, 10.0, 0.0, WindowKind::Hann).is_err());
    }

    #[test]
    fn hann_sum_is_half_n_minus_one() {
        for n in [3usize, 4, 16, 480, 1440, 1441] {
            let mut sum = 0.0;
            for v in window(WindowKind::Hann, n) {
                sum += v;
            }
            assert!((sum - (n as f64 - 1.0) / 2.0).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn count_matches_closed_form() {
        for len in [1440usize, 1441, 2000, 48000] {
            for (frame, hop) in [(1440usize, 360usize), (1440, 1440), (100, 7)] {
                let brute = (0..)
                    .map(|m| m * hop)
                    .take_while(|s| s + frame <= len)
                    .count();
                assert_eq!(frame_count(len, frame, hop), brute);
            }
        }
    }
}
