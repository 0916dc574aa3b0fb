use std::f64::consts::PI;

use super::AudioSignal;
use crate::{Error, Result};

const KAISER_BETA: f64 = 8.6;
/// Zero crossings of the sinc kernel on each side, counted at the lower rate.
const HALF_TAPS: usize = 32;
/// Cutoff as a fraction of the lower Nyquist frequency.
const ROLLOFF: f64 = 0.95;
/// Largest interpolation factor for which a polyphase table is precomputed.
const MAX_TABLE_PHASES: u64 = 4096;

/// Band-limited rational resampling with a Kaiser-windowed sinc kernel.
///
/// The output holds `round(len * target / source)` samples per channel. When
/// the rates already match the input is returned unchanged.
pub fn resample(signal: &AudioSignal, target_rate: u32) -> Result<AudioSignal> {
    if target_rate == 0 {
        return Err(Error::InvalidParameter("target rate must be positive".into()));
    }
    let source_rate = signal.sample_rate();
    if source_rate == target_rate {
        return Ok(signal.clone());
    }
    let kernel = Kernel::new(source_rate, target_rate);
    let out_len = ((signal.len() as u128 * target_rate as u128 + source_rate as u128 / 2)
        / source_rate as u128) as usize;
    let channels = signal
        .channels()
        .iter()
        .map(|ch| kernel.apply(ch, out_len))
        .collect();
    AudioSignal::new(channels, target_rate)
}

struct Kernel {
    up: u64,
    down: u64,
    /// Kernel half-width in input samples.
    half_width: usize,
    /// Cutoff in cycles per input sample.
    cutoff: f64,
    table: Option<Vec<Vec<f64>>>,
}

impl Kernel {
    fn new(source: u32, target: u32) -> Self {
        let g = gcd(source as u64, target as u64);
        let up = target as u64 / g;
        let down = source as u64 / g;
        let scale = (up as f64 / down as f64).min(1.0);
        let half_width = (HALF_TAPS as f64 / scale).ceil() as usize;
        let cutoff = 0.5 * scale * ROLLOFF;
        let mut kernel = Self {
            up,
            down,
            half_width,
            cutoff,
            table: None,
        };
        if up <= MAX_TABLE_PHASES {
            kernel.table = Some((0..up).map(|p| kernel.taps(p)).collect());
        }
        kernel
    }

    /// Taps for fractional offset `phase / up`, normalized to unit DC gain.
    /// Tap `j` multiplies input sample `i0 + j - half_width + 1`.
    fn taps(&self, phase: u64) -> Vec<f64> {
        let frac = phase as f64 / self.up as f64;
        let hw = self.half_width as f64;
        let i0_bessel = bessel_i0(KAISER_BETA);
        let mut taps: Vec<f64> = (0..2 * self.half_width)
            .map(|j| {
                let t = j as f64 - hw + 1.0 - frac;
                let r = t / hw;
                if r.abs() >= 1.0 {
                    return 0.0;
                }
                let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / i0_bessel;
                2.0 * self.cutoff * sinc(2.0 * self.cutoff * t) * window
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        if sum != 0.0 {
            taps.iter_mut().for_each(|t| *t /= sum);
        }
        taps
    }

    fn apply(&self, input: &[f64], out_len: usize) -> Vec<f64> {
        let hw = self.half_width as i64;
        let len = input.len() as i64;
        (0..out_len as u64)
            .map(|n| {
                let pos = n * self.down;
                let i0 = (pos / self.up) as i64;
                let phase = pos % self.up;
                let owned;
                let taps: &[f64] = match &self.table {
                    Some(t) => &t[phase as usize],
                    None => {
                        owned = self.taps(phase);
                        &owned
                    }
                };
                let start = i0 - hw + 1;
                let lo = (-start).max(0) as usize;
                let hi = ((len - start).min(taps.len() as i64)).max(0) as usize;
                if lo >= hi {
                    return 0.0;
                }
                let base = (start + lo as i64) as usize;
                taps[lo..hi]
                    .iter()
                    .zip(&input[base..base + (hi - lo)])
                    .map(|(t, x)| t * x)
                    .sum()
            })
            .collect()
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
