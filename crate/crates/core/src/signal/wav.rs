use std::path::Path;

use hound::{SampleFormat as HoundFormat, WavReader, WavSpec, WavWriter};

use super::AudioSignal;
use crate::{Error, Result};

const MAX_CHANNELS: u16 = 8;

/// On-disk sample encoding for [`save_wav_as`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Int16,
    Int24,
    Int32,
    Float32,
}

/// Reads a RIFF/WAVE file into a normalized [`AudioSignal`].
///
/// Integer PCM (16, 24 or 32 bit) is scaled by `1 / 2^(bits-1)`; 32-bit
/// float is passed through unchanged. Channel order is preserved.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioSignal> {
    let path = path.as_ref();
    let read_err = |source| Error::WavRead {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = WavReader::open(path).map_err(read_err)?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > MAX_CHANNELS {
        return Err(Error::UnsupportedFormat(format!(
            "{}: {} channels (1-{MAX_CHANNELS} supported)",
            path.display(),
            spec.channels
        )));
    }
    let channel_count = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (HoundFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(read_err)?,
        (HoundFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<Result<_, _>>()
                .map_err(read_err)?
        }
        (fmt, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: {bits}-bit {fmt:?} samples",
                path.display()
            )))
        }
    };
    if interleaved.is_empty() {
        return Err(Error::Empty(format!("{} has no sample data", path.display())));
    }
    let frames = interleaved.len() / channel_count;
    let mut channels = vec![Vec::with_capacity(frames); channel_count];
    for frame in interleaved.chunks_exact(channel_count) {
        for (ch, &s) in channels.iter_mut().zip(frame) {
            ch.push(s);
        }
    }
    AudioSignal::new(channels, spec.sample_rate)
}

/// Writes `signal` as 32-bit float WAV.
pub fn save_wav(signal: &AudioSignal, path: impl AsRef<Path>) -> Result<()> {
    save_wav_as(signal, path, SampleFormat::Float32)
}

pub fn save_wav_as(signal: &AudioSignal, path: impl AsRef<Path>, format: SampleFormat) -> Result<()> {
    let path = path.as_ref();
    let write_err = |source| Error::WavWrite {
        path: path.to_path_buf(),
        source,
    };
    if signal.channel_count() > MAX_CHANNELS as usize {
        return Err(Error::UnsupportedFormat(format!(
            "cannot write {} channels",
            signal.channel_count()
        )));
    }
    let (bits, sample_format) = match format {
        SampleFormat::Int16 => (16, HoundFormat::Int),
        SampleFormat::Int24 => (24, HoundFormat::Int),
        SampleFormat::Int32 => (32, HoundFormat::Int),
        SampleFormat::Float32 => (32, HoundFormat::Float),
    };
    let spec = WavSpec {
        channels: signal.channel_count() as u16,
        sample_rate: signal.sample_rate(),
        bits_per_sample: bits,
        sample_format,
    };
    let mut writer = WavWriter::create(path, spec).map_err(write_err)?;
    for n in 0..signal.len() {
        for ch in signal.channels() {
            let x = ch[n];
            match format {
                SampleFormat::Float32 => writer.write_sample(x as f32),
                _ => {
                    let full = (1i64 << (bits - 1)) as f64;
                    let q = (x * full).round().clamp(-full, full - 1.0) as i32;
                    writer.write_sample(q)
                }
            }
            .map_err(write_err)?;
        }
    }
    writer.finalize().map_err(write_err)
}
