//! Mono WAV input and output (16-bit PCM or 32-bit float).

use std::path::Path;

use dsc_core::Signal;
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WavEncoding {
    Float32,
    Pcm16,
}

fn wav_error(path: &Path, e: hound::Error) -> CliError {
    match e {
        hound::Error::IoError(io) => CliError::io(path, io),
        other => CliError::Wav(format!("{}: {other}", path.display())),
    }
}

pub fn read_wav(path: &Path) -> Result<Signal> {
    let mut reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(CliError::Wav(format!(
            "{}: {} channels, only mono is supported",
            path.display(),
            spec.channels
        )));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>(),
        (format, bits) => {
            return Err(CliError::Wav(format!(
                "{}: {bits}-bit {format:?} samples, expected 16-bit PCM or 32-bit float",
                path.display()
            )))
        }
    }
    .map_err(|e| wav_error(path, e))?;
    Ok(Signal::new(samples, f64::from(spec.sample_rate))?)
}

/// Writes `signal`; returns the factor applied to the samples (PCM output
/// is scaled down when the signal exceeds full scale).
pub fn write_wav(path: &Path, signal: &Signal, encoding: WavEncoding) -> Result<f64> {
    let rate = signal.sample_rate();
    if rate.fract() != 0.0 || rate < 1.0 || rate > f64::from(u32::MAX) {
        return Err(CliError::Wav(format!(
            "sample rate {rate} Hz is not a positive integer"
        )));
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: match encoding {
            WavEncoding::Float32 => 32,
            WavEncoding::Pcm16 => 16,
        },
        sample_format: match encoding {
            WavEncoding::Float32 => SampleFormat::Float,
            WavEncoding::Pcm16 => SampleFormat::Int,
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    let scale = match encoding {
        WavEncoding::Float32 => 1.0,
        WavEncoding::Pcm16 => {
            let peak = signal.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak > 1.0 {
                1.0 / peak
            } else {
                1.0
            }
        }
    };
    for &x in signal.samples() {
        match encoding {
            WavEncoding::Float32 => writer.write_sample(x as f32),
            WavEncoding::Pcm16 => writer.write_sample((x * scale * 32767.0).round() as i16),
        }
        .map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))?;
    Ok(scale)
}
