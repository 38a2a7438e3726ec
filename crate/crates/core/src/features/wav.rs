use std::io::Read;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::Waveform;
use crate::error::{Error, Result};

fn wav_err(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::format("wav", other.to_string()),
    }
}

/// Reads mono 16-bit PCM or 32-bit float WAV data.
pub fn read_wav<R: Read>(
    reader: R,
    utterance_id: impl Into<String>,
    speaker_id: impl Into<String>,
) -> Result<Waveform> {
    let reader = WavReader::new(reader).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::format("wav", format!("expected mono audio, found {} channels", spec.channels)));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (fmt, bits) => {
            return Err(Error::format("wav", format!("unsupported sample format {fmt:?}/{bits} bits")))
        }
    };
    Waveform::new(samples, spec.sample_rate, utterance_id, speaker_id)
        .map_err(|e| Error::format("wav", e.to_string()))
}

pub fn read_wav_file(
    path: impl AsRef<Path>,
    utterance_id: impl Into<String>,
    speaker_id: impl Into<String>,
) -> Result<Waveform> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_wav(file, utterance_id, speaker_id)
}

/// Writes a 32-bit float mono WAV.
pub fn write_wav_file(path: impl AsRef<Path>, w: &Waveform) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: w.sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in &w.samples {
        writer.write_sample(s as f32).map_err(wav_err)?;
    }
    writer.finalize().map_err(wav_err)
}
