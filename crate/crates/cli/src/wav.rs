use std::io;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{CliError, CliResult};

/// Mono audio with samples in `[-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavAudio {
    pub samples: Vec<f64>,
    pub rate: u32,
}

const SCALE: f64 = 32768.0;

fn map_err(e: hound::Error) -> CliError {
    match e {
        hound::Error::IoError(io) if matches!(io.kind(), io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied) => {
            io.into()
        }
        // Short reads of the header or data surface as I/O errors.
        hound::Error::IoError(io) => CliError::new("parse-error", format!("truncated or empty WAV file: {io}")),
        hound::Error::FormatError(msg) => CliError::new("parse-error", msg),
        hound::Error::Unsupported | hound::Error::InvalidSampleFormat => {
            CliError::new("unsupported-format", "only 16-bit PCM WAV is supported")
        }
        other => CliError::new("parse-error", other.to_string()),
    }
}

/// Reads 16-bit PCM; multi-channel input is averaged to mono.
pub fn wav_read(path: &Path) -> CliResult<WavAudio> {
    let reader = WavReader::open(path).map_err(map_err)?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(CliError::new(
            "unsupported-format",
            format!("{:?} {}-bit samples; expected 16-bit PCM", spec.sample_format, spec.bits_per_sample),
        ));
    }
    let channels = spec.channels.max(1) as usize;
    let raw: Vec<i16> = reader.into_samples::<i16>().collect::<Result<_, _>>().map_err(map_err)?;
    let samples = raw
        .chunks(channels)
        .map(|frame| frame.iter().map(|&v| v as f64).sum::<f64>() / (channels as f64 * SCALE))
        .collect();
    Ok(WavAudio { samples, rate: spec.sample_rate })
}

/// Writes mono 16-bit PCM, clipping to the representable range.
pub fn wav_write(path: &Path, audio: &WavAudio) -> CliResult<()> {
    let spec = WavSpec { channels: 1, sample_rate: audio.rate, bits_per_sample: 16, sample_format: SampleFormat::Int };
    let mut w = WavWriter::create(path, spec).map_err(map_err)?;
    for &x in &audio.samples {
        let v = (x * SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        w.write_sample(v).map_err(map_err)?;
    }
    w.finalize().map_err(map_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qmc_ltft::ltft_core::{dft, DigitalSignal};
    use std::f64::consts::PI;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let samples: Vec<f64> = [-32768i32, -1, 0, 1, 12345, 32767].iter().map(|&v| v as f64 / SCALE).collect();
        let audio = WavAudio { samples, rate: 8000 };
        wav_write(&path, &audio).unwrap();
        assert_eq!(wav_read(&path).unwrap(), audio);
    }

    #[test]
    fn sine_fixture_peaks_at_440() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sine.wav");
        let rate = 16000;
        let n = 4096;
        let samples = (0..n).map(|j| 0.5 * (2.0 * PI * 440.0 * j as f64 / rate as f64).sin()).collect();
        wav_write(&path, &WavAudio { samples, rate }).unwrap();
        let back = wav_read(&path).unwrap();
        let spec = dft(&DigitalSignal::from_real(&back.samples, rate as f64).unwrap());
        let peak = (0..n / 2).max_by(|&a, &b| spec.bins[a].norm().total_cmp(&spec.bins[b].norm())).unwrap();
        let nearest = (440.0 * n as f64 / rate as f64).round() as usize;
        assert_eq!(peak, nearest);
    }

    #[test]
    fn stereo_is_averaged() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("st.wav");
        let spec = WavSpec { channels: 2, sample_rate: 100, bits_per_sample: 16, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for v in [100i16, 300, -50, 50] {
            w.write_sample(v).unwrap();
        }
        w.finalize().unwrap();
        assert_eq!(wav_read(&path).unwrap().samples, vec![200.0 / SCALE, 0.0]);
    }

    #[test]
    fn bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.wav");
        std::fs::write(&empty, b"").unwrap();
        assert_eq!(wav_read(&empty).unwrap_err().kind, "parse-error");
        let junk = dir.path().join("junk.wav");
        std::fs::write(&junk, b"RIFX0000WAVEfmt ").unwrap();
        assert_eq!(wav_read(&junk).unwrap_err().kind, "parse-error");

        let float = dir.path().join("float.wav");
        let spec = WavSpec { channels: 1, sample_rate: 100, bits_per_sample: 32, sample_format: SampleFormat::Float };
        let mut w = WavWriter::create(&float, spec).unwrap();
        w.write_sample(0.5f32).unwrap();
        w.finalize().unwrap();
        assert_eq!(wav_read(&float).unwrap_err().kind, "unsupported-format");
    }
}
