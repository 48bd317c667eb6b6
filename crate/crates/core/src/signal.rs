//! Audio to intensity-series preprocessing.
//!
//! Raw amplitude samples are reduced to one RMS value per fixed-size window
//! and the resulting series is smoothed with a trailing simple moving
//! average. At the default 48 kHz rate a 960-sample window is 20 ms, so a
//! five second session becomes 250 points.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 48_000;
pub const DEFAULT_WINDOW_SIZE: usize = 960;
pub const DEFAULT_SMA_WINDOW: usize = 8;

/// Mono amplitude samples, nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawAudio {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl RawAudio {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// A non-empty series of non-negative intensity values sampled every `dt` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowSeries {
    values: Vec<f64>,
    dt: f64,
}

impl BlowSeries {
    pub fn new(values: Vec<f64>, dt: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::invalid(format!(
                "intensity values must be finite and non-negative (index {i}: {v})"
            )));
        }
        Ok(Self { values, dt })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Samples per RMS window.
    pub window_size: usize,
    /// Points in the trailing moving-average window.
    pub sma_window: usize,
    pub sample_rate: u32,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            window_size: DEFAULT_WINDOW_SIZE,
            sma_window: DEFAULT_SMA_WINDOW,
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::invalid("window_size must be at least 1"));
        }
        if self.sma_window == 0 {
            return Err(Error::invalid("sma_window must be at least 1"));
        }
        if self.sample_rate == 0 {
            return Err(Error::invalid("sample_rate must be positive"));
        }
        Ok(())
    }

    /// Seconds between consecutive points of the preprocessed series.
    pub fn dt(&self) -> f64 {
        self.window_size as f64 / self.sample_rate as f64
    }
}

/// Per-window root mean square. Trailing samples that do not fill a whole
/// window are dropped.
pub fn rms_windows(audio: &RawAudio, window_size: usize) -> Result<BlowSeries> {
    if window_size == 0 {
        return Err(Error::invalid("window_size must be at least 1"));
    }
    if audio.samples.len() < window_size {
        return Err(Error::SessionTooShort {
            samples: audio.samples.len(),
            window: window_size,
        });
    }
    let values = audio
        .samples
        .chunks_exact(window_size)
        .map(|w| (w.iter().map(|s| s * s).sum::<f64>() / window_size as f64).sqrt())
        .collect();
    BlowSeries::new(values, window_size as f64 / audio.sample_rate as f64)
}

/// Trailing moving average over plain values. The first `window - 1` points
/// average over the prefix seen so far, so the output keeps the input length.
pub fn sma_values(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::invalid("sma window must be at least 1"));
    }
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok((0..values.len())
        .map(|i| {
            let start = (i + 1).saturating_sub(window);
            let span = &values[start..=i];
            span.iter().sum::<f64>() / span.len() as f64
        })
        .collect())
}

pub fn sma(series: &BlowSeries, window: usize) -> Result<BlowSeries> {
    BlowSeries::new(sma_values(series.values(), window)?, series.dt())
}

/// RMS windowing followed by smoothing.
pub fn preprocess_session(audio: &RawAudio, cfg: &PreprocessConfig) -> Result<BlowSeries> {
    cfg.validate()?;
    if audio.sample_rate != cfg.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: cfg.sample_rate,
            actual: audio.sample_rate,
        });
    }
    let rms = rms_windows(audio, cfg.window_size)?;
    sma(&rms, cfg.sma_window)
}

/// Reads a mono WAV file. Float samples are taken as-is; integer PCM is
/// scaled into `[-1, 1]`.
pub fn read_wav(path: &Path) -> Result<RawAudio> {
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::parse(
            path,
            None,
            format!("expected mono audio, found {} channels", spec.channels),
        ));
    }
    let samples: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        hound::SampleFormat::Int => {
            let scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err)?
        }
    };
    if samples.is_empty() {
        return Err(Error::parse(path, None, "no samples"));
    }
    RawAudio::new(samples, spec.sample_rate)
}

/// Writes 32-bit float mono WAV.
pub fn write_wav(path: &Path, audio: &RawAudio) -> Result<()> {
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in &audio.samples {
        writer.write_sample(s as f32).map_err(wav_err)?;
    }
    writer.finalize().map_err(wav_err)
}

/// Reads a single column of float samples, one per line. A non-numeric first
/// line is treated as a header.
pub fn read_sample_column(path: &Path, sample_rate: u32) -> Result<RawAudio> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => samples.push(v),
            Err(_) if lineno == 0 => continue,
            Err(e) => {
                return Err(Error::parse(
                    path,
                    Some(lineno as u64 + 1),
                    format!("bad sample `{line}`: {e}"),
                ))
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::parse(path, None, "no samples"));
    }
    RawAudio::new(samples, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn audio(samples: &[f64]) -> RawAudio {
        RawAudio::new(samples.to_vec(), DEFAULT_SAMPLE_RATE).unwrap()
    }

    #[test]
    fn rms_of_constant_signal_is_its_magnitude() {
        let s = rms_windows(&audio(&[2.0, 2.0, 2.0, 2.0]), 4).unwrap();
        assert_eq!(s.values(), &[2.0]);
    }

    #[test]
    fn rms_of_zero_signal() {
        let s = rms_windows(&audio(&[0.0; 6]), 3).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0]);
    }

    #[test]
    fn rms_direct_formula() {
        let s = rms_windows(&audio(&[3.0, 4.0]), 2).unwrap();
        assert!((s.values()[0] - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((s.values()[0] - 3.535_533_905_932_737_6).abs() < 1e-12);
    }

    #[test]
    fn rms_discards_remainder() {
        let s = rms_windows(&audio(&[1.0; 10]), 3).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn rms_rejects_short_session() {
        let err = rms_windows(&audio(&[1.0; 3]), 4).unwrap_err();
        assert!(err.to_string().contains("session too short"));
    }

    #[test]
    fn sma_constant_is_fixed_point() {
        assert_eq!(sma_values(&[5.0; 4], 8).unwrap(), vec![5.0; 4]);
    }

    #[test]
    fn sma_window_one_is_identity() {
        let v = [0.3, 1.7, 0.0, 9.25];
        assert_eq!(sma_values(&v, 1).unwrap(), v.to_vec());
    }

    #[test]
    fn sma_trailing_with_warmup() {
        assert_eq!(
            sma_values(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(),
            vec![1.0, 1.5, 2.5, 3.5]
        );
    }

    #[test]
    fn sma_rejects_empty() {
        assert!(matches!(sma_values(&[], 3), Err(Error::EmptySeries)));
    }

    #[test]
    fn five_seconds_yield_250_points() {
        let samples: Vec<f64> = (0..240_000)
            .map(|i| (i as f64 * 0.01).sin() * 0.3)
            .collect();
        let s = preprocess_session(&audio(&samples), &PreprocessConfig::default()).unwrap();
        assert_eq!(s.len(), 250);
        assert!((s.dt() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn one_window_of_constant_samples() {
        let s = preprocess_session(&audio(&[0.5; 960]), &PreprocessConfig::default()).unwrap();
        assert_eq!(s.values(), &[0.5]);
    }

    #[test]
    fn one_sample_short_of_a_window() {
        let err =
            preprocess_session(&audio(&[0.5; 959]), &PreprocessConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::SessionTooShort {
                samples: 959,
                window: 960
            }
        ));
    }

    #[test]
    fn sample_rate_mismatch_is_rejected() {
        let a = RawAudio::new(vec![0.1; 2000], 44_100).unwrap();
        let err = preprocess_session(&a, &PreprocessConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::SampleRateMismatch {
                expected: 48_000,
                actual: 44_100
            }
        ));
    }

    #[test]
    fn wav_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let a = audio(&[0.25, -0.5, 0.125, 0.0]);
        write_wav(&path, &a).unwrap();
        assert_eq!(read_wav(&path).unwrap(), a);
    }

    #[test]
    fn sample_column_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        std::fs::write(&path, "amplitude\n0.5\n-0.25\n\n1\n").unwrap();
        let a = read_sample_column(&path, 16_000).unwrap();
        assert_eq!(a.samples, vec![0.5, -0.25, 1.0]);
        assert_eq!(a.sample_rate, 16_000);
    }
}
