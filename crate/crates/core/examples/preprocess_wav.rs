//! Writes a five second synthetic blow recording to a WAV file, reads it
//! back and reduces it to a smoothed RMS envelope.
//!
//!     cargo run --example preprocess_wav [out.wav]

use blowmatch::dataset::synth_audio;
use blowmatch::signal::{read_wav, write_wav};
use blowmatch::{preprocess_session, PreprocessConfig};

fn main() -> blowmatch::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "blow.wav".to_string());
    let cfg = PreprocessConfig::default();

    // a single breath: fast attack, slow decay
    let envelope: Vec<f64> = (0..250)
        .map(|i| {
            let t = i as f64 * cfg.dt();
            0.6 * (t / 0.4).min(1.0) * (-(t - 0.4).max(0.0) / 1.5).exp()
        })
        .collect();
    let audio = synth_audio(&envelope, cfg.window_size, cfg.sample_rate, 1)?;
    write_wav(path.as_ref(), &audio)?;

    let audio = read_wav(path.as_ref())?;
    let series = preprocess_session(&audio, &cfg)?;
    println!(
        "{}: {:.2} s at {} Hz -> {} points every {} s",
        path,
        audio.duration_secs(),
        audio.sample_rate,
        series.len(),
        series.dt()
    );
    let peak = series.values().iter().cloned().fold(0.0, f64::max);
    println!("peak smoothed RMS {peak:.3}");
    Ok(())
}
