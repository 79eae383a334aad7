//! Render cent sequences as 16-bit stereo PCM sine tones.

use std::io::{Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::scale::cents_to_hz;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavParams {
    pub sample_rate: u32,
    pub frames_per_note: usize,
    /// Peak amplitude as a fraction of full scale.
    pub amplitude: f64,
    /// Linear fade in and out at each note edge; 0 disables it.
    pub fade_ms: f64,
}

impl Default for WavParams {
    fn default() -> Self {
        WavParams { sample_rate: 44_100, frames_per_note: 22_050, amplitude: 0.8, fade_ms: 5.0 }
    }
}

impl WavParams {
    pub fn without_fade(self) -> Self {
        WavParams { fade_ms: 0.0, ..self }
    }

    fn fade_frames(&self) -> usize {
        ((self.fade_ms / 1000.0 * self.sample_rate as f64) as usize).min(self.frames_per_note / 2)
    }
}

pub const CHANNELS: u16 = 2;
pub const BITS_PER_SAMPLE: u16 = 16;
pub const HEADER_BYTES: usize = 44;

/// Mono samples for the whole sequence, one block of `frames_per_note` per note.
pub fn render(cents: &[f64], tonic_hz: f64, params: &WavParams) -> Result<Vec<i16>> {
    if cents.is_empty() {
        return Err(Error::InvalidInput("nothing to synthesize".into()));
    }
    if !(tonic_hz.is_finite() && tonic_hz > 0.0) {
        return Err(Error::InvalidInput(format!("tonic_hz {tonic_hz} must be > 0")));
    }
    if !(0.0..=1.0).contains(&params.amplitude) {
        return Err(Error::InvalidInput(format!("amplitude {} outside [0, 1]", params.amplitude)));
    }
    let sr = params.sample_rate as f64;
    let n = params.frames_per_note;
    let fade = params.fade_frames();
    let mut out = Vec::with_capacity(cents.len() * n);
    for &c in cents {
        if !c.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite cent value {c}")));
        }
        let w = std::f64::consts::TAU * cents_to_hz(tonic_hz, c) / sr;
        for i in 0..n {
            let env = if fade == 0 {
                1.0
            } else {
                let edge = i.min(n - 1 - i);
                (edge as f64 / fade as f64).min(1.0)
            };
            let v = params.amplitude * env * (w * i as f64).sin();
            out.push((v * i16::MAX as f64).round() as i16);
        }
    }
    Ok(out)
}

pub fn write_wav_to<W: Write + Seek>(
    writer: W,
    cents: &[f64],
    tonic_hz: f64,
    params: &WavParams,
) -> Result<()> {
    let samples = render(cents, tonic_hz, params)?;
    let spec = WavSpec {
        channels: CHANNELS,
        sample_rate: params.sample_rate,
        bits_per_sample: BITS_PER_SAMPLE,
        sample_format: SampleFormat::Int,
    };
    let wav_err = |e: hound::Error| Error::Io(e.to_string());
    let mut w = WavWriter::new(writer, spec).map_err(wav_err)?;
    for s in samples {
        for _ in 0..CHANNELS {
            w.write_sample(s).map_err(wav_err)?;
        }
    }
    w.finalize().map_err(wav_err)
}

pub fn write_wav(path: &Path, cents: &[f64], tonic_hz: f64, params: &WavParams) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_wav_to(std::io::BufWriter::new(file), cents, tonic_hz, params)
}
