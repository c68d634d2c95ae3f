//! Minimal RIFF/WAVE support: PCM 16-bit mono only.
//!
//! Reading maps int16 to `[-1, 1)` by dividing by 32768; writing rounds to
//! nearest and clamps, so a round trip is exact to 1/32768 per sample.

use std::path::Path;

use crate::error::{Error, Result};

/// Mono audio samples with their rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.samples.iter().map(|&x| (x as f64) * (x as f64)).sum();
        (sum / self.samples.len() as f64).sqrt()
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, &x| m.max(x.abs()))
    }
}

fn wav_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Wav {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

/// Reads a PCM16 mono WAV file.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)
        .map_err(|e| wav_err(path, format!("cannot read file: {e}")))?;
    decode_wav(&bytes).map_err(|msg| wav_err(path, msg))
}

fn decode_wav(bytes: &[u8]) -> std::result::Result<Waveform, String> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err("not a RIFF/WAVE file".to_string());
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = (body_start + size).min(bytes.len());
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err("fmt chunk too short".to_string());
                }
                let b = &bytes[body_start..body_end];
                fmt = Some((
                    u16::from_le_bytes(b[0..2].try_into().unwrap()),
                    u16::from_le_bytes(b[2..4].try_into().unwrap()),
                    u32::from_le_bytes(b[4..8].try_into().unwrap()),
                    u16::from_le_bytes(b[14..16].try_into().unwrap()),
                ));
            }
            b"data" => data = Some(&bytes[body_start..body_end]),
            _ => {}
        }
        pos = body_start + size + (size & 1); // chunks are word-aligned
    }
    let (format, channels, rate, bits) = fmt.ok_or("missing fmt chunk")?;
    if format != 1 {
        return Err(format!("expected PCM (format 1), got format {format}"));
    }
    if channels != 1 {
        return Err(format!("expected mono, got {channels} channels"));
    }
    if bits != 16 {
        return Err(format!("expected 16-bit samples, got {bits}-bit"));
    }
    let data = data.ok_or("missing data chunk")?;
    let samples: Vec<f32> = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f32 / 32768.0)
        .collect();
    Ok(Waveform::new(samples, rate))
}

/// Writes a PCM16 mono WAV file. Returns the number of samples clamped
/// because they fell outside the int16 range.
pub fn write_wav(path: impl AsRef<Path>, w: &Waveform) -> Result<usize> {
    let path = path.as_ref();
    let (bytes, clipped) = encode_wav(w);
    if clipped > 0 {
        log::warn!("{}: {clipped} samples clipped on write", path.display());
    }
    std::fs::write(path, bytes).map_err(|e| wav_err(path, format!("cannot write file: {e}")))?;
    Ok(clipped)
}

pub fn encode_wav(w: &Waveform) -> (Vec<u8>, usize) {
    let mut clipped = 0usize;
    let data_len = w.samples.len() * 2;
    let mut bytes = Vec::with_capacity(44 + data_len);
    bytes.extend_from_slice(b"RIFF");
    bytes.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    bytes.extend_from_slice(b"WAVE");
    bytes.extend_from_slice(b"fmt ");
    bytes.extend_from_slice(&16u32.to_le_bytes());
    bytes.extend_from_slice(&1u16.to_le_bytes()); // PCM
    bytes.extend_from_slice(&1u16.to_le_bytes()); // mono
    bytes.extend_from_slice(&w.sample_rate.to_le_bytes());
    bytes.extend_from_slice(&(w.sample_rate * 2).to_le_bytes());
    bytes.extend_from_slice(&2u16.to_le_bytes());
    bytes.extend_from_slice(&16u16.to_le_bytes());
    bytes.extend_from_slice(b"data");
    bytes.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &x in &w.samples {
        let raw = (x as f64 * 32768.0).round();
        let v = if raw > i16::MAX as f64 {
            clipped += 1;
            i16::MAX
        } else if raw < i16::MIN as f64 {
            clipped += 1;
            i16::MIN
        } else {
            raw as i16
        };
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    (bytes, clipped)
}
