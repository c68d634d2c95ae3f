//! Turns a mixture plan into audio: per-speaker RIR convolution, placement
//! at sample offsets, noise repetition, and SNR-scaled mixing.

use std::path::{Path, PathBuf};

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::pool::UtterancePool;
use crate::sampling::Rng;
use crate::timeline::{annotation_from_plan, speaker_count_intervals, Annotation, MixturePlan};
use crate::wav::{read_wav, Waveform};

/// What to do when the mixed signal exceeds full scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClippingPolicy {
    /// Scale the whole mixture down so the peak is 1 (preserves levels).
    Rescale,
    /// Hard-clip samples into [-1, 1].
    Clamp,
}

/// Audio-side configuration for rendering.
#[derive(Debug, Clone)]
pub struct RenderConfig {
    /// Directory of RIR WAV files; None renders dry.
    pub rir_dir: Option<PathBuf>,
    /// Directory of noise WAV files; None renders noise-free.
    pub noise_dir: Option<PathBuf>,
    pub snr_choices: Vec<f64>,
    pub sample_rate: u32,
    pub clipping: ClippingPolicy,
}

impl RenderConfig {
    pub fn dry(sample_rate: u32) -> Self {
        Self {
            rir_dir: None,
            noise_dir: None,
            snr_choices: vec![5.0, 10.0, 15.0, 20.0],
            sample_rate,
            clipping: ClippingPolicy::Rescale,
        }
    }
}

// Below this RIR length direct convolution is cheaper than FFT and, for the
// single-tap case, bit-exact.
const DIRECT_CONV_MAX_TAPS: usize = 64;

/// Full linear convolution truncated to the signal's length, peak-normalized
/// back to the input's peak so loudness ordering across utterances survives.
pub fn convolve_rir(signal: &Waveform, rir: &Waveform) -> Result<Waveform> {
    if signal.sample_rate != rir.sample_rate {
        return Err(Error::Render(format!(
            "sample rate mismatch: signal {} Hz vs RIR {} Hz",
            signal.sample_rate, rir.sample_rate
        )));
    }
    if signal.is_empty() || rir.is_empty() {
        return Ok(signal.clone());
    }
    let n = signal.len();
    let mut out = if rir.len() <= DIRECT_CONV_MAX_TAPS {
        direct_convolve(&signal.samples, &rir.samples, n)
    } else {
        fft_convolve(&signal.samples, &rir.samples, n)
    };
    let in_peak = signal.peak();
    let out_peak = out.iter().fold(0.0f32, |m, &x| m.max(x.abs()));
    if in_peak > 0.0 && out_peak > 0.0 {
        let scale = in_peak / out_peak;
        for x in &mut out {
            *x *= scale;
        }
    }
    Ok(Waveform::new(out, signal.sample_rate))
}

fn direct_convolve(signal: &[f32], rir: &[f32], n: usize) -> Vec<f32> {
    let mut out = vec![0.0f32; n];
    for (lag, &h) in rir.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        for k in lag..n {
            out[k] += signal[k - lag] * h;
        }
    }
    out
}

fn fft_convolve(signal: &[f32], rir: &[f32], n: usize) -> Vec<f32> {
    let size = (n + rir.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);

    let mut a: Vec<Complex<f64>> = signal
        .iter()
        .map(|&x| Complex::new(x as f64, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut b: Vec<Complex<f64>> = rir
        .iter()
        .map(|&x| Complex::new(x as f64, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    fft.process(&mut a);
    fft.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    ifft.process(&mut a);
    a.iter()
        .take(n)
        .map(|c| (c.re / size as f64) as f32)
        .collect()
}

/// Noise gain achieving `snr_db` between speech (RMS over the active sample
/// ranges) and the scaled noise.
pub fn mixing_scale(
    speech: &Waveform,
    active_ranges: &[(usize, usize)],
    noise: &Waveform,
    snr_db: f64,
) -> Result<f64> {
    let noise_rms = noise.rms();
    if !(noise_rms > 0.0) {
        return Err(Error::Render("noise signal has zero RMS".to_string()));
    }
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for &(start, end) in active_ranges {
        for &x in &speech.samples[start.min(speech.len())..end.min(speech.len())] {
            sum += (x as f64) * (x as f64);
            count += 1;
        }
    }
    if count == 0 {
        return Ok(0.0);
    }
    let speech_rms = (sum / count as f64).sqrt();
    Ok(speech_rms / (noise_rms * 10f64.powf(snr_db / 20.0)))
}

/// Sample index for a time in seconds, rounding half up.
pub fn sample_index(seconds: f64, rate: u32) -> usize {
    (seconds * rate as f64 + 0.5).floor() as usize
}

/// Active-speech sample ranges of an annotation.
pub fn active_sample_ranges(annotation: &Annotation, rate: u32) -> Vec<(usize, usize)> {
    speaker_count_intervals(annotation)
        .iter()
        .filter(|&&(_, _, c)| c > 0)
        .map(|&(s, e, _)| (sample_index(s, rate), sample_index(e, rate)))
        .collect()
}

fn list_wavs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "wav").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Render(format!("no WAV files in {}", dir.display())));
    }
    Ok(files)
}

/// Renders a plan to audio plus its annotation.
///
/// One RIR is drawn per speaker, one noise recording and one SNR per
/// mixture; draws come from `seed` alone, so a render is reproducible. The
/// noise is tiled end-to-end to the mixture length. Utterance audio longer
/// than the placement duration is truncated so the labels stay exact.
pub fn render_mixture(
    plan: &MixturePlan,
    pool: &UtterancePool,
    config: &RenderConfig,
    seed: u64,
) -> Result<(Waveform, Annotation)> {
    let annotation = annotation_from_plan(plan)?;
    let mut rng = Rng::from_seed(seed);

    let speakers = annotation.speakers();
    let mut rir_per_speaker: std::collections::BTreeMap<String, Waveform> =
        std::collections::BTreeMap::new();
    if let Some(dir) = &config.rir_dir {
        let rirs = list_wavs(dir)?;
        for speaker in &speakers {
            let path = &rirs[rng.below(rirs.len())];
            let rir = read_wav(path)?;
            if rir.sample_rate != config.sample_rate {
                return Err(Error::SampleRateMismatch {
                    expected: config.sample_rate,
                    got: rir.sample_rate,
                    path: path.display().to_string(),
                });
            }
            rir_per_speaker.insert(speaker.clone(), rir);
        }
    }

    let total_samples = plan
        .placements
        .iter()
        .map(|p| sample_index(p.onset, config.sample_rate) + sample_index(p.duration, config.sample_rate))
        .max()
        .unwrap_or(0);
    let mut mix = vec![0.0f32; total_samples];

    for placement in &plan.placements {
        let record = pool
            .find(&placement.speaker, &placement.utterance_id)
            .ok_or_else(|| {
                Error::Render(format!(
                    "utterance {} of speaker {} not found in pool",
                    placement.utterance_id, placement.speaker
                ))
            })?;
        let mut audio = read_wav(&record.path)?;
        if audio.sample_rate != config.sample_rate {
            return Err(Error::SampleRateMismatch {
                expected: config.sample_rate,
                got: audio.sample_rate,
                path: record.path.clone(),
            });
        }
        let label_len = sample_index(placement.duration, config.sample_rate);
        audio.samples.truncate(label_len);
        if let Some(rir) = rir_per_speaker.get(&placement.speaker) {
            audio = convolve_rir(&audio, rir)?;
        }
        let offset = sample_index(placement.onset, config.sample_rate);
        for (k, &x) in audio.samples.iter().enumerate() {
            mix[offset + k] += x;
        }
    }

    let mut waveform = Waveform::new(mix, config.sample_rate);
    if let Some(dir) = &config.noise_dir {
        let noises = list_wavs(dir)?;
        let path = &noises[rng.below(noises.len())];
        let noise = read_wav(path)?;
        if noise.sample_rate != config.sample_rate {
            return Err(Error::SampleRateMismatch {
                expected: config.sample_rate,
                got: noise.sample_rate,
                path: path.display().to_string(),
            });
        }
        if config.snr_choices.is_empty() {
            return Err(Error::Render("snr_choices is empty".to_string()));
        }
        let snr_db = config.snr_choices[rng.below(config.snr_choices.len())];
        let active = active_sample_ranges(&annotation, config.sample_rate);
        let p = mixing_scale(&waveform, &active, &noise, snr_db)?;
        for (k, x) in waveform.samples.iter_mut().enumerate() {
            *x += (p * noise.samples[k % noise.len()] as f64) as f32;
        }
    }

    let peak = waveform.peak();
    if peak > 1.0 {
        match config.clipping {
            ClippingPolicy::Rescale => {
                let scale = 1.0 / peak;
                for x in &mut waveform.samples {
                    *x *= scale;
                }
            }
            ClippingPolicy::Clamp => {
                for x in &mut waveform.samples {
                    *x = x.clamp(-1.0, 1.0);
                }
            }
        }
    }
    Ok((waveform, annotation))
}
