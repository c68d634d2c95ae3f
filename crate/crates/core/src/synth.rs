//! Deterministic synthetic audio: desk-scale stand-ins for utterance pools,
//! background noises, and room impulse responses.
//!
//! Utterances are band-limited noise bursts with a per-speaker spectral
//! tilt, so different speakers are spectrally distinct while every byte is
//! reproducible from the seed.

use std::path::Path;

use crate::error::Result;
use crate::pool::UtteranceRecord;
use crate::sampling::{sample_exponential_in, sample_standard_normal, Rng};
use crate::wav::{write_wav, Waveform};

/// Shape of the synthetic utterance-duration distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DurationModel {
    /// Exponential with the given mean, truncated to [min, max].
    Exponential,
    /// Log-normal with the given mean and sigma 0.25, clamped to [min, max];
    /// concentrates durations in roughly the 2-4 s band for a 3 s mean.
    LogNormal,
}

#[derive(Debug, Clone)]
pub struct SynthPoolSpec {
    pub speakers: usize,
    pub utterances_per_speaker: usize,
    /// Mean utterance duration, seconds.
    pub mean_duration: f64,
    pub min_duration: f64,
    pub max_duration: f64,
    pub duration_model: DurationModel,
    pub sample_rate: u32,
    pub seed: u64,
}

impl Default for SynthPoolSpec {
    fn default() -> Self {
        Self {
            speakers: 20,
            utterances_per_speaker: 50,
            mean_duration: 3.0,
            min_duration: 0.3,
            max_duration: 10.0,
            duration_model: DurationModel::Exponential,
            sample_rate: 8000,
            seed: 0,
        }
    }
}

const LOG_NORMAL_SIGMA: f64 = 0.25;

fn sample_duration(spec: &SynthPoolSpec, rng: &mut Rng) -> Result<f64> {
    match spec.duration_model {
        DurationModel::Exponential => sample_exponential_in(
            spec.mean_duration,
            spec.min_duration,
            spec.max_duration,
            rng,
        ),
        DurationModel::LogNormal => {
            let mu = spec.mean_duration.ln() - LOG_NORMAL_SIGMA * LOG_NORMAL_SIGMA / 2.0;
            let z = sample_standard_normal(rng);
            Ok((mu + LOG_NORMAL_SIGMA * z)
                .exp()
                .clamp(spec.min_duration, spec.max_duration))
        }
    }
}

fn speaker_id(index: usize) -> String {
    format!("spk{index:03}")
}

/// Draws utterance ids, speakers, and durations without touching the disk.
/// Durations are snapped to a whole number of samples so that manifest
/// durations match the audio exactly.
pub fn synth_utterance_records(spec: &SynthPoolSpec) -> Result<Vec<UtteranceRecord>> {
    let mut records = Vec::with_capacity(spec.speakers * spec.utterances_per_speaker);
    for s in 0..spec.speakers {
        for u in 0..spec.utterances_per_speaker {
            let index = (s * spec.utterances_per_speaker + u) as u64;
            let mut rng = Rng::substream(spec.seed, index);
            let drawn = sample_duration(spec, &mut rng)?;
            let samples = (drawn * spec.sample_rate as f64).round().max(1.0) as usize;
            let duration = samples as f64 / spec.sample_rate as f64;
            let speaker = speaker_id(s);
            let id = format!("{speaker}_utt{u:04}");
            records.push(UtteranceRecord {
                path: format!("audio/{id}.wav"),
                id,
                speaker,
                duration,
            });
        }
    }
    Ok(records)
}

/// Noise shaped by a one-pole lowpass whose coefficient depends on the
/// speaker, with short fades to avoid clicks. Peak 0.5.
pub fn synth_utterance_audio(
    speaker_index: usize,
    total_speakers: usize,
    samples: usize,
    sample_rate: u32,
    rng: &mut Rng,
) -> Waveform {
    let tilt = if total_speakers > 1 {
        0.05 + 0.85 * speaker_index as f64 / (total_speakers - 1) as f64
    } else {
        0.5
    };
    let mut out = Vec::with_capacity(samples);
    let mut y = 0.0f64;
    for _ in 0..samples {
        let white = rng.uniform() * 2.0 - 1.0;
        y = (1.0 - tilt) * white + tilt * y;
        out.push(y as f32);
    }
    let fade = (sample_rate as usize / 200).min(samples / 2).max(1); // 5 ms
    for k in 0..fade {
        let g = k as f32 / fade as f32;
        out[k] *= g;
        let n = out.len();
        out[n - 1 - k] *= g;
    }
    let peak = out.iter().fold(0.0f32, |m, &x| m.max(x.abs()));
    if peak > 0.0 {
        let scale = 0.5 / peak;
        for x in &mut out {
            *x *= scale;
        }
    }
    Waveform::new(out, sample_rate)
}

/// Generates the pool audio under `out_dir` (WAVs in `audio/`). Record paths
/// stay relative to `out_dir`, where the manifest is expected to live.
pub fn write_pool_audio(
    out_dir: impl AsRef<Path>,
    spec: &SynthPoolSpec,
    records: &[UtteranceRecord],
) -> Result<()> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir.join("audio"))?;
    for (index, rec) in records.iter().enumerate() {
        let speaker_index: usize = rec.speaker.trim_start_matches("spk").parse().unwrap_or(0);
        // Audio substream is offset past the duration substreams.
        let mut rng = Rng::substream(spec.seed, (1 << 32) + index as u64);
        let samples = (rec.duration * spec.sample_rate as f64).round() as usize;
        let audio = synth_utterance_audio(
            speaker_index,
            spec.speakers,
            samples,
            spec.sample_rate,
            &mut rng,
        );
        write_wav(out_dir.join(&rec.path), &audio)?;
    }
    Ok(())
}

/// Steady band-limited noise for background mixing.
pub fn synth_noise(seconds: f64, sample_rate: u32, seed: u64) -> Waveform {
    let mut rng = Rng::from_seed(seed);
    let samples = (seconds * sample_rate as f64).round() as usize;
    let mut out = Vec::with_capacity(samples);
    let mut y = 0.0f64;
    for _ in 0..samples {
        let white = rng.uniform() * 2.0 - 1.0;
        y = 0.6 * white + 0.4 * y;
        out.push((y * 0.3) as f32);
    }
    Waveform::new(out, sample_rate)
}

/// A single-tap unit impulse: convolution with it is the identity.
pub fn identity_rir(sample_rate: u32) -> Waveform {
    Waveform::new(vec![32767.0 / 32768.0], sample_rate)
}

/// A sparse decaying echo pattern, `taps` reflections over `spread_ms`.
pub fn echo_rir(sample_rate: u32, taps: usize, spread_ms: f64, seed: u64) -> Waveform {
    let mut rng = Rng::from_seed(seed);
    let len = ((spread_ms / 1000.0) * sample_rate as f64).round().max(1.0) as usize;
    let mut out = vec![0.0f32; len];
    out[0] = 1.0;
    for k in 1..taps {
        let pos = rng.below(len.max(2) - 1) + 1;
        let gain = 0.5f32.powi(k as i32) * if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        out[pos] += gain;
    }
    let peak = out.iter().fold(0.0f32, |m, &x| m.max(x.abs()));
    let scale = (32767.0 / 32768.0) / peak; // full scale without PCM16 clipping
    for x in &mut out {
        *x *= scale;
    }
    Waveform::new(out, sample_rate)
}

/// Writes `count` noise WAVs into `dir`.
pub fn write_noise_set(dir: impl AsRef<Path>, count: usize, seconds: f64, sample_rate: u32, seed: u64) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for i in 0..count {
        let noise = synth_noise(seconds, sample_rate, Rng::derive_seed(seed, i as u64));
        write_wav(dir.join(format!("noise{i:03}.wav")), &noise)?;
    }
    Ok(())
}

/// Writes `count` RIR WAVs into `dir`; index 0 is the identity impulse.
pub fn write_rir_set(dir: impl AsRef<Path>, count: usize, sample_rate: u32, seed: u64) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for i in 0..count {
        let rir = if i == 0 {
            identity_rir(sample_rate)
        } else {
            echo_rir(sample_rate, 4, 60.0, Rng::derive_seed(seed, i as u64))
        };
        write_wav(dir.join(format!("rir{i:03}.wav")), &rir)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_count_matches_spec() {
        let spec = SynthPoolSpec {
            speakers: 20,
            utterances_per_speaker: 50,
            ..Default::default()
        };
        let records = synth_utterance_records(&spec).unwrap();
        assert_eq!(records.len(), 1000);
    }

    #[test]
    fn durations_respect_bounds() {
        let spec = SynthPoolSpec::default();
        for rec in synth_utterance_records(&spec).unwrap() {
            assert!(rec.duration >= spec.min_duration - 1e-9);
            assert!(rec.duration <= spec.max_duration + 1e-9);
        }
    }

    #[test]
    fn short_utterance_fraction_matches_cdf() {
        // Exponential(mean 3) truncated to [0.3, 10]: the analytic share of
        // durations below 1.5 s is 0.343211.
        let spec = SynthPoolSpec {
            speakers: 20,
            utterances_per_speaker: 50,
            seed: 321,
            ..Default::default()
        };
        let records = synth_utterance_records(&spec).unwrap();
        let short = records.iter().filter(|r| r.duration < 1.5).count();
        let fraction = short as f64 / records.len() as f64;
        assert!((fraction - 0.343211).abs() < 0.05, "fraction {fraction}");
    }

    #[test]
    fn records_are_deterministic() {
        let spec = SynthPoolSpec::default();
        assert_eq!(
            synth_utterance_records(&spec).unwrap(),
            synth_utterance_records(&spec).unwrap()
        );
    }

    #[test]
    fn utterance_audio_is_normalized_and_faded() {
        let mut rng = Rng::from_seed(1);
        let audio = synth_utterance_audio(3, 20, 8000, 8000, &mut rng);
        assert_eq!(audio.len(), 8000);
        assert!((audio.peak() - 0.5).abs() < 1e-6);
        assert_eq!(audio.samples[0], 0.0);
    }

    #[test]
    fn identity_rir_single_tap() {
        let rir = identity_rir(8000);
        assert_eq!(rir.len(), 1);
    }
}
