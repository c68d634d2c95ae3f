//! The inverse of the simulator: classify transitions in real annotations
//! and estimate simulation parameters from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{SelectionMode, SimParams, TransitionMatrix, DEFAULT_EPSILON};
use crate::timeline::{sort_segments, Annotation, TimedSegment, TransitionType};

/// One observed transition: the type plus its measurement (a gap in seconds
/// for TH/TS, an overlap ratio for IR/BC).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionObservation {
    pub ttype: TransitionType,
    pub measurement: f64,
}

/// Classifies consecutive-utterance transitions in one annotation.
///
/// Segments are processed in onset order while tracking the utterance with
/// the latest end time (`u_prev`) and the start of its unoverlapped tail,
/// mirroring the generator's bookkeeping so that generate-then-estimate
/// round trips recover the generating statistics. Same-speaker overlapping
/// segments are merged before classification.
pub fn classify_transitions(annotation: &Annotation) -> Vec<TransitionObservation> {
    let segments = merge_same_speaker_overlaps(annotation);
    if segments.len() < 2 {
        return Vec::new();
    }

    let mut observations = Vec::with_capacity(segments.len() - 1);
    let mut u_prev = segments[0].clone();
    let mut free_start = u_prev.onset;

    for u_next in &segments[1..] {
        let prev_end = u_prev.end();
        let free_len = (prev_end - free_start).max(0.0);
        if u_next.onset >= prev_end {
            // No overlap: pause when the speaker holds, gap when it switches.
            let ttype = if u_next.speaker == u_prev.speaker {
                TransitionType::TurnHold
            } else {
                TransitionType::TurnSwitch
            };
            observations.push(TransitionObservation {
                ttype,
                measurement: u_next.onset - prev_end,
            });
            u_prev = u_next.clone();
            free_start = u_prev.onset;
        } else if u_next.end() > prev_end {
            let overlap = prev_end - u_next.onset;
            let denom = free_len.min(u_next.duration);
            let rho = if denom > 0.0 { (overlap / denom).min(1.0) } else { 1.0 };
            observations.push(TransitionObservation {
                ttype: TransitionType::Interruption,
                measurement: rho,
            });
            free_start = prev_end.max(u_next.onset);
            u_prev = u_next.clone();
        } else {
            // Fully contained in u_prev: a backchannel. u_prev keeps the turn.
            let denom = free_len.min(u_next.duration);
            let rho = if denom > 0.0 {
                (u_next.duration / denom).min(1.0)
            } else {
                1.0
            };
            observations.push(TransitionObservation {
                ttype: TransitionType::Backchannel,
                measurement: rho,
            });
            free_start = free_start.max(u_next.end()).min(prev_end);
        }
    }
    observations
}

fn merge_same_speaker_overlaps(annotation: &Annotation) -> Vec<TimedSegment> {
    let mut segs = annotation.segments.clone();
    segs.sort_by(|a, b| {
        a.speaker
            .cmp(&b.speaker)
            .then_with(|| a.onset.total_cmp(&b.onset))
    });
    let mut merged: Vec<TimedSegment> = Vec::with_capacity(segs.len());
    let mut merges = 0usize;
    for seg in segs {
        match merged.last_mut() {
            Some(last) if last.speaker == seg.speaker && seg.onset < last.end() => {
                last.duration = last.duration.max(seg.end() - last.onset);
                merges += 1;
            }
            _ => merged.push(seg),
        }
    }
    if merges > 0 {
        log::warn!(
            "{}: merged {merges} same-speaker overlapping segments before classification",
            annotation.recording_id
        );
    }
    sort_segments(&mut merged);
    merged
}

/// Mean of the exponential distribution with rate parameter `beta`
/// truncated to `[lo, hi]`.
pub fn truncated_exp_mean(beta: f64, lo: f64, hi: f64) -> f64 {
    // m = beta + (lo - (hi - lo + ... )): factor e^{-lo/beta} out for stability.
    let d = (hi - lo) / beta;
    let e = (-d).exp();
    beta + (lo - hi * e) / (1.0 - e)
}

/// Recovers `beta` from an observed mean of truncated-exponential samples by
/// bisecting the monotone mean function. Means at or beyond the flat-density
/// limit clamp to the bracket edge.
pub fn invert_truncated_exp_mean(observed_mean: f64, lo: f64, hi: f64) -> f64 {
    const BETA_MIN: f64 = 1e-6;
    const BETA_MAX: f64 = 1e6;
    let center = (lo + hi) / 2.0;
    if observed_mean <= truncated_exp_mean(BETA_MIN, lo, hi) {
        return BETA_MIN;
    }
    if observed_mean >= center || observed_mean >= truncated_exp_mean(BETA_MAX, lo, hi) {
        return BETA_MAX;
    }
    let (mut a, mut b) = (BETA_MIN.ln(), BETA_MAX.ln());
    for _ in 0..200 {
        let mid = (a + b) / 2.0;
        if truncated_exp_mean(mid.exp(), lo, hi) < observed_mean {
            a = mid;
        } else {
            b = mid;
        }
    }
    ((a + b) / 2.0).exp()
}

/// Extraction by-products: per-type counts, raw bigram table, standard
/// errors, and any fallbacks applied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionDiagnostics {
    pub n_recordings: usize,
    pub n_observations: usize,
    /// Counts in canonical (TH, TS, IR, BC) order.
    pub type_counts: [usize; 4],
    /// `bigram_counts[next][current]`.
    pub bigram_counts: [[usize; 4]; 4],
    /// Estimated beta per type; None when the type was never observed.
    pub beta: [Option<f64>; 4],
    /// Standard error of the per-type sample mean.
    pub beta_standard_error: [Option<f64>; 4],
    /// Columns of `p_markov` that fell back to uniform for lack of support.
    pub uniform_fallback_columns: Vec<usize>,
}

/// Options for [`estimate_params`].
#[derive(Debug, Clone)]
pub struct EstimateOptions {
    pub mode: SelectionMode,
    /// Truncation used when inverting the overlap-ratio mean.
    pub epsilon: f64,
    /// Substitute a uniform column when a current-state has no bigrams.
    pub uniform_column_fallback: bool,
    pub snr_choices: Vec<f64>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            mode: SelectionMode::Markov,
            epsilon: DEFAULT_EPSILON,
            uniform_column_fallback: false,
            snr_choices: vec![5.0, 10.0, 15.0, 20.0],
        }
    }
}

/// Estimates simulation parameters from annotated recordings.
///
/// Gap betas are sample means; overlap-ratio betas come from inverting the
/// truncated-exponential mean after clamping observations into the
/// truncation support. `p_ind` is the normalized type histogram and
/// `p_markov` the column-normalized bigram table; observation sequences do
/// not bridge recordings.
pub fn estimate_params(
    annotations: &[Annotation],
    options: &EstimateOptions,
) -> Result<(SimParams, ExtractionDiagnostics)> {
    if annotations.is_empty() {
        return Err(Error::Extraction("no annotations".to_string()));
    }
    let mut type_counts = [0usize; 4];
    let mut bigram_counts = [[0usize; 4]; 4];
    let mut sums = [0.0f64; 4];
    let mut sq_sums = [0.0f64; 4];
    let mut n_observations = 0usize;

    for ann in annotations {
        let observations = classify_transitions(ann);
        let mut prev: Option<TransitionType> = None;
        for obs in &observations {
            let i = obs.ttype.index();
            type_counts[i] += 1;
            n_observations += 1;
            let value = match obs.ttype {
                TransitionType::TurnHold | TransitionType::TurnSwitch => obs.measurement,
                _ => obs
                    .measurement
                    .clamp(options.epsilon, 1.0 - options.epsilon),
            };
            sums[i] += value;
            sq_sums[i] += value * value;
            if let Some(p) = prev {
                bigram_counts[i][p.index()] += 1;
            }
            prev = Some(obs.ttype);
        }
    }
    if n_observations == 0 {
        return Err(Error::Extraction(
            "annotations contain no transitions".to_string(),
        ));
    }

    let mut beta_est = [None; 4];
    let mut beta_se = [None; 4];
    for i in 0..4 {
        let n = type_counts[i];
        if n == 0 {
            continue;
        }
        let mean = sums[i] / n as f64;
        let var = (sq_sums[i] / n as f64 - mean * mean).max(0.0);
        beta_se[i] = Some((var / n as f64).sqrt());
        beta_est[i] = Some(match TransitionType::ALL[i] {
            TransitionType::TurnHold | TransitionType::TurnSwitch => mean,
            _ => invert_truncated_exp_mean(mean, options.epsilon, 1.0 - options.epsilon),
        });
    }

    let mut p_ind = [0.0; 4];
    for i in 0..4 {
        p_ind[i] = type_counts[i] as f64 / n_observations as f64;
    }

    let mut uniform_fallback_columns = Vec::new();
    let p_markov = match options.mode {
        SelectionMode::Random => None,
        SelectionMode::Markov => {
            let mut m: TransitionMatrix = [[0.0; 4]; 4];
            for j in 0..4 {
                let total: usize = (0..4).map(|i| bigram_counts[i][j]).sum();
                if total == 0 {
                    if type_counts[j] == 0 {
                        // Type never occurs; any column works since the chain
                        // cannot reach it. Use uniform to stay stochastic.
                        for i in 0..4 {
                            m[i][j] = 0.25;
                        }
                        continue;
                    }
                    if !options.uniform_column_fallback {
                        return Err(Error::Extraction(format!(
                            "p_markov column {j} ({}) has no bigram support",
                            TransitionType::ALL[j].code()
                        )));
                    }
                    uniform_fallback_columns.push(j);
                    for i in 0..4 {
                        m[i][j] = 0.25;
                    }
                    continue;
                }
                for i in 0..4 {
                    m[i][j] = bigram_counts[i][j] as f64 / total as f64;
                }
            }
            Some(m)
        }
    };

    // Mixture-level knobs are not recoverable from transition statistics;
    // take them from the annotations themselves.
    let n_spk = annotations
        .iter()
        .map(|a| a.speakers().len())
        .max()
        .unwrap_or(1)
        .max(1);
    let mean_segments =
        annotations.iter().map(|a| a.segments.len()).sum::<usize>() as f64
            / annotations.len() as f64;
    let n_utt = (mean_segments.round() as usize).max(1);

    let params = SimParams {
        // Unobserved types get a neutral positive beta; their probability is
        // zero, so the value is never sampled.
        beta: [
            beta_est[0].unwrap_or(1.0),
            beta_est[1].unwrap_or(1.0),
            beta_est[2].unwrap_or(1.0),
            beta_est[3].unwrap_or(1.0),
        ],
        epsilon: options.epsilon,
        mode: options.mode,
        p_ind,
        p_markov,
        n_spk,
        n_utt,
        snr_choices: options.snr_choices.clone(),
    };
    let diagnostics = ExtractionDiagnostics {
        n_recordings: annotations.len(),
        n_observations,
        type_counts,
        bigram_counts,
        beta: beta_est,
        beta_standard_error: beta_se,
        uniform_fallback_columns,
    };
    Ok((params, diagnostics))
}
