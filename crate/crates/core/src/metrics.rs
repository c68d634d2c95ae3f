//! Dataset statistics and realism scoring.
//!
//! Silence and overlap ratios come from the speaker-count partition of each
//! annotation. Dataset similarity is `exp(-gamma * EMD)` over pooled
//! silence (or overlap) duration samples, with the EMD computed in
//! milliseconds so the default `gamma = 0.001` spreads real-vs-simulated
//! scores over a useful range.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::timeline::{speaker_count_intervals, Annotation, TransitionType};

/// Scaling parameter of the similarity score.
pub const DEFAULT_GAMMA: f64 = 0.001;

/// Fraction of the recording with no active speaker.
pub fn silence_ratio(annotation: &Annotation) -> Result<f64> {
    if !(annotation.extent > 0.0) {
        return Err(Error::Metrics(format!(
            "annotation {} has zero extent",
            annotation.recording_id
        )));
    }
    let (t0, _t1, _t2) = count_durations(annotation);
    Ok(t0 / annotation.extent)
}

/// Fraction of speech time with two or more simultaneous speakers.
pub fn overlap_ratio(annotation: &Annotation) -> Result<f64> {
    let (_t0, t1, t2) = count_durations(annotation);
    if !(t1 > 0.0) {
        return Err(Error::Metrics(format!(
            "annotation {} contains no speech",
            annotation.recording_id
        )));
    }
    Ok(t2 / t1)
}

/// (no-speaker, some-speaker, multi-speaker) total durations.
fn count_durations(annotation: &Annotation) -> (f64, f64, f64) {
    let mut t0 = 0.0;
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for (start, end, count) in speaker_count_intervals(annotation) {
        let d = end - start;
        if count == 0 {
            t0 += d;
        } else {
            t1 += d;
            if count >= 2 {
                t2 += d;
            }
        }
    }
    (t0, t1, t2)
}

/// Lengths of maximal silence and overlap intervals, in seconds.
///
/// Silence samples are confined to the span between the first speech onset
/// and the last speech offset; leading and trailing silence reflects
/// recording trimming, not turn-taking. Overlap samples have no such
/// exclusion.
pub fn duration_samples(annotation: &Annotation) -> (Vec<f64>, Vec<f64>) {
    let intervals = speaker_count_intervals(annotation);
    let first_speech = intervals
        .iter()
        .find(|&&(_, _, c)| c > 0)
        .map(|&(s, _, _)| s);
    let last_speech = intervals
        .iter()
        .rev()
        .find(|&&(_, _, c)| c > 0)
        .map(|&(_, e, _)| e);
    let (Some(first), Some(last)) = (first_speech, last_speech) else {
        return (Vec::new(), Vec::new());
    };

    let mut silences = Vec::new();
    let mut overlaps = Vec::new();
    let mut overlap_run: Option<(f64, f64)> = None;
    for (start, end, count) in intervals {
        if count == 0 && start >= first && end <= last {
            silences.push(end - start);
        }
        if count >= 2 {
            overlap_run = match overlap_run {
                Some((s, e)) if start == e => Some((s, end)),
                Some((s, e)) => {
                    overlaps.push(e - s);
                    Some((start, end))
                }
                None => Some((start, end)),
            };
        } else if let Some((s, e)) = overlap_run.take() {
            overlaps.push(e - s);
        }
    }
    if let Some((s, e)) = overlap_run {
        overlaps.push(e - s);
    }
    (silences, overlaps)
}

/// One-dimensional earth mover's distance between two empirical
/// distributions, computed as the area between their CDFs. This closed form
/// equals the optimal-transport cost with L1 ground distance.
pub fn emd_1d(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::Metrics("no samples".to_string()));
    }
    let mut us = u.to_vec();
    let mut vs = v.to_vec();
    us.sort_by(f64::total_cmp);
    vs.sort_by(f64::total_cmp);

    let mut values: Vec<f64> = us.iter().chain(vs.iter()).copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let mut emd = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    for w in values.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        while i < us.len() && us[i] <= x0 {
            i += 1;
        }
        while j < vs.len() && vs[j] <= x0 {
            j += 1;
        }
        let cdf_u = i as f64 / us.len() as f64;
        let cdf_v = j as f64 / vs.len() as f64;
        emd += (cdf_u - cdf_v).abs() * (x1 - x0);
    }
    Ok(emd)
}

/// `exp(-gamma * EMD)` with the EMD taken over millisecond-scale samples.
/// Inputs are in seconds and are converted before the distance.
pub fn similarity_score(u_seconds: &[f64], v_seconds: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Metrics(format!("gamma must be positive, got {gamma}")));
    }
    Ok((-gamma * emd_milliseconds(u_seconds, v_seconds)?).exp())
}

/// EMD between two second-scale sample sets, expressed in milliseconds.
pub fn emd_milliseconds(u_seconds: &[f64], v_seconds: &[f64]) -> Result<f64> {
    let u_ms: Vec<f64> = u_seconds.iter().map(|x| x * 1000.0).collect();
    let v_ms: Vec<f64> = v_seconds.iter().map(|x| x * 1000.0).collect();
    emd_1d(&u_ms, &v_ms)
}

/// Aggregate statistics of one dataset of annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub silence_ratio: f64,
    pub overlap_ratio: f64,
    /// Pooled maximal-silence lengths in seconds.
    pub silence_durations: Vec<f64>,
    /// Pooled maximal-overlap lengths in seconds.
    pub overlap_durations: Vec<f64>,
    pub transition_counts: BTreeMap<String, usize>,
    pub total_duration_hours: f64,
}

impl DatasetStats {
    /// Pools interval samples and aggregates ratios over a whole dataset.
    pub fn from_annotations(annotations: &[Annotation]) -> Result<Self> {
        if annotations.is_empty() {
            return Err(Error::Metrics("no annotations".to_string()));
        }
        let mut t0 = 0.0;
        let mut t1 = 0.0;
        let mut t2 = 0.0;
        let mut extent = 0.0;
        let mut silence_durations = Vec::new();
        let mut overlap_durations = Vec::new();
        for ann in annotations {
            let (a0, a1, a2) = count_durations(ann);
            t0 += a0;
            t1 += a1;
            t2 += a2;
            extent += ann.extent;
            let (mut s, mut o) = duration_samples(ann);
            silence_durations.append(&mut s);
            overlap_durations.append(&mut o);
        }
        if !(extent > 0.0) {
            return Err(Error::Metrics("dataset has zero total extent".to_string()));
        }
        if !(t1 > 0.0) {
            return Err(Error::Metrics("dataset contains no speech".to_string()));
        }
        let mut transition_counts = BTreeMap::new();
        for t in TransitionType::ALL {
            transition_counts.insert(t.code().to_string(), 0);
        }
        for ann in annotations {
            if ann.segments.len() < 2 {
                continue;
            }
            for obs in crate::stats::classify_transitions(ann) {
                *transition_counts
                    .get_mut(obs.ttype.code())
                    .expect("all types present") += 1;
            }
        }
        Ok(Self {
            silence_ratio: t0 / extent,
            overlap_ratio: t2 / t1,
            silence_durations,
            overlap_durations,
            transition_counts,
            total_duration_hours: extent / 3600.0,
        })
    }
}

/// Side-by-side comparison of two datasets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub silence_ratio_a: f64,
    pub overlap_ratio_a: f64,
    pub silence_ratio_b: f64,
    pub overlap_ratio_b: f64,
    pub silence_ratio_delta: f64,
    pub overlap_ratio_delta: f64,
    /// None when either side has no silence samples.
    pub silence_similarity: Option<f64>,
    /// None when either side has no overlap samples.
    pub overlap_similarity: Option<f64>,
    pub emd_silence_ms: Option<f64>,
    pub emd_overlap_ms: Option<f64>,
}

/// Compares two datasets with the default gamma.
pub fn compare_datasets(a: &DatasetStats, b: &DatasetStats) -> ComparisonReport {
    compare_datasets_with_gamma(a, b, DEFAULT_GAMMA)
}

pub fn compare_datasets_with_gamma(
    a: &DatasetStats,
    b: &DatasetStats,
    gamma: f64,
) -> ComparisonReport {
    let silence = emd_milliseconds(&a.silence_durations, &b.silence_durations).ok();
    let overlap = emd_milliseconds(&a.overlap_durations, &b.overlap_durations).ok();
    ComparisonReport {
        silence_ratio_a: a.silence_ratio,
        overlap_ratio_a: a.overlap_ratio,
        silence_ratio_b: b.silence_ratio,
        overlap_ratio_b: b.overlap_ratio,
        silence_ratio_delta: b.silence_ratio - a.silence_ratio,
        overlap_ratio_delta: b.overlap_ratio - a.overlap_ratio,
        silence_similarity: silence.map(|d| (-gamma * d).exp()),
        overlap_similarity: overlap.map(|d| (-gamma * d).exp()),
        emd_silence_ms: silence,
        emd_overlap_ms: overlap,
    }
}
