//! Speaker-activity timelines: segments, annotations, and interval statistics.
//!
//! All times are continuous seconds (f64). Segments are half-open
//! `[onset, onset + duration)` intervals.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::params::SimParams;

/// One contiguous stretch of speech by a single speaker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedSegment {
    /// Speaker identifier (opaque string).
    pub speaker: String,
    /// Start time in seconds, >= 0.
    pub onset: f64,
    /// Length in seconds, > 0.
    pub duration: f64,
}

impl TimedSegment {
    pub fn new(speaker: impl Into<String>, onset: f64, duration: f64) -> Self {
        Self {
            speaker: speaker.into(),
            onset,
            duration,
        }
    }

    /// End time in seconds.
    pub fn end(&self) -> f64 {
        self.onset + self.duration
    }
}

/// Ground-truth speaker activity for one recording.
///
/// Segments are kept sorted by onset (ties broken by speaker id) and must
/// all end within `extent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub recording_id: String,
    pub segments: Vec<TimedSegment>,
    /// Recording length in seconds.
    pub extent: f64,
}

impl Annotation {
    /// Builds an annotation, sorting segments and validating invariants.
    pub fn new(
        recording_id: impl Into<String>,
        mut segments: Vec<TimedSegment>,
        extent: f64,
    ) -> Result<Self> {
        sort_segments(&mut segments);
        for seg in &segments {
            if seg.onset < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "segment onset {} is negative",
                    seg.onset
                )));
            }
            if !(seg.duration > 0.0) || !seg.end().is_finite() {
                return Err(Error::InvalidParams(format!(
                    "segment duration {} is not positive and finite",
                    seg.duration
                )));
            }
            if seg.end() > extent + 1e-9 {
                return Err(Error::InvalidParams(format!(
                    "segment ending at {} exceeds extent {}",
                    seg.end(),
                    extent
                )));
            }
        }
        Ok(Self {
            recording_id: recording_id.into(),
            segments,
            extent,
        })
    }

    /// Distinct speaker ids, sorted.
    pub fn speakers(&self) -> Vec<String> {
        self.segments
            .iter()
            .map(|s| s.speaker.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

pub(crate) fn sort_segments(segments: &mut [TimedSegment]) {
    segments.sort_by(|a, b| {
        a.onset
            .total_cmp(&b.onset)
            .then_with(|| a.speaker.cmp(&b.speaker))
    });
}

/// The four ways one utterance can follow another in a conversation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransitionType {
    /// Same speaker continues after a pause.
    #[serde(rename = "TH")]
    TurnHold,
    /// A different speaker starts after a gap.
    #[serde(rename = "TS")]
    TurnSwitch,
    /// A different speaker starts before the current utterance ends.
    #[serde(rename = "IR")]
    Interruption,
    /// A short utterance fully inside another speaker's utterance.
    #[serde(rename = "BC")]
    Backchannel,
}

impl TransitionType {
    /// Canonical order used for probability vectors and matrices.
    pub const ALL: [TransitionType; 4] = [
        TransitionType::TurnHold,
        TransitionType::TurnSwitch,
        TransitionType::Interruption,
        TransitionType::Backchannel,
    ];

    /// Position in the canonical (TH, TS, IR, BC) order.
    pub fn index(self) -> usize {
        match self {
            TransitionType::TurnHold => 0,
            TransitionType::TurnSwitch => 1,
            TransitionType::Interruption => 2,
            TransitionType::Backchannel => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<TransitionType> {
        TransitionType::ALL.get(i).copied()
    }

    pub fn code(self) -> &'static str {
        match self {
            TransitionType::TurnHold => "TH",
            TransitionType::TurnSwitch => "TS",
            TransitionType::Interruption => "IR",
            TransitionType::Backchannel => "BC",
        }
    }
}

/// An utterance pinned to the timeline of one mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedUtterance {
    pub utterance_id: String,
    pub speaker: String,
    pub onset: f64,
    pub duration: f64,
}

impl PlacedUtterance {
    pub fn end(&self) -> f64 {
        self.onset + self.duration
    }
}

/// The label-level result of one simulated mixture, before audio rendering.
///
/// Placements are listed in the order they were arranged, which is not
/// necessarily onset order (backchannels start inside an earlier utterance).
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePlan {
    pub mixture_id: String,
    pub placements: Vec<PlacedUtterance>,
    pub params: SimParams,
    pub seed: u64,
}

/// Converts a plan's placements into a sorted annotation.
///
/// Extent is the latest placement end.
pub fn annotation_from_plan(plan: &MixturePlan) -> Result<Annotation> {
    if plan.placements.is_empty() {
        return Err(Error::EmptyPlan);
    }
    let segments: Vec<TimedSegment> = plan
        .placements
        .iter()
        .map(|p| TimedSegment::new(p.speaker.clone(), p.onset, p.duration))
        .collect();
    let extent = segments.iter().map(|s| s.end()).fold(0.0, f64::max);
    Annotation::new(plan.mixture_id.clone(), segments, extent)
}

/// Partitions `[0, extent]` into maximal intervals of constant
/// simultaneous-speaker count.
///
/// Overlapping segments of the same speaker count as one active speaker.
/// Interval durations sum to the extent.
pub fn speaker_count_intervals(annotation: &Annotation) -> Vec<(f64, f64, usize)> {
    // Merge each speaker's segments first so self-overlap cannot double-count.
    let mut events: Vec<(f64, i32)> = Vec::new();
    let mut current_speaker: Option<&str> = None;
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut by_speaker: Vec<Vec<(f64, f64)>> = Vec::new();

    let mut segs: Vec<&TimedSegment> = annotation.segments.iter().collect();
    segs.sort_by(|a, b| {
        a.speaker
            .cmp(&b.speaker)
            .then_with(|| a.onset.total_cmp(&b.onset))
    });
    for seg in segs {
        if current_speaker != Some(seg.speaker.as_str()) {
            if !merged.is_empty() {
                by_speaker.push(std::mem::take(&mut merged));
            }
            current_speaker = Some(seg.speaker.as_str());
        }
        match merged.last_mut() {
            Some(last) if seg.onset <= last.1 => last.1 = last.1.max(seg.end()),
            _ => merged.push((seg.onset, seg.end())),
        }
    }
    if !merged.is_empty() {
        by_speaker.push(merged);
    }

    for intervals in &by_speaker {
        for &(start, end) in intervals {
            events.push((start, 1));
            events.push((end, -1));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    let mut cursor = 0.0;
    let mut count: i32 = 0;
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        if t > cursor {
            push_interval(&mut out, cursor, t, count as usize);
            cursor = t;
        }
        while i < events.len() && events[i].0 == t {
            count += events[i].1;
            i += 1;
        }
    }
    if annotation.extent > cursor {
        push_interval(&mut out, cursor, annotation.extent, count as usize);
    }
    if out.is_empty() {
        out.push((0.0, annotation.extent, 0));
    }
    out
}

fn push_interval(out: &mut Vec<(f64, f64, usize)>, start: f64, end: f64, count: usize) {
    match out.last_mut() {
        Some(last) if last.2 == count => last.1 = end,
        _ => out.push((start, end, count)),
    }
}
