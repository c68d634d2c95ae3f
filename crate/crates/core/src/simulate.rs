//! Label-level conversation construction.
//!
//! Two protocols: the sequential turn-taking protocol, which arranges
//! utterances one at a time according to sampled transition types, and the
//! concat-and-sum baseline, which chains each speaker independently and
//! overlays the chains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{SelectionMode, SimParams};
use crate::pool::{UtteranceRecord, UtterancePool};
use crate::sampling::{
    next_transition, sample_exponential, sample_truncated_exponential, Rng,
};
use crate::timeline::{MixturePlan, PlacedUtterance, TransitionType};

/// Attempts to draw a backchannel that fits the free span before giving up
/// and falling back to an interruption.
pub const BACKCHANNEL_RETRIES: usize = 10;

/// Running state of the sequential arrangement.
///
/// `u_prev` is the placed utterance with the latest end time so far;
/// `free_start` marks the beginning of its trailing part that no other
/// utterance overlaps. The turn holder (`last_speaker`) is the speaker of
/// `u_prev`: a backchannel does not take the turn, so it updates neither.
#[derive(Debug, Clone)]
pub struct SimState {
    pub timeline_end: f64,
    pub u_prev: PlacedUtterance,
    pub free_start: f64,
    pub last_speaker: String,
    pub last_transition: Option<TransitionType>,
}

impl SimState {
    /// State after placing the first utterance at onset 0.
    pub fn initial(first: PlacedUtterance) -> Self {
        Self {
            timeline_end: first.end(),
            free_start: first.onset,
            last_speaker: first.speaker.clone(),
            u_prev: first,
            last_transition: None,
        }
    }

    /// Length of the unoverlapped tail of `u_prev`.
    pub fn free_span(&self) -> f64 {
        self.u_prev.end() - self.free_start
    }
}

/// Onset and overlap duration of an interruption with overlap ratio `rho`.
pub fn interruption_onset(timeline_end: f64, free_len: f64, next_dur: f64, rho: f64) -> (f64, f64) {
    let delta = rho * free_len.min(next_dur);
    (timeline_end - delta, delta)
}

/// Places `u_next` according to `ttype`, advancing the state.
///
/// Preconditions: for turn-hold the speaker must equal the turn holder, for
/// the other types it must differ; a backchannel must fit the free span.
pub fn apply_transition(
    state: &mut SimState,
    ttype: TransitionType,
    u_next: &UtteranceRecord,
    rng: &mut Rng,
    params: &SimParams,
) -> Result<PlacedUtterance> {
    let same_speaker = u_next.speaker == state.last_speaker;
    match ttype {
        TransitionType::TurnHold if !same_speaker => {
            return Err(Error::Simulation(format!(
                "turn-hold requires speaker {} to continue, got {}",
                state.last_speaker, u_next.speaker
            )));
        }
        TransitionType::TurnHold => {}
        _ if same_speaker => {
            return Err(Error::Simulation(format!(
                "{} requires a speaker other than {}",
                ttype.code(),
                state.last_speaker
            )));
        }
        _ => {}
    }

    let beta = params.beta_for(ttype);
    let placed = match ttype {
        TransitionType::TurnHold | TransitionType::TurnSwitch => {
            let gap = sample_exponential(beta, rng)?;
            let placed = PlacedUtterance {
                utterance_id: u_next.id.clone(),
                speaker: u_next.speaker.clone(),
                onset: state.timeline_end + gap,
                duration: u_next.duration,
            };
            state.free_start = placed.onset;
            state.timeline_end = placed.end();
            state.u_prev = placed.clone();
            state.last_speaker = placed.speaker.clone();
            placed
        }
        TransitionType::Interruption => {
            let rho = sample_truncated_exponential(beta, params.epsilon, rng)?;
            let (onset, _delta) =
                interruption_onset(state.timeline_end, state.free_span(), u_next.duration, rho);
            let placed = PlacedUtterance {
                utterance_id: u_next.id.clone(),
                speaker: u_next.speaker.clone(),
                onset,
                duration: u_next.duration,
            };
            // The interrupted utterance's end becomes the start of the new
            // utterance's unoverlapped tail.
            state.free_start = state.u_prev.end().max(onset);
            debug_assert!(placed.end() >= state.timeline_end);
            state.timeline_end = placed.end();
            state.u_prev = placed.clone();
            state.last_speaker = placed.speaker.clone();
            placed
        }
        TransitionType::Backchannel => {
            if u_next.duration > state.free_span() + 1e-12 {
                return Err(Error::Simulation(
                    "backchannel longer than free span".to_string(),
                ));
            }
            // The overlap ratio is drawn to keep the stream layout uniform
            // across types; a backchannel is positioned uniformly inside the
            // free span, so rho does not constrain the placement.
            let _rho = sample_truncated_exponential(beta, params.epsilon, rng)?;
            let latest_start = state.u_prev.end() - u_next.duration;
            let onset = if latest_start > state.free_start {
                rng.uniform_in(state.free_start, latest_start)
            } else {
                state.free_start
            };
            let placed = PlacedUtterance {
                utterance_id: u_next.id.clone(),
                speaker: u_next.speaker.clone(),
                onset,
                duration: u_next.duration,
            };
            // u_prev keeps the turn; only its free span shrinks.
            state.free_start = placed.end();
            placed
        }
    };
    state.last_transition = Some(ttype);
    Ok(placed)
}

/// Remaining per-speaker utterances of one mixture, drawn without
/// replacement.
struct MixtureInventory {
    speakers: Vec<String>,
    remaining: Vec<Vec<UtteranceRecord>>,
}

impl MixtureInventory {
    fn sample_speakers(pool: &UtterancePool, n_spk: usize, rng: &mut Rng) -> Result<Self> {
        let all = pool.speakers();
        if all.len() < n_spk {
            return Err(Error::Simulation(format!(
                "pool has {} speakers, need {n_spk}",
                all.len()
            )));
        }
        // Partial Fisher-Yates over the sorted speaker list.
        let mut candidates: Vec<&str> = all;
        let mut chosen = Vec::with_capacity(n_spk);
        for _ in 0..n_spk {
            let idx = rng.below(candidates.len());
            chosen.push(candidates.swap_remove(idx).to_string());
        }
        let remaining = chosen
            .iter()
            .map(|s| pool.utterances(s).unwrap().to_vec())
            .collect();
        Ok(Self {
            speakers: chosen,
            remaining,
        })
    }

    fn speaker_index(&self, speaker: &str) -> usize {
        self.speakers.iter().position(|s| s == speaker).unwrap()
    }

    fn draw(&mut self, speaker_idx: usize, rng: &mut Rng) -> Result<UtteranceRecord> {
        let utts = &mut self.remaining[speaker_idx];
        if utts.is_empty() {
            return Err(Error::PoolExhausted(self.speakers[speaker_idx].clone()));
        }
        let idx = rng.below(utts.len());
        Ok(utts.remove(idx))
    }

    /// Draws an utterance no longer than `max_dur`, retrying a bounded number
    /// of times. On failure returns the last candidate with `fits = false`.
    fn draw_fitting(
        &mut self,
        speaker_idx: usize,
        max_dur: f64,
        rng: &mut Rng,
    ) -> Result<(UtteranceRecord, bool)> {
        for attempt in 0..BACKCHANNEL_RETRIES {
            let utts = &mut self.remaining[speaker_idx];
            if utts.is_empty() {
                return Err(Error::PoolExhausted(self.speakers[speaker_idx].clone()));
            }
            let idx = rng.below(utts.len());
            if utts[idx].duration <= max_dur {
                return Ok((utts.remove(idx), true));
            }
            if attempt == BACKCHANNEL_RETRIES - 1 {
                return Ok((utts.remove(idx), false));
            }
        }
        unreachable!()
    }
}

/// Runs the sequential protocol: places exactly `params.n_utt` utterances,
/// the first at onset 0, the rest according to sampled transition types.
///
/// Utterances are drawn without replacement per speaker within one mixture.
/// When a backchannel cannot fit the free span after a bounded number of
/// candidate draws, the step falls back to an interruption so the utterance
/// count is preserved.
pub fn simulate_plan(pool: &UtterancePool, params: &SimParams, seed: u64) -> Result<MixturePlan> {
    let violations = params.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations.join("; ")));
    }
    let mut rng = Rng::from_seed(seed);
    let mut inventory = MixtureInventory::sample_speakers(pool, params.n_spk, &mut rng)?;

    let first_speaker = rng.below(params.n_spk);
    let first = inventory.draw(first_speaker, &mut rng)?;
    let first_placed = PlacedUtterance {
        utterance_id: first.id.clone(),
        speaker: first.speaker.clone(),
        onset: 0.0,
        duration: first.duration,
    };
    let mut state = SimState::initial(first_placed.clone());
    let mut placements = vec![first_placed];

    for _ in 1..params.n_utt {
        let mut ttype = if params.n_spk == 1 {
            // Only turn-hold is possible with a single speaker.
            TransitionType::TurnHold
        } else {
            next_transition(params.mode, state.last_transition, params, &mut rng)?
        };

        let placed = match ttype {
            TransitionType::TurnHold => {
                let idx = inventory.speaker_index(&state.last_speaker);
                let utt = inventory.draw(idx, &mut rng)?;
                apply_transition(&mut state, ttype, &utt, &mut rng, params)?
            }
            TransitionType::TurnSwitch | TransitionType::Interruption => {
                let idx = sample_other_speaker(&inventory, &state.last_speaker, &mut rng);
                let utt = inventory.draw(idx, &mut rng)?;
                apply_transition(&mut state, ttype, &utt, &mut rng, params)?
            }
            TransitionType::Backchannel => {
                let idx = sample_other_speaker(&inventory, &state.last_speaker, &mut rng);
                let (utt, fits) =
                    inventory.draw_fitting(idx, state.free_span(), &mut rng)?;
                if !fits {
                    ttype = TransitionType::Interruption;
                }
                apply_transition(&mut state, ttype, &utt, &mut rng, params)?
            }
        };
        placements.push(placed);
    }

    Ok(MixturePlan {
        mixture_id: format!("sim-{seed:016x}"),
        placements,
        params: params.clone(),
        seed,
    })
}

fn sample_other_speaker(inventory: &MixtureInventory, exclude: &str, rng: &mut Rng) -> usize {
    let options: Vec<usize> = (0..inventory.speakers.len())
        .filter(|&i| inventory.speakers[i] != exclude)
        .collect();
    options[rng.below(options.len())]
}

/// Builds the concat-and-sum baseline plan: each speaker's utterances are
/// chained from time 0 with exponential gaps of mean `beta` seconds, and the
/// chains are overlaid. The plan extent is the longest chain.
pub fn concat_and_sum_plan(
    per_speaker: &[(String, Vec<UtteranceRecord>)],
    beta: f64,
    seed: u64,
) -> Result<MixturePlan> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "concat-and-sum beta must be positive, got {beta}"
        )));
    }
    if per_speaker.is_empty() || per_speaker.iter().any(|(_, utts)| utts.is_empty()) {
        return Err(Error::Simulation(
            "concat-and-sum requires at least one utterance per speaker".to_string(),
        ));
    }
    let mut rng = Rng::from_seed(seed);
    let mut placements = Vec::new();
    for (speaker, utts) in per_speaker {
        let mut t = 0.0;
        for (i, utt) in utts.iter().enumerate() {
            placements.push(PlacedUtterance {
                utterance_id: utt.id.clone(),
                speaker: speaker.clone(),
                onset: t,
                duration: utt.duration,
            });
            t += utt.duration;
            if i + 1 < utts.len() {
                t += sample_exponential(beta, &mut rng)?;
            }
        }
    }
    let mut params = SimParams::callhome();
    params.mode = SelectionMode::Random;
    params.n_spk = per_speaker.len();
    params.n_utt = placements.len();
    Ok(MixturePlan {
        mixture_id: format!("concat-{seed:016x}"),
        placements,
        params,
        seed,
    })
}

/// Samples speakers and utterances from a pool and runs the baseline.
/// `n_utt` is the total number of utterances, split as evenly as possible
/// across the sampled speakers.
pub fn concat_and_sum_from_pool(
    pool: &UtterancePool,
    n_spk: usize,
    n_utt: usize,
    beta: f64,
    seed: u64,
) -> Result<MixturePlan> {
    if n_utt < n_spk {
        return Err(Error::Simulation(format!(
            "n_utt {n_utt} must be at least n_spk {n_spk}"
        )));
    }
    let mut rng = Rng::substream(seed, 0);
    let mut inventory = MixtureInventory::sample_speakers(pool, n_spk, &mut rng)?;
    let base = n_utt / n_spk;
    let extra = n_utt % n_spk;
    let mut per_speaker = Vec::with_capacity(n_spk);
    for i in 0..n_spk {
        let count = base + usize::from(i < extra);
        let mut utts = Vec::with_capacity(count);
        for _ in 0..count {
            utts.push(inventory.draw(i, &mut rng)?);
        }
        per_speaker.push((inventory.speakers[i].clone(), utts));
    }
    concat_and_sum_plan(&per_speaker, beta, Rng::derive_seed(seed, 1))
}

/// Sidecar description of a plan: enough to re-render given the pool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanSidecar {
    pub mixture_id: String,
    pub seed: u64,
    pub placements: Vec<SidecarPlacement>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarPlacement {
    pub id: String,
    pub speaker: String,
    pub onset: f64,
}

impl PlanSidecar {
    pub fn from_plan(plan: &MixturePlan) -> Self {
        Self {
            mixture_id: plan.mixture_id.clone(),
            seed: plan.seed,
            placements: plan
                .placements
                .iter()
                .map(|p| SidecarPlacement {
                    id: p.utterance_id.clone(),
                    speaker: p.speaker.clone(),
                    onset: p.onset,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
