//! Simulation of natural multi-speaker conversational audio for diarization
//! training, plus the statistics used to judge how realistic a dataset is.
//!
//! The crate covers the full pipeline at the label and audio level:
//!
//! - [`timeline`]: speaker-activity segments, annotations, interval sweeps
//! - [`params`]: simulation parameters and their JSON form
//! - [`pool`]: per-speaker utterance inventories (JSON-lines manifests)
//! - [`sampling`]: seeded draws (exponential, truncated exponential,
//!   categorical, transition selection)
//! - [`simulate`]: the sequential turn-taking protocol and the
//!   concat-and-sum baseline
//! - [`render`]: RIR convolution, placement, noise and SNR mixing
//! - [`metrics`]: silence/overlap ratios, 1-D earth mover's distance,
//!   similarity scores
//! - [`stats`]: transition classification and parameter estimation from
//!   real annotations
//! - [`rttm`] / [`wav`]: interchange formats
//! - [`synth`]: deterministic synthetic pools for tests and demos

pub mod error;
pub mod metrics;
pub mod params;
pub mod pool;
pub mod render;
pub mod rttm;
pub mod sampling;
pub mod simulate;
pub mod stats;
pub mod synth;
pub mod timeline;
pub mod wav;

pub use error::{Error, Result};
pub use metrics::{compare_datasets, emd_1d, overlap_ratio, silence_ratio, DatasetStats};
pub use params::{load_params, save_params, validate_params, SelectionMode, SimParams};
pub use pool::{load_pool, UtterancePool, UtteranceRecord};
pub use rttm::{parse_rttm, write_rttm};
pub use sampling::Rng;
pub use simulate::{apply_transition, concat_and_sum_plan, simulate_plan, SimState};
pub use stats::{classify_transitions, estimate_params};
pub use timeline::{
    annotation_from_plan, speaker_count_intervals, Annotation, MixturePlan, PlacedUtterance,
    TimedSegment, TransitionType,
};
pub use wav::{read_wav, write_wav, Waveform};
