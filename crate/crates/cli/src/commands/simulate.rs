use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use convmix_core::metrics::DatasetStats;
use convmix_core::params::{SelectionMode, SimParams};
use convmix_core::pool::{load_pool, UtterancePool};
use convmix_core::render::{render_mixture, ClippingPolicy, RenderConfig};
use convmix_core::sampling::Rng;
use convmix_core::simulate::{concat_and_sum_from_pool, simulate_plan, PlanSidecar};
use convmix_core::stats::classify_transitions;
use convmix_core::timeline::Annotation;
use convmix_core::{parse_rttm, write_rttm, write_wav};

use crate::errors::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Sequential turn-taking protocol.
    Proposed,
    /// Per-speaker chains with exponential gaps, overlaid.
    ConcatSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Selection {
    Random,
    Markov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Clipping {
    Rescale,
    Clamp,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Simulation protocol.
    #[arg(long, value_enum, default_value = "proposed")]
    pub method: Method,
    /// Parameter JSON (required for the proposed method).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Utterance manifest (JSON lines).
    #[arg(long)]
    pub pool: PathBuf,
    /// Override the selection mode from the params file.
    #[arg(long, value_enum)]
    pub selection: Option<Selection>,
    /// Mean silence gap in seconds for concat-sum.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Number of mixtures to generate.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Override speakers per mixture.
    #[arg(long)]
    pub n_spk: Option<usize>,
    /// Override utterances per mixture.
    #[arg(long)]
    pub n_utt: Option<usize>,
    /// Drop pool utterances shorter than this many seconds.
    #[arg(long, default_value_t = 0.0)]
    pub min_duration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (rttm/, plan/, wav/ subdirectories).
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; output is identical for any worker count.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Skip audio rendering; write labels only.
    #[arg(long, default_value_t = false)]
    pub labels_only: bool,
    /// Directory of RIR WAVs (omit to render dry).
    #[arg(long)]
    pub rir_dir: Option<PathBuf>,
    /// Directory of noise WAVs (omit for noise-free mixtures).
    #[arg(long)]
    pub noise_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 8000)]
    pub sample_rate: u32,
    #[arg(long, value_enum, default_value = "rescale")]
    pub clipping: Clipping,
}

#[derive(Serialize)]
struct MixtureLogLine {
    id: String,
    seed: u64,
    n_utt: usize,
    duration: f64,
    transitions: BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct Summary {
    method: String,
    selection: Option<String>,
    n_requested: usize,
    n_written: usize,
    n_failed: usize,
    seed: u64,
    labels_only: bool,
    silence_ratio: f64,
    overlap_ratio: f64,
    total_hours: f64,
    transition_counts: BTreeMap<String, usize>,
}

struct MixtureOutput {
    index: usize,
    log: MixtureLogLine,
    /// Annotation re-parsed from the emitted RTTM text, so summary numbers
    /// are computed on exactly what landed on disk.
    annotation: Annotation,
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    if args.n < 1 {
        return Err(CliError::Usage("--n must be at least 1".to_string()));
    }
    if args.workers < 1 {
        return Err(CliError::Usage("--workers must be at least 1".to_string()));
    }
    if args.method == Method::ConcatSum && args.beta.is_none() {
        return Err(CliError::Usage(
            "--beta is required for --method concat-sum".to_string(),
        ));
    }
    if args.method == Method::Proposed && args.params.is_none() {
        return Err(CliError::Usage(
            "--params is required for --method proposed".to_string(),
        ));
    }
    if let Some(beta) = args.beta {
        if !(beta > 0.0) {
            return Err(CliError::Usage(format!("--beta must be positive, got {beta}")));
        }
    }

    let mut params = match &args.params {
        Some(path) => convmix_core::load_params(path)?,
        None => SimParams::callhome(),
    };
    if let Some(selection) = args.selection {
        params.mode = match selection {
            Selection::Random => SelectionMode::Random,
            Selection::Markov => SelectionMode::Markov,
        };
    }
    if let Some(n_spk) = args.n_spk {
        params.n_spk = n_spk;
    }
    if let Some(n_utt) = args.n_utt {
        params.n_utt = n_utt;
    }
    let violations = params.validate();
    if !violations.is_empty() {
        return Err(CliError::Data(format!("invalid parameters: {}", violations.join("; "))));
    }

    let pool = load_pool(&args.pool, args.min_duration)?;

    super::ensure_dir(&args.out)?;
    super::ensure_dir(&args.out.join("rttm"))?;
    super::ensure_dir(&args.out.join("plan"))?;
    if !args.labels_only {
        super::ensure_dir(&args.out.join("wav"))?;
    }

    let render_config = RenderConfig {
        rir_dir: args.rir_dir.clone(),
        noise_dir: args.noise_dir.clone(),
        snr_choices: params.snr_choices.clone(),
        sample_rate: args.sample_rate,
        clipping: match args.clipping {
            Clipping::Rescale => ClippingPolicy::Rescale,
            Clipping::Clamp => ClippingPolicy::Clamp,
        },
    };

    let thread_pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| CliError::Data(e.to_string()))?;

    let results: Vec<Result<MixtureOutput, (usize, String)>> = thread_pool.install(|| {
        (0..args.n)
            .into_par_iter()
            .map(|i| {
                generate_one(i, &args, &params, &pool, &render_config)
                    .map_err(|e| (i, e.to_string()))
            })
            .collect()
    });

    let mut outputs = Vec::new();
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(out) => outputs.push(out),
            Err((i, msg)) => {
                log::error!("mixture {i} failed: {msg}");
                failures.push((i, msg));
            }
        }
    }
    outputs.sort_by_key(|o| o.index);

    // One JSON line per mixture, in index order regardless of worker count.
    let mut log_file = std::fs::File::create(args.out.join("log.jsonl"))?;
    for out in &outputs {
        serde_json::to_writer(&mut log_file, &out.log)?;
        log_file.write_all(b"\n")?;
    }

    if outputs.is_empty() {
        return Err(CliError::PartialFailure(format!(
            "all {} mixtures failed; first error: {}",
            args.n, failures[0].1
        )));
    }

    let annotations: Vec<Annotation> = outputs.iter().map(|o| o.annotation.clone()).collect();
    let stats = DatasetStats::from_annotations(&annotations)?;
    let summary = Summary {
        method: format!("{:?}", args.method).to_lowercase(),
        selection: match args.method {
            Method::Proposed => Some(
                match params.mode {
                    SelectionMode::Random => "random",
                    SelectionMode::Markov => "markov",
                }
                .to_string(),
            ),
            Method::ConcatSum => None,
        },
        n_requested: args.n,
        n_written: outputs.len(),
        n_failed: failures.len(),
        seed: args.seed,
        labels_only: args.labels_only,
        silence_ratio: stats.silence_ratio,
        overlap_ratio: stats.overlap_ratio,
        total_hours: stats.total_duration_hours,
        transition_counts: stats.transition_counts.clone(),
    };
    let summary_json = serde_json::to_string_pretty(&summary)?;
    std::fs::write(args.out.join("summary.json"), &summary_json)?;
    println!("{summary_json}");

    let max_failures = args.n / 100;
    if failures.len() > max_failures {
        return Err(CliError::PartialFailure(format!(
            "{} of {} mixtures failed (threshold {max_failures}); first error: {}",
            failures.len(),
            args.n,
            failures[0].1
        )));
    }
    Ok(())
}

fn generate_one(
    index: usize,
    args: &SimulateArgs,
    params: &SimParams,
    pool: &UtterancePool,
    render_config: &RenderConfig,
) -> CliResult<MixtureOutput> {
    let plan_seed = Rng::derive_seed(args.seed, 2 * index as u64);
    let render_seed = Rng::derive_seed(args.seed, 2 * index as u64 + 1);
    let mixture_id = format!("mix{index:06}");

    let mut plan = match args.method {
        Method::Proposed => simulate_plan(pool, params, plan_seed)?,
        Method::ConcatSum => concat_and_sum_from_pool(
            pool,
            params.n_spk,
            params.n_utt,
            args.beta.expect("validated"),
            plan_seed,
        )?,
    };
    plan.mixture_id = mixture_id.clone();

    let annotation = if args.labels_only {
        convmix_core::annotation_from_plan(&plan)?
    } else {
        let (waveform, annotation) = render_mixture(&plan, pool, render_config, render_seed)?;
        write_wav(args.out.join("wav").join(format!("{mixture_id}.wav")), &waveform)?;
        annotation
    };

    let rttm_text = write_rttm(std::slice::from_ref(&annotation));
    std::fs::write(args.out.join("rttm").join(format!("{mixture_id}.rttm")), &rttm_text)?;

    let sidecar = PlanSidecar::from_plan(&plan);
    std::fs::write(
        args.out.join("plan").join(format!("{mixture_id}.json")),
        sidecar.to_json()?,
    )?;

    // Summary statistics are computed from what was actually written.
    let parsed = parse_rttm(&rttm_text)?;
    let written = parsed.into_iter().next().ok_or_else(|| {
        CliError::Data(format!("mixture {mixture_id} produced empty RTTM"))
    })?;

    let mut transitions: BTreeMap<String, usize> = BTreeMap::new();
    for t in convmix_core::timeline::TransitionType::ALL {
        transitions.insert(t.code().to_string(), 0);
    }
    for obs in classify_transitions(&written) {
        *transitions.get_mut(obs.ttype.code()).expect("all types") += 1;
    }

    Ok(MixtureOutput {
        index,
        log: MixtureLogLine {
            id: mixture_id,
            seed: plan_seed,
            n_utt: plan.placements.len(),
            duration: written.extent,
            transitions,
        },
        annotation: written,
    })
}
