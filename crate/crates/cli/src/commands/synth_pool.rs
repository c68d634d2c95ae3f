use std::path::PathBuf;

use clap::{Args, ValueEnum};

use convmix_core::pool::write_manifest;
use convmix_core::synth::{
    synth_utterance_records, write_noise_set, write_pool_audio, write_rir_set, DurationModel,
    SynthPoolSpec,
};

use crate::errors::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct SynthPoolArgs {
    /// Output directory (audio/ plus pool.jsonl; optional noise/ and rir/).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub speakers: usize,
    #[arg(long, default_value_t = 50)]
    pub utts_per_speaker: usize,
    /// Mean of the exponential duration distribution, seconds.
    #[arg(long, default_value_t = 3.0)]
    pub mean_duration: f64,
    #[arg(long, default_value_t = 0.3)]
    pub min_duration: f64,
    #[arg(long, default_value_t = 10.0)]
    pub max_duration: f64,
    /// Duration distribution shape.
    #[arg(long, value_enum, default_value = "exponential")]
    pub duration_model: Durations,
    #[arg(long, default_value_t = 8000)]
    pub sample_rate: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write this many background-noise WAVs under noise/.
    #[arg(long, default_value_t = 0)]
    pub noises: usize,
    /// Also write this many RIR WAVs under rir/ (index 0 is an identity tap).
    #[arg(long, default_value_t = 0)]
    pub rirs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Durations {
    Exponential,
    Lognormal,
}

pub fn run(args: SynthPoolArgs) -> CliResult<()> {
    if args.speakers == 0 || args.utts_per_speaker == 0 {
        return Err(CliError::Usage(
            "--speakers and --utts-per-speaker must be at least 1".to_string(),
        ));
    }
    if !(args.min_duration >= 0.0 && args.max_duration > args.min_duration) {
        return Err(CliError::Usage(
            "need 0 <= --min-duration < --max-duration".to_string(),
        ));
    }
    let spec = SynthPoolSpec {
        speakers: args.speakers,
        utterances_per_speaker: args.utts_per_speaker,
        mean_duration: args.mean_duration,
        min_duration: args.min_duration,
        max_duration: args.max_duration,
        duration_model: match args.duration_model {
            Durations::Exponential => DurationModel::Exponential,
            Durations::Lognormal => DurationModel::LogNormal,
        },
        sample_rate: args.sample_rate,
        seed: args.seed,
    };
    super::ensure_dir(&args.out)?;
    let records = synth_utterance_records(&spec)?;
    write_pool_audio(&args.out, &spec, &records)?;
    let manifest_path = args.out.join("pool.jsonl");
    let file = std::fs::File::create(&manifest_path)?;
    write_manifest(std::io::BufWriter::new(file), &records)
        .map_err(|e| CliError::Data(e.to_string()))?;
    if args.noises > 0 {
        write_noise_set(args.out.join("noise"), args.noises, 10.0, args.sample_rate, args.seed)?;
    }
    if args.rirs > 0 {
        write_rir_set(args.out.join("rir"), args.rirs, args.sample_rate, args.seed)?;
    }
    println!(
        "wrote {} utterances for {} speakers -> {}",
        records.len(),
        args.speakers,
        manifest_path.display()
    );
    Ok(())
}
