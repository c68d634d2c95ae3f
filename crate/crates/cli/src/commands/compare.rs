use std::path::PathBuf;

use clap::Args;

use convmix_core::metrics::{compare_datasets_with_gamma, DatasetStats, DEFAULT_GAMMA};

use crate::errors::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Reference dataset: RTTM files or directories.
    #[arg(long, required = true, num_args = 1..)]
    pub a: Vec<PathBuf>,
    /// Candidate dataset: RTTM files or directories.
    #[arg(long, required = true, num_args = 1..)]
    pub b: Vec<PathBuf>,
    /// Similarity scale: sim = exp(-gamma * EMD[ms]).
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, default_value = "A")]
    pub name_a: String,
    #[arg(long, default_value = "B")]
    pub name_b: String,
}

pub fn run(args: CompareArgs) -> CliResult<()> {
    if !(args.gamma > 0.0) {
        return Err(CliError::Usage(format!(
            "--gamma must be positive, got {}",
            args.gamma
        )));
    }
    let stats_a = load_stats(&args.a)?;
    let stats_b = load_stats(&args.b)?;
    let report = compare_datasets_with_gamma(&stats_a, &stats_b, args.gamma);

    let fmt_sim = |s: Option<f64>| match s {
        Some(v) => format!("{v:13.3}"),
        None => format!("{:>13}", "n/a"),
    };
    println!("Durations are EMD-scored in milliseconds; sim = exp(-gamma * EMD).");
    println!();
    println!(
        "{:<24} {:>8} {:>8} {:>8} {:>13} {:>13}",
        "Dataset", "Hours", "Silence", "Overlap", "Silence sim.", "Overlap sim."
    );
    println!(
        "{:<24} {:>8.1} {:>8.3} {:>8.3} {:>13.3} {:>13.3}",
        args.name_a, stats_a.total_duration_hours, stats_a.silence_ratio, stats_a.overlap_ratio,
        1.000, 1.000
    );
    println!(
        "{:<24} {:>8.1} {:>8.3} {:>8.3} {} {}",
        args.name_b,
        stats_b.total_duration_hours,
        stats_b.silence_ratio,
        stats_b.overlap_ratio,
        fmt_sim(report.silence_similarity),
        fmt_sim(report.overlap_similarity)
    );
    if let (Some(es), Some(eo)) = (report.emd_silence_ms, report.emd_overlap_ms) {
        println!();
        println!("EMD silence {es:.1} ms, overlap {eo:.1} ms");
    }

    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

fn load_stats(inputs: &[PathBuf]) -> CliResult<DatasetStats> {
    let paths = super::collect_rttm_paths(inputs)?;
    let annotations = super::load_annotations(&paths)?;
    Ok(DatasetStats::from_annotations(&annotations)?)
}
