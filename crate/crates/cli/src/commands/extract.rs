use std::path::PathBuf;

use clap::Args;

use convmix_core::params::SelectionMode;
use convmix_core::stats::{estimate_params, EstimateOptions};

use crate::errors::{CliError, CliResult};

use super::simulate::Selection;

#[derive(Args, Debug)]
pub struct ExtractArgs {
    /// RTTM files or directories containing them.
    #[arg(long, required = true, num_args = 1..)]
    pub rttm: Vec<PathBuf>,
    /// random estimates p_ind only; markov adds the transition matrix.
    #[arg(long, value_enum, default_value = "markov")]
    pub mode: Selection,
    /// Truncation bound used for overlap-ratio fitting.
    #[arg(long, default_value_t = 0.03)]
    pub epsilon: f64,
    /// Substitute a uniform column when a transition type has no successors.
    #[arg(long, default_value_t = false)]
    pub markov_fallback_uniform: bool,
    /// Where to write the parameter JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional diagnostics JSON (counts, bigrams, standard errors).
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
    /// Override speakers per mixture in the emitted parameters.
    #[arg(long)]
    pub n_spk: Option<usize>,
    /// Override utterances per mixture in the emitted parameters.
    #[arg(long)]
    pub n_utt: Option<usize>,
    /// SNR choices recorded in the emitted parameters, in dB.
    #[arg(long, num_args = 1.., default_values_t = vec![5.0, 10.0, 15.0, 20.0])]
    pub snr: Vec<f64>,
}

pub fn run(args: ExtractArgs) -> CliResult<()> {
    if !(args.epsilon > 0.0 && args.epsilon < 0.5) {
        return Err(CliError::Usage(format!(
            "--epsilon must be in (0, 0.5), got {}",
            args.epsilon
        )));
    }
    let paths = super::collect_rttm_paths(&args.rttm)?;
    let annotations = super::load_annotations(&paths)?;

    let options = EstimateOptions {
        mode: match args.mode {
            Selection::Random => SelectionMode::Random,
            Selection::Markov => SelectionMode::Markov,
        },
        epsilon: args.epsilon,
        uniform_column_fallback: args.markov_fallback_uniform,
        snr_choices: args.snr.clone(),
    };
    let (mut params, diagnostics) = estimate_params(&annotations, &options)?;
    if let Some(n_spk) = args.n_spk {
        params.n_spk = n_spk;
    }
    if let Some(n_utt) = args.n_utt {
        params.n_utt = n_utt;
    }

    convmix_core::save_params(&args.out, &params)?;
    println!(
        "estimated parameters from {} recordings ({} transitions) -> {}",
        diagnostics.n_recordings,
        diagnostics.n_observations,
        args.out.display()
    );
    if !diagnostics.uniform_fallback_columns.is_empty() {
        log::warn!(
            "uniform fallback applied to p_markov columns {:?}",
            diagnostics.uniform_fallback_columns
        );
    }
    if let Some(path) = &args.diagnostics {
        std::fs::write(path, serde_json::to_string_pretty(&diagnostics)?)?;
    }
    Ok(())
}
