//! Python bindings: the main types and operations of the simulation toolkit.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use convmix_core::metrics;
use convmix_core::params::{self, SelectionMode};
use convmix_core::pool;
use convmix_core::render;
use convmix_core::sampling;
use convmix_core::simulate;
use convmix_core::stats;
use convmix_core::synth;
use convmix_core::timeline;
use convmix_core::wav;

fn err(e: convmix_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<SelectionMode> {
    match mode {
        "random" => Ok(SelectionMode::Random),
        "markov" => Ok(SelectionMode::Markov),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'random' or 'markov', got {other:?}"
        ))),
    }
}

fn mode_name(mode: SelectionMode) -> &'static str {
    match mode {
        SelectionMode::Random => "random",
        SelectionMode::Markov => "markov",
    }
}

/// Simulation parameters (betas, transition probabilities, mixture knobs).
#[pyclass(name = "SimParams", from_py_object)]
#[derive(Clone)]
struct PySimParams {
    inner: params::SimParams,
}

#[pymethods]
impl PySimParams {
    /// Parameters estimated from the CALLHOME two-speaker adaptation set.
    #[staticmethod]
    fn callhome() -> Self {
        Self {
            inner: params::SimParams::callhome(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: params::params_from_json(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: params::load_params(path).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        params::params_to_json(&self.inner).map_err(err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        params::save_params(path, &self.inner).map_err(err)
    }

    /// Human-readable invariant violations; empty means valid.
    fn validate(&self) -> Vec<String> {
        params::validate_params(&self.inner)
    }

    #[getter]
    fn beta(&self) -> [f64; 4] {
        self.inner.beta
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn mode(&self) -> &'static str {
        mode_name(self.inner.mode)
    }

    #[setter]
    fn set_mode(&mut self, mode: &str) -> PyResult<()> {
        self.inner.mode = parse_mode(mode)?;
        Ok(())
    }

    #[getter]
    fn p_ind(&self) -> [f64; 4] {
        self.inner.p_ind
    }

    #[getter]
    fn p_markov(&self) -> Option<[[f64; 4]; 4]> {
        self.inner.p_markov
    }

    #[getter]
    fn n_spk(&self) -> usize {
        self.inner.n_spk
    }

    #[setter]
    fn set_n_spk(&mut self, n: usize) {
        self.inner.n_spk = n;
    }

    #[getter]
    fn n_utt(&self) -> usize {
        self.inner.n_utt
    }

    #[setter]
    fn set_n_utt(&mut self, n: usize) {
        self.inner.n_utt = n;
    }

    #[getter]
    fn snr_choices(&self) -> Vec<f64> {
        self.inner.snr_choices.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "SimParams(mode={}, n_spk={}, n_utt={})",
            mode_name(self.inner.mode),
            self.inner.n_spk,
            self.inner.n_utt
        )
    }
}

/// Speaker-activity annotation of one recording.
#[pyclass(name = "Annotation", from_py_object)]
#[derive(Clone)]
struct PyAnnotation {
    inner: timeline::Annotation,
}

#[pymethods]
impl PyAnnotation {
    #[new]
    fn new(recording_id: String, segments: Vec<(String, f64, f64)>, extent: f64) -> PyResult<Self> {
        let segments = segments
            .into_iter()
            .map(|(speaker, onset, duration)| timeline::TimedSegment::new(speaker, onset, duration))
            .collect();
        Ok(Self {
            inner: timeline::Annotation::new(recording_id, segments, extent).map_err(err)?,
        })
    }

    #[getter]
    fn recording_id(&self) -> &str {
        &self.inner.recording_id
    }

    #[getter]
    fn extent(&self) -> f64 {
        self.inner.extent
    }

    /// Segments as (speaker, onset, duration) tuples, sorted by onset.
    fn segments(&self) -> Vec<(String, f64, f64)> {
        self.inner
            .segments
            .iter()
            .map(|s| (s.speaker.clone(), s.onset, s.duration))
            .collect()
    }

    fn speakers(&self) -> Vec<String> {
        self.inner.speakers()
    }

    fn silence_ratio(&self) -> PyResult<f64> {
        metrics::silence_ratio(&self.inner).map_err(err)
    }

    fn overlap_ratio(&self) -> PyResult<f64> {
        metrics::overlap_ratio(&self.inner).map_err(err)
    }

    /// (silence durations, overlap durations) in seconds.
    fn duration_samples(&self) -> (Vec<f64>, Vec<f64>) {
        metrics::duration_samples(&self.inner)
    }

    /// Maximal constant-speaker-count intervals as (start, end, count).
    fn speaker_count_intervals(&self) -> Vec<(f64, f64, usize)> {
        timeline::speaker_count_intervals(&self.inner)
    }

    /// Transitions as (type code, measurement) in onset order.
    fn classify_transitions(&self) -> Vec<(String, f64)> {
        stats::classify_transitions(&self.inner)
            .into_iter()
            .map(|o| (o.ttype.code().to_string(), o.measurement))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Annotation({}, {} segments, extent={:.3})",
            self.inner.recording_id,
            self.inner.segments.len(),
            self.inner.extent
        )
    }
}

/// Label-level result of one simulated mixture.
#[pyclass(name = "MixturePlan", from_py_object)]
#[derive(Clone)]
struct PyMixturePlan {
    inner: timeline::MixturePlan,
}

#[pymethods]
impl PyMixturePlan {
    #[getter]
    fn mixture_id(&self) -> &str {
        &self.inner.mixture_id
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// Placements as (utterance_id, speaker, onset, duration), in step order.
    fn placements(&self) -> Vec<(String, String, f64, f64)> {
        self.inner
            .placements
            .iter()
            .map(|p| (p.utterance_id.clone(), p.speaker.clone(), p.onset, p.duration))
            .collect()
    }

    fn to_annotation(&self) -> PyResult<PyAnnotation> {
        Ok(PyAnnotation {
            inner: timeline::annotation_from_plan(&self.inner).map_err(err)?,
        })
    }

    fn sidecar_json(&self) -> PyResult<String> {
        simulate::PlanSidecar::from_plan(&self.inner)
            .to_json()
            .map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MixturePlan({}, {} placements)",
            self.inner.mixture_id,
            self.inner.placements.len()
        )
    }
}

/// Per-speaker utterance inventory.
#[pyclass(name = "UtterancePool", from_py_object)]
#[derive(Clone)]
struct PyUtterancePool {
    inner: pool::UtterancePool,
}

#[pymethods]
impl PyUtterancePool {
    /// Loads a JSON-lines manifest, dropping utterances shorter than
    /// `min_duration` seconds.
    #[staticmethod]
    #[pyo3(signature = (path, min_duration = 0.0))]
    fn from_manifest(path: &str, min_duration: f64) -> PyResult<Self> {
        Ok(Self {
            inner: pool::load_pool(path, min_duration).map_err(err)?,
        })
    }

    /// Builds a pool from (id, speaker, duration, path) tuples.
    #[staticmethod]
    #[pyo3(signature = (records, min_duration = 0.0))]
    fn from_records(records: Vec<(String, String, f64, String)>, min_duration: f64) -> PyResult<Self> {
        let records = records
            .into_iter()
            .map(|(id, speaker, duration, path)| pool::UtteranceRecord {
                id,
                speaker,
                duration,
                path,
            })
            .collect();
        Ok(Self {
            inner: pool::pool_from_records(records, min_duration).map_err(err)?,
        })
    }

    fn speakers(&self) -> Vec<String> {
        self.inner.speakers().iter().map(|s| s.to_string()).collect()
    }

    fn speaker_count(&self) -> usize {
        self.inner.speaker_count()
    }

    fn utterance_count(&self) -> usize {
        self.inner.utterance_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "UtterancePool({} speakers, {} utterances)",
            self.inner.speaker_count(),
            self.inner.utterance_count()
        )
    }
}

/// Seeded deterministic random stream.
#[pyclass(name = "Rng")]
struct PyRng {
    inner: sampling::Rng,
}

#[pymethods]
impl PyRng {
    #[new]
    fn new(seed: u64) -> Self {
        Self {
            inner: sampling::Rng::from_seed(seed),
        }
    }

    #[staticmethod]
    fn derive_seed(base_seed: u64, index: u64) -> u64 {
        sampling::Rng::derive_seed(base_seed, index)
    }

    fn uniform(&mut self) -> f64 {
        self.inner.uniform()
    }

    fn below(&mut self, n: usize) -> usize {
        self.inner.below(n)
    }

    fn exponential(&mut self, beta: f64) -> PyResult<f64> {
        sampling::sample_exponential(beta, &mut self.inner).map_err(err)
    }

    fn truncated_exponential(&mut self, beta: f64, epsilon: f64) -> PyResult<f64> {
        sampling::sample_truncated_exponential(beta, epsilon, &mut self.inner).map_err(err)
    }

    fn categorical(&mut self, probs: Vec<f64>) -> PyResult<usize> {
        sampling::sample_categorical(&probs, &mut self.inner).map_err(err)
    }
}

/// Runs the sequential turn-taking protocol.
#[pyfunction]
fn simulate_plan(pool: &PyUtterancePool, params: &PySimParams, seed: u64) -> PyResult<PyMixturePlan> {
    Ok(PyMixturePlan {
        inner: simulate::simulate_plan(&pool.inner, &params.inner, seed).map_err(err)?,
    })
}

/// Runs the concat-and-sum baseline over a sampled subset of the pool.
#[pyfunction]
fn concat_and_sum_plan(
    pool: &PyUtterancePool,
    n_spk: usize,
    n_utt: usize,
    beta: f64,
    seed: u64,
) -> PyResult<PyMixturePlan> {
    Ok(PyMixturePlan {
        inner: simulate::concat_and_sum_from_pool(&pool.inner, n_spk, n_utt, beta, seed)
            .map_err(err)?,
    })
}

#[pyfunction]
fn parse_rttm(text: &str) -> PyResult<Vec<PyAnnotation>> {
    Ok(convmix_core::parse_rttm(text)
        .map_err(err)?
        .into_iter()
        .map(|inner| PyAnnotation { inner })
        .collect())
}

#[pyfunction]
fn write_rttm(annotations: Vec<PyAnnotation>) -> String {
    let inner: Vec<timeline::Annotation> = annotations.into_iter().map(|a| a.inner).collect();
    convmix_core::write_rttm(&inner)
}

/// 1-D earth mover's distance between two sample multisets.
#[pyfunction]
fn emd_1d(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    metrics::emd_1d(&u, &v).map_err(err)
}

/// exp(-gamma * EMD) over second-scale samples, EMD in milliseconds.
#[pyfunction]
#[pyo3(signature = (u, v, gamma = metrics::DEFAULT_GAMMA))]
fn similarity_score(u: Vec<f64>, v: Vec<f64>, gamma: f64) -> PyResult<f64> {
    metrics::similarity_score(&u, &v, gamma).map_err(err)
}

fn stats_to_dict<'py>(py: Python<'py>, stats: &metrics::DatasetStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("silence_ratio", stats.silence_ratio)?;
    d.set_item("overlap_ratio", stats.overlap_ratio)?;
    d.set_item("silence_durations", stats.silence_durations.clone())?;
    d.set_item("overlap_durations", stats.overlap_durations.clone())?;
    d.set_item("transition_counts", stats.transition_counts.clone())?;
    d.set_item("total_duration_hours", stats.total_duration_hours)?;
    Ok(d)
}

/// Pooled silence/overlap statistics of a list of annotations.
#[pyfunction]
fn dataset_stats<'py>(py: Python<'py>, annotations: Vec<PyAnnotation>) -> PyResult<Bound<'py, PyDict>> {
    let inner: Vec<timeline::Annotation> = annotations.into_iter().map(|a| a.inner).collect();
    let stats = metrics::DatasetStats::from_annotations(&inner).map_err(err)?;
    stats_to_dict(py, &stats)
}

/// Compares two datasets of annotations; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (a, b, gamma = metrics::DEFAULT_GAMMA))]
fn compare_datasets<'py>(
    py: Python<'py>,
    a: Vec<PyAnnotation>,
    b: Vec<PyAnnotation>,
    gamma: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let a: Vec<timeline::Annotation> = a.into_iter().map(|x| x.inner).collect();
    let b: Vec<timeline::Annotation> = b.into_iter().map(|x| x.inner).collect();
    let stats_a = metrics::DatasetStats::from_annotations(&a).map_err(err)?;
    let stats_b = metrics::DatasetStats::from_annotations(&b).map_err(err)?;
    let report = metrics::compare_datasets_with_gamma(&stats_a, &stats_b, gamma);
    let d = PyDict::new(py);
    d.set_item("silence_ratio_a", report.silence_ratio_a)?;
    d.set_item("overlap_ratio_a", report.overlap_ratio_a)?;
    d.set_item("silence_ratio_b", report.silence_ratio_b)?;
    d.set_item("overlap_ratio_b", report.overlap_ratio_b)?;
    d.set_item("silence_similarity", report.silence_similarity)?;
    d.set_item("overlap_similarity", report.overlap_similarity)?;
    d.set_item("emd_silence_ms", report.emd_silence_ms)?;
    d.set_item("emd_overlap_ms", report.emd_overlap_ms)?;
    Ok(d)
}

/// Estimates simulation parameters from annotations; returns
/// (SimParams, diagnostics dict).
#[pyfunction]
#[pyo3(signature = (annotations, mode = "markov", epsilon = 0.03, uniform_column_fallback = false))]
fn estimate_params<'py>(
    py: Python<'py>,
    annotations: Vec<PyAnnotation>,
    mode: &str,
    epsilon: f64,
    uniform_column_fallback: bool,
) -> PyResult<(PySimParams, Bound<'py, PyDict>)> {
    let inner: Vec<timeline::Annotation> = annotations.into_iter().map(|a| a.inner).collect();
    let options = stats::EstimateOptions {
        mode: parse_mode(mode)?,
        epsilon,
        uniform_column_fallback,
        ..Default::default()
    };
    let (params, diag) = stats::estimate_params(&inner, &options).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n_recordings", diag.n_recordings)?;
    d.set_item("n_observations", diag.n_observations)?;
    d.set_item("type_counts", diag.type_counts)?;
    d.set_item("bigram_counts", diag.bigram_counts)?;
    d.set_item("beta", diag.beta)?;
    d.set_item("beta_standard_error", diag.beta_standard_error)?;
    d.set_item("uniform_fallback_columns", diag.uniform_fallback_columns)?;
    Ok((PySimParams { inner: params }, d))
}

/// Renders a plan to (samples, sample_rate, Annotation); directories may be
/// None for dry/noise-free output.
#[pyfunction]
#[pyo3(signature = (plan, pool, seed, sample_rate = 8000, rir_dir = None, noise_dir = None, snr_choices = None))]
fn render_mixture(
    plan: &PyMixturePlan,
    pool: &PyUtterancePool,
    seed: u64,
    sample_rate: u32,
    rir_dir: Option<String>,
    noise_dir: Option<String>,
    snr_choices: Option<Vec<f64>>,
) -> PyResult<(Vec<f32>, u32, PyAnnotation)> {
    let config = render::RenderConfig {
        rir_dir: rir_dir.map(Into::into),
        noise_dir: noise_dir.map(Into::into),
        snr_choices: snr_choices.unwrap_or_else(|| vec![5.0, 10.0, 15.0, 20.0]),
        sample_rate,
        clipping: render::ClippingPolicy::Rescale,
    };
    let (waveform, annotation) =
        render::render_mixture(&plan.inner, &pool.inner, &config, seed).map_err(err)?;
    Ok((
        waveform.samples,
        waveform.sample_rate,
        PyAnnotation { inner: annotation },
    ))
}

#[pyfunction]
fn read_wav(path: &str) -> PyResult<(Vec<f32>, u32)> {
    let w = wav::read_wav(path).map_err(err)?;
    Ok((w.samples, w.sample_rate))
}

/// Writes PCM16 mono; returns the number of clipped samples.
#[pyfunction]
fn write_wav(path: &str, samples: Vec<f32>, sample_rate: u32) -> PyResult<usize> {
    wav::write_wav(path, &wav::Waveform::new(samples, sample_rate)).map_err(err)
}

/// Generates a synthetic utterance pool on disk; returns the manifest path.
#[pyfunction]
#[pyo3(signature = (out_dir, speakers = 20, utterances_per_speaker = 50, mean_duration = 3.0, seed = 0, lognormal = false))]
fn synth_pool(
    out_dir: &str,
    speakers: usize,
    utterances_per_speaker: usize,
    mean_duration: f64,
    seed: u64,
    lognormal: bool,
) -> PyResult<String> {
    let spec = synth::SynthPoolSpec {
        speakers,
        utterances_per_speaker,
        mean_duration,
        duration_model: if lognormal {
            synth::DurationModel::LogNormal
        } else {
            synth::DurationModel::Exponential
        },
        seed,
        ..Default::default()
    };
    let records = synth::synth_utterance_records(&spec).map_err(err)?;
    synth::write_pool_audio(out_dir, &spec, &records).map_err(err)?;
    let manifest = std::path::Path::new(out_dir).join("pool.jsonl");
    let file = std::fs::File::create(&manifest)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    pool::write_manifest(std::io::BufWriter::new(file), &records).map_err(err)?;
    Ok(manifest.display().to_string())
}

#[pymodule]
fn convmix(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySimParams>()?;
    m.add_class::<PyAnnotation>()?;
    m.add_class::<PyMixturePlan>()?;
    m.add_class::<PyUtterancePool>()?;
    m.add_class::<PyRng>()?;
    m.add_function(wrap_pyfunction!(simulate_plan, m)?)?;
    m.add_function(wrap_pyfunction!(concat_and_sum_plan, m)?)?;
    m.add_function(wrap_pyfunction!(parse_rttm, m)?)?;
    m.add_function(wrap_pyfunction!(write_rttm, m)?)?;
    m.add_function(wrap_pyfunction!(emd_1d, m)?)?;
    m.add_function(wrap_pyfunction!(similarity_score, m)?)?;
    m.add_function(wrap_pyfunction!(dataset_stats, m)?)?;
    m.add_function(wrap_pyfunction!(compare_datasets, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_params, m)?)?;
    m.add_function(wrap_pyfunction!(render_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(read_wav, m)?)?;
    m.add_function(wrap_pyfunction!(write_wav, m)?)?;
    m.add_function(wrap_pyfunction!(synth_pool, m)?)?;
    Ok(())
}
