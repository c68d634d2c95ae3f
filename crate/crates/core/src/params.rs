//! Simulation parameters: transition probabilities, expected durations, and
//! mixture-level knobs, with JSON (de)serialization and validation.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::timeline::TransitionType;

/// How the next transition type is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// Each transition type is drawn independently from `p_ind`.
    Random,
    /// Transition types follow a first-order chain over the four types.
    Markov,
}

/// Row-major 4x4 matrix: entry `[next][current]` is the probability of
/// moving to type `next` given the current type. Columns sum to 1.
pub type TransitionMatrix = [[f64; 4]; 4];

/// All knobs of the sequential simulation protocol.
///
/// `beta` entries follow the canonical (TH, TS, IR, BC) order: TH/TS values
/// are expected silence durations in seconds, IR/BC values are the rate of
/// the overlap-ratio distribution (dimensionless).
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub beta: [f64; 4],
    /// Truncation for the overlap ratio: rho is confined to [epsilon, 1-epsilon].
    pub epsilon: f64,
    pub mode: SelectionMode,
    /// Marginal transition-type probabilities in canonical order.
    pub p_ind: [f64; 4],
    /// Required for Markov mode; column-stochastic.
    pub p_markov: Option<TransitionMatrix>,
    /// Speakers per mixture.
    pub n_spk: usize,
    /// Utterances per mixture.
    pub n_utt: usize,
    /// SNR candidates in dB for noise mixing.
    pub snr_choices: Vec<f64>,
}

pub const DEFAULT_EPSILON: f64 = 0.03;

impl SimParams {
    /// Parameters estimated from the CALLHOME two-speaker adaptation set.
    pub fn callhome() -> Self {
        Self {
            beta: [0.57, 0.40, 0.10, 0.44],
            epsilon: DEFAULT_EPSILON,
            mode: SelectionMode::Markov,
            p_ind: [0.15, 0.31, 0.44, 0.10],
            p_markov: Some([
                [0.26, 0.11, 0.09, 0.31],
                [0.23, 0.38, 0.29, 0.29],
                [0.27, 0.45, 0.53, 0.31],
                [0.24, 0.06, 0.09, 0.09],
            ]),
            n_spk: 2,
            n_utt: 30,
            snr_choices: vec![5.0, 10.0, 15.0, 20.0],
        }
    }

    pub fn beta_for(&self, ttype: TransitionType) -> f64 {
        self.beta[ttype.index()]
    }

    /// Column of `p_markov` conditioned on the current type.
    pub fn markov_column(&self, current: TransitionType) -> Option<[f64; 4]> {
        let m = self.p_markov?;
        let j = current.index();
        Some([m[0][j], m[1][j], m[2][j], m[3][j]])
    }

    pub fn validate(&self) -> Vec<String> {
        validate_params(self)
    }
}

/// Checks every invariant and returns a human-readable message per violation.
/// An empty list means the parameters are valid.
pub fn validate_params(p: &SimParams) -> Vec<String> {
    let mut violations = Vec::new();
    for (i, beta) in p.beta.iter().enumerate() {
        if !(*beta > 0.0) {
            violations.push(format!(
                "beta.{} must be positive, got {}",
                TransitionType::ALL[i].code().to_lowercase(),
                beta
            ));
        }
    }
    if !(p.epsilon > 0.0 && p.epsilon < 0.5) {
        violations.push(format!("epsilon must be in (0, 0.5), got {}", p.epsilon));
    }
    if p.p_ind.iter().any(|&x| x < 0.0) {
        violations.push("p_ind has a negative entry".to_string());
    } else {
        let sum: f64 = p.p_ind.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            violations.push(format!("p_ind sums to {sum}"));
        }
    }
    match (&p.p_markov, p.mode) {
        (None, SelectionMode::Markov) => {
            violations.push("p_markov is required in markov mode".to_string());
        }
        (Some(m), _) => {
            for (j, ttype) in TransitionType::ALL.iter().enumerate() {
                if (0..4).any(|i| m[i][j] < 0.0) {
                    violations.push(format!(
                        "p_markov column {j} ({}) has a negative entry",
                        ttype.code()
                    ));
                    continue;
                }
                let sum: f64 = (0..4).map(|i| m[i][j]).sum();
                if (sum - 1.0).abs() > 1e-9 {
                    violations.push(format!("p_markov column {j} sums to {sum}"));
                }
            }
        }
        (None, SelectionMode::Random) => {}
    }
    if p.n_spk < 1 {
        violations.push("n_spk must be >= 1".to_string());
    }
    if p.n_utt < 1 {
        violations.push("n_utt must be >= 1".to_string());
    }
    if p.snr_choices.is_empty() {
        violations.push("snr_choices must not be empty".to_string());
    }
    violations
}

const CANONICAL_TYPE_ORDER: [&str; 4] = ["TH", "TS", "IR", "BC"];

#[derive(Serialize, Deserialize)]
struct BetaFile {
    th: f64,
    ts: f64,
    ir: f64,
    bc: f64,
}

/// On-disk JSON form of [`SimParams`]. The matrix is row-major with rows =
/// next type and columns = current type, in the declared `type_order`.
#[derive(Serialize, Deserialize)]
struct ParamsFile {
    beta: BetaFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    mode: SelectionMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    type_order: Option<Vec<String>>,
    p_ind: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_markov: Option<Vec<Vec<f64>>>,
    n_spk: usize,
    n_utt: usize,
    snr_choices: Vec<f64>,
}

pub fn params_from_json(text: &str) -> Result<SimParams> {
    let file: ParamsFile = serde_json::from_str(text)?;
    if let Some(order) = &file.type_order {
        if order != &CANONICAL_TYPE_ORDER {
            return Err(Error::InvalidParams(format!(
                "unsupported type_order {order:?}; expected {CANONICAL_TYPE_ORDER:?}"
            )));
        }
    }
    let epsilon = file.epsilon.unwrap_or_else(|| {
        log::info!("epsilon missing from params file; defaulting to {DEFAULT_EPSILON}");
        DEFAULT_EPSILON
    });
    if file.p_ind.len() != 4 {
        return Err(Error::InvalidParams(format!(
            "p_ind must have 4 entries, got {}",
            file.p_ind.len()
        )));
    }
    let mut p_ind = [0.0; 4];
    p_ind.copy_from_slice(&file.p_ind);
    let p_markov = match file.p_markov {
        Some(rows) => {
            if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                return Err(Error::InvalidParams("p_markov must be 4x4".to_string()));
            }
            let mut m = [[0.0; 4]; 4];
            for (i, row) in rows.iter().enumerate() {
                m[i].copy_from_slice(row);
            }
            Some(m)
        }
        None => None,
    };
    let params = SimParams {
        beta: [file.beta.th, file.beta.ts, file.beta.ir, file.beta.bc],
        epsilon,
        mode: file.mode,
        p_ind,
        p_markov,
        n_spk: file.n_spk,
        n_utt: file.n_utt,
        snr_choices: file.snr_choices,
    };
    let violations = validate_params(&params);
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations.join("; ")));
    }
    Ok(params)
}

pub fn params_to_json(p: &SimParams) -> Result<String> {
    let violations = validate_params(p);
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations.join("; ")));
    }
    let file = ParamsFile {
        beta: BetaFile {
            th: p.beta[0],
            ts: p.beta[1],
            ir: p.beta[2],
            bc: p.beta[3],
        },
        epsilon: Some(p.epsilon),
        mode: p.mode,
        type_order: Some(CANONICAL_TYPE_ORDER.iter().map(|s| s.to_string()).collect()),
        p_ind: p.p_ind.to_vec(),
        p_markov: p.p_markov.map(|m| m.iter().map(|r| r.to_vec()).collect()),
        n_spk: p.n_spk,
        n_utt: p.n_utt,
        snr_choices: p.snr_choices.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn load_params(path: impl AsRef<Path>) -> Result<SimParams> {
    let text = std::fs::read_to_string(path)?;
    params_from_json(&text)
}

pub fn save_params(path: impl AsRef<Path>, p: &SimParams) -> Result<()> {
    std::fs::write(path, params_to_json(p)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn callhome_params_are_valid() {
        assert!(validate_params(&SimParams::callhome()).is_empty());
    }

    #[test]
    fn p_ind_sum_violation_is_reported() {
        let mut p = SimParams::callhome();
        p.p_ind = [0.5, 0.5, 0.5, 0.5];
        let violations = validate_params(&p);
        assert!(violations.iter().any(|v| v == "p_ind sums to 2"));
    }

    #[test]
    fn markov_column_sum_violation_names_column() {
        let mut p = SimParams::callhome();
        let mut m = p.p_markov.unwrap();
        m[2][2] -= 0.02; // IR column now sums to 0.98
        p.p_markov = Some(m);
        let violations = validate_params(&p);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].starts_with("p_markov column 2 sums to 0.98"));
    }

    #[test]
    fn markov_columns_of_callhome_matrix_sum_to_one() {
        let p = SimParams::callhome();
        let m = p.p_markov.unwrap();
        for j in 0..4 {
            let sum: f64 = (0..4).map(|i| m[i][j]).sum();
            assert!((sum - 1.0).abs() < 1e-12, "column {j} sums to {sum}");
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let p = SimParams::callhome();
        let text = params_to_json(&p).unwrap();
        let q = params_from_json(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn missing_epsilon_defaults() {
        let text = r#"{
            "beta": {"th": 0.57, "ts": 0.40, "ir": 0.10, "bc": 0.44},
            "mode": "random",
            "p_ind": [0.15, 0.31, 0.44, 0.10],
            "n_spk": 2, "n_utt": 30, "snr_choices": [10]
        }"#;
        let p = params_from_json(text).unwrap();
        assert_eq!(p.epsilon, DEFAULT_EPSILON);
        assert_eq!(p.p_markov, None);
    }

    #[test]
    fn bad_markov_column_in_json_is_rejected() {
        let text = r#"{
            "beta": {"th": 0.57, "ts": 0.40, "ir": 0.10, "bc": 0.44},
            "epsilon": 0.03,
            "mode": "markov",
            "p_ind": [0.15, 0.31, 0.44, 0.10],
            "p_markov": [
                [0.26, 0.11, 0.07, 0.31],
                [0.23, 0.38, 0.29, 0.29],
                [0.27, 0.45, 0.53, 0.31],
                [0.24, 0.06, 0.09, 0.09]
            ],
            "n_spk": 2, "n_utt": 30, "snr_choices": [10]
        }"#;
        let err = params_from_json(text).unwrap_err();
        assert!(err.to_string().contains("column 2 sums to 0.98"));
    }

    #[test]
    fn markov_mode_without_matrix_is_rejected() {
        let mut p = SimParams::callhome();
        p.p_markov = None;
        assert!(validate_params(&p)
            .iter()
            .any(|v| v.contains("required in markov mode")));
    }
}
