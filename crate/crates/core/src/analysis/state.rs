//! Full comparison of the estimators at one state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{correlation_matrix, mse_table, noisy_control, CorrelationMatrix, MseTable};
use crate::error::{CoreError, Result};
use crate::explainers::Method;

/// Mean traces of one estimator, one per action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodTraces {
    pub method: Method,
    pub per_action: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateAnalysis {
    pub state: usize,
    /// Memory-based traces with multiplicative noise, one per action.
    /// Present only when there is a baseline and something to compare.
    pub noisy: Option<Vec<Vec<f64>>>,
    pub mse: Option<MseTable>,
    pub correlations: CorrelationMatrix,
}

/// Correlation-matrix label such as `"Lm"`: action letter, then method letter.
pub fn series_label(action_letter: char, kind_letter: char) -> String {
    format!("{}{}", action_letter.to_ascii_uppercase(), kind_letter)
}

/// Compares every estimator at `state`.
///
/// With a memory-based baseline and at least one other method, the result
/// includes MSE against the baseline and a noisy control that perturbs the
/// baseline with an RNG seeded by `noise_seed`, drawing actions in order.
/// Otherwise only the correlations among the given traces are computed.
pub fn analyze_state(
    state: usize,
    action_labels: &[String],
    action_letters: &[char],
    traces: &[MethodTraces],
    noise_seed: u64,
) -> Result<StateAnalysis> {
    if action_labels.len() != action_letters.len() {
        return Err(CoreError::LengthMismatch { left: action_labels.len(), right: action_letters.len() });
    }
    for t in traces {
        if t.per_action.len() != action_letters.len() {
            return Err(CoreError::LengthMismatch { left: t.per_action.len(), right: action_letters.len() });
        }
    }
    let baseline = traces.iter().find(|t| t.method == Method::Memory).filter(|_| traces.len() > 1);
    let (noisy, mse) = match baseline {
        Some(baseline) => {
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
            let noisy: Vec<Vec<f64>> = baseline.per_action.iter().map(|t| noisy_control(t, &mut rng)).collect();
            let mut others: Vec<(String, Vec<Vec<f64>>)> = traces
                .iter()
                .filter(|t| t.method != Method::Memory)
                .map(|t| (t.method.name().to_string(), t.per_action.clone()))
                .collect();
            others.push(("noisy".to_string(), noisy.clone()));
            let table = mse_table(action_labels, &baseline.per_action, &others)?;
            (Some(noisy), Some(table))
        }
        None => (None, None),
    };

    let mut series = Vec::new();
    for (k, &letter) in action_letters.iter().enumerate() {
        for t in traces {
            series.push((series_label(letter, t.method.letter()), t.per_action[k].clone()));
        }
        if let Some(noisy) = &noisy {
            series.push((series_label(letter, 'n'), noisy[k].clone()));
        }
    }
    let correlations = correlation_matrix(&series)?;
    Ok(StateAnalysis { state, noisy, mse, correlations })
}
