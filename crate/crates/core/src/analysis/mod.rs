//! Evaluation statistics: averaging, correlation, error tables, the noisy
//! control signal and smoothing.

mod savgol;
mod state;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub use savgol::{savgol, savgol_coefficients};
pub use state::{analyze_state, series_label, MethodTraces, StateAnalysis};

/// Standard deviation of the multiplicative noise in [`noisy_control`].
pub const NOISE_SD: f64 = 0.2;

/// Pointwise arithmetic mean of equal-length series.
pub fn mean_trace(traces: &[&[f64]]) -> Result<Vec<f64>> {
    let first = traces.first().ok_or(CoreError::EmptyInput)?;
    let len = first.len();
    let mut acc = vec![0.0; len];
    for t in traces {
        if t.len() != len {
            return Err(CoreError::LengthMismatch { left: t.len(), right: len });
        }
        for (a, v) in acc.iter_mut().zip(t.iter()) {
            *a += v;
        }
    }
    let n = traces.len() as f64;
    Ok(acc.into_iter().map(|v| v / n).collect())
}

/// A Pearson coefficient, or the marker for a zero-variance input.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    Defined(f64),
    NotDefined,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Defined(v) => Some(v),
            Correlation::NotDefined => None,
        }
    }
}

impl std::fmt::Display for Correlation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Correlation::Defined(v) => write!(f, "{v:.4}"),
            Correlation::NotDefined => write!(f, "NA"),
        }
    }
}

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(CoreError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < min {
        return Err(CoreError::TooShort { needed: min, got: x.len() });
    }
    Ok(())
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pair(x, y, 2)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation::NotDefined);
    }
    Ok(Correlation::Defined((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// Mean squared pointwise difference.
pub fn mse(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 1)?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64)
}

/// Mean over agents of the per-agent MSE.
pub fn mse_per_agent(baseline: &[&[f64]], other: &[&[f64]]) -> Result<f64> {
    if baseline.len() != other.len() {
        return Err(CoreError::LengthMismatch { left: baseline.len(), right: other.len() });
    }
    if baseline.is_empty() {
        return Err(CoreError::EmptyInput);
    }
    let total = baseline.iter().zip(other).map(|(b, o)| mse(b, o)).sum::<Result<f64>>()?;
    Ok(total / baseline.len() as f64)
}

/// Multiplies each point by an independent `Normal(1, 0.2)` factor and
/// clamps to `[0, 1]`.
pub fn noisy_control<R: Rng + ?Sized>(trace: &[f64], rng: &mut R) -> Vec<f64> {
    let noise = Normal::new(1.0, NOISE_SD).expect("valid normal");
    trace.iter().map(|v| (v * noise.sample(rng)).clamp(0.0, 1.0)).collect()
}

/// Symmetric matrix of pairwise Pearson coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Correlation>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Correlation {
        self.values[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub fn correlation_matrix(series: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix> {
    if series.len() < 2 {
        return Err(CoreError::TooShort { needed: 2, got: series.len() });
    }
    let n = series.len();
    let mut values = vec![vec![Correlation::NotDefined; n]; n];
    for i in 0..n {
        values[i][i] = match pearson(&series[i].1, &series[i].1)? {
            Correlation::Defined(_) => Correlation::Defined(1.0),
            Correlation::NotDefined => Correlation::NotDefined,
        };
        for j in i + 1..n {
            let r = pearson(&series[i].1, &series[j].1)?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { labels: series.iter().map(|(l, _)| l.clone()).collect(), values })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub label: String,
    pub values: Vec<f64>,
}

/// MSE of each method against the baseline, one column per action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseTable {
    pub actions: Vec<String>,
    pub rows: Vec<MseRow>,
}

impl MseTable {
    pub fn row(&self, label: &str) -> Option<&MseRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Fixed-width text rendering, one row per method.
    pub fn to_text(&self, title: &str) -> String {
        let mut out = format!("{title:<24}");
        for a in &self.actions {
            out.push_str(&format!("{a:>10}"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:<24}", row.label));
            for v in &row.values {
                out.push_str(&format!("{v:>10.4}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `baseline[k]` and each `others[i].1[k]` are the traces for action `k`.
pub fn mse_table(actions: &[String], baseline: &[Vec<f64>], others: &[(String, Vec<Vec<f64>>)]) -> Result<MseTable> {
    if baseline.len() != actions.len() {
        return Err(CoreError::LengthMismatch { left: baseline.len(), right: actions.len() });
    }
    let rows = others
        .iter()
        .map(|(label, traces)| {
            if traces.len() != actions.len() {
                return Err(CoreError::LengthMismatch { left: traces.len(), right: actions.len() });
            }
            let values = baseline.iter().zip(traces).map(|(b, t)| mse(b, t)).collect::<Result<Vec<_>>>()?;
            Ok(MseRow { label: label.clone(), values })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MseTable { actions: actions.to_vec(), rows })
}
