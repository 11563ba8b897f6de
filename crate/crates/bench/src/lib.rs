//! Shared inputs for the criterion benchmarks.

use xplain_rl::{ExperimentConfig, TrackScope};

/// Navigation config sized for benchmarking a single agent.
pub fn nav_config(episodes: usize, sigma: f64) -> ExperimentConfig {
    ExperimentConfig { episodes, agents: 1, sigma, ..ExperimentConfig::navigation() }
}

/// Sorting config tracing only the initial state.
pub fn sort_config(episodes: usize) -> ExperimentConfig {
    ExperimentConfig { episodes, agents: 1, track: TrackScope::Initial, ..ExperimentConfig::sorting() }
}

/// A smooth, slightly noisy probability-like series.
pub fn synthetic_trace(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let t = i as f64 / len as f64;
            (1.0 - (-4.0 * t).exp()) * 0.9 + 0.02 * ((i * 7919) % 13) as f64 / 13.0
        })
        .collect()
}
