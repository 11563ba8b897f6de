use proptest::prelude::*;
use xplain_rl::mdp::EpisodeHook;
use xplain_rl::*;

fn small(seed: u64, sigma: f64) -> ExperimentConfig {
    ExperimentConfig { episodes: 40, agents: 4, seed, sigma, ..ExperimentConfig::navigation() }
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = small(9, 0.1);
    let one = run_experiment_with_threads(&cfg, Some(1)).unwrap();
    let many = run_experiment_with_threads(&cfg, Some(4)).unwrap();
    assert_eq!(one.runs, many.runs);
}

#[test]
fn agents_differ_but_repeat() {
    let cfg = small(9, 0.1);
    let a = train_agent(&cfg, 0).unwrap();
    let b = train_agent(&cfg, 1).unwrap();
    assert_ne!(a.episode_log, b.episode_log);
    assert_eq!(a, train_agent(&cfg, 0).unwrap());
}

#[test]
fn sorting_tracks_initial_state_only() {
    let cfg = ExperimentConfig { episodes: 20, agents: 2, ..ExperimentConfig::sorting() };
    let result = run_experiment(&cfg).unwrap();
    let run = &result.runs[0];
    assert_eq!(run.q_trace.len(), 4);
    assert!(run.prob_traces.iter().all(|t| t.state == 0 && t.values.len() == 20));
}

#[test]
fn invalid_configs_rejected() {
    for cfg in [
        ExperimentConfig { agents: 0, ..ExperimentConfig::navigation() },
        ExperimentConfig { alpha: 1.5, ..ExperimentConfig::navigation() },
        ExperimentConfig { sigma: 0.2, ..ExperimentConfig::sorting() },
    ] {
        assert!(run_experiment(&cfg).is_err());
    }
}

/// Recounts memory probabilities from scratch: a pair's estimate is the share
/// of its occurrences that sit in successful episodes.
fn recount(episodes: &[(Vec<(usize, usize)>, bool)], states: usize, actions: usize) -> Vec<f64> {
    let mut total = vec![0u64; states * actions];
    let mut wins = vec![0u64; states * actions];
    for (steps, success) in episodes {
        for &(s, a) in steps {
            total[s * actions + a] += 1;
            wins[s * actions + a] += u64::from(*success);
        }
    }
    total.iter().zip(&wins).map(|(&t, &w)| if t == 0 { 0.0 } else { w as f64 / t as f64 }).collect()
}

proptest! {
    #[test]
    fn memory_matches_recount(
        episodes in prop::collection::vec(
            (prop::collection::vec((0usize..4, 0usize..3), 1..12), any::<bool>()),
            1..30,
        )
    ) {
        let mut memory = EpisodicMemory::new(4, 3);
        for (steps, success) in &episodes {
            memory.on_episode_start();
            for &(s, a) in steps {
                memory.record(s, ActionId(a));
            }
            memory.on_episode_end(if *success { Outcome::Success } else { Outcome::Failure });
        }
        let expected = recount(&episodes, 4, 3);
        for (got, want) in memory.probabilities().iter().zip(&expected) {
            prop_assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn traces_are_probabilities(seed in 0u64..1000, sigma in 0.0f64..0.5) {
        let result = run_experiment(&small(seed, sigma)).unwrap();
        for run in &result.runs {
            for t in &run.prob_traces {
                prop_assert!(t.values.iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }
}
