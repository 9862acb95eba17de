//! Batch evaluation: every scene × every seed under one configuration.
//!
//! Episodes are independent, so with the `parallel` feature they run on the
//! rayon pool; without it they run in order. Results are collected in
//! `(scene, seed)` order either way, so summaries are identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::episode::{run_episode, EpisodeConfig, EpisodeResult};
use crate::error::Result;
use crate::metrics::{spl, success_rate, Outcome};
use crate::world::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[default]
    Auto,
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub label: String,
    pub episodes: usize,
    pub success_rate: f64,
    pub spl: f64,
    pub mean_sci: f64,
    pub mean_w_pred: f64,
    pub results: Vec<EpisodeResult>,
}

impl SuiteSummary {
    pub fn from_results(label: impl Into<String>, results: Vec<EpisodeResult>) -> Result<Self> {
        let outcomes: Vec<Outcome> = results.iter().map(EpisodeResult::outcome).collect();
        let n = results.len().max(1) as f64;
        Ok(Self {
            label: label.into(),
            episodes: results.len(),
            success_rate: success_rate(&outcomes),
            spl: spl(&outcomes)?,
            mean_sci: results.iter().map(|r| r.mean_sci).sum::<f64>() / n,
            mean_w_pred: results.iter().map(|r| r.mean_w_pred).sum::<f64>() / n,
            results,
        })
    }

    /// Summary restricted to scenes whose name satisfies `keep`.
    pub fn subset(&self, label: impl Into<String>, keep: impl Fn(&str) -> bool) -> Result<Self> {
        let results = self.results.iter().filter(|r| keep(&r.scene)).cloned().collect();
        Self::from_results(label, results)
    }
}

impl std::fmt::Display for SuiteSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<14} episodes={:<4} SR={:6.2} SPL={:6.2} mean_sci={:.3} mean_w_pred={:.3}",
            self.label, self.episodes, self.success_rate, self.spl, self.mean_sci, self.mean_w_pred
        )
    }
}

fn run_one(scene: &Scene, config: &EpisodeConfig, seed: u64) -> Result<EpisodeResult> {
    let config = config.clone().with_seed(seed);
    Ok(run_episode(scene, &config)?.result)
}

/// Runs `scenes × seeds`; `config.seed` is ignored in favor of each seed.
pub fn run_suite(scenes: &[Scene], config: &EpisodeConfig, seeds: &[u64], exec: Execution) -> Result<SuiteSummary> {
    config.validate()?;
    let jobs: Vec<(&Scene, u64)> = scenes.iter().flat_map(|s| seeds.iter().map(move |&k| (s, k))).collect();
    let results: Result<Vec<EpisodeResult>> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Auto => jobs.par_iter().map(|&(s, k)| run_one(s, config, k)).collect(),
        _ => jobs.iter().map(|&(s, k)| run_one(s, config, k)).collect(),
    };
    SuiteSummary::from_results(config.label(), results?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;
    use crate::scenegen::{generate_suite, LayoutSpec};

    #[test]
    fn parallel_and_sequential_agree() {
        let scenes = generate_suite(&LayoutSpec::default(), 2, 5).unwrap();
        let mut params = Params::default();
        params.episode.max_steps = 60;
        let config = EpisodeConfig::new(params).unwrap();
        let a = run_suite(&scenes, &config, &[1, 2], Execution::Auto).unwrap();
        let b = run_suite(&scenes, &config, &[1, 2], Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.episodes, 4);
        assert_eq!(a.results[1].seed, 2);
    }
}
