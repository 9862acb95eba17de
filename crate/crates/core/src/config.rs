//! Tunable constants, loadable from a TOML file. Every key is optional; an
//! absent key keeps its default. See `docs/FORMATS.md` for the full listing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{DAR_EPSILON, LOCK_NEIGHBORHOOD, LOCK_THRESHOLD, SCI_CONFIDENCE, SCI_DENSE, SCI_SPARSE};
use crate::prediction::PriorTable;
use crate::value_map::ScoreWeighting;
use crate::world::{OracleScorer, SensorConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeParams {
    pub max_steps: usize,
    pub success_radius_m: f64,
    pub lookahead_m: f64,
    pub align_tolerance_deg: f64,
    /// Chebyshev distance (cells) at which a locked goal counts as reached.
    pub arrival_tolerance_cells: i32,
    /// Frontiers are re-scored every step; the current exploration goal is
    /// kept while its score is at least `(1 − goal_hysteresis)` times the
    /// best. 0 always switches to the best, 1 keeps a goal until it is
    /// reached or stops being a frontier.
    pub goal_hysteresis: f64,
}

impl Default for EpisodeParams {
    fn default() -> Self {
        Self {
            max_steps: 500,
            success_radius_m: 1.0,
            lookahead_m: 1.0,
            align_tolerance_deg: 15.0,
            arrival_tolerance_cells: 1,
            goal_hysteresis: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValueMapParams {
    pub d_max_m: f64,
    pub sigma: f64,
    pub weighting: ScoreWeighting,
}

impl Default for ValueMapParams {
    fn default() -> Self {
        Self { d_max_m: 5.0, sigma: 0.85, weighting: ScoreWeighting::Cosine }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub epsilon: f64,
    pub sci_confidence: f64,
    pub sci_dense: f64,
    pub sci_sparse: f64,
    pub lock_threshold: f64,
    pub lock_neighborhood: usize,
    /// Lock on the target map alone when the fused region is empty.
    pub lock_fallback: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            epsilon: DAR_EPSILON,
            sci_confidence: SCI_CONFIDENCE,
            sci_dense: SCI_DENSE,
            sci_sparse: SCI_SPARSE,
            lock_threshold: LOCK_THRESHOLD,
            lock_neighborhood: LOCK_NEIGHBORHOOD,
            lock_fallback: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictionParams {
    pub max_targets: usize,
    /// Co-occurrence table; the built-in table when absent.
    pub prior: Option<PathBuf>,
}

impl Default for PredictionParams {
    fn default() -> Self {
        Self { max_targets: 3, prior: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteParams {
    /// `tcp://host:port` or `exec:<program> [args]` for the target predictor.
    pub predictor: Option<String>,
    /// Same, for the semantic scorer.
    pub scorer: Option<String>,
    pub timeout_ms: u64,
}

impl Default for RemoteParams {
    fn default() -> Self {
        Self { predictor: None, scorer: None, timeout_ms: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub episode: EpisodeParams,
    pub sensor: SensorConfig,
    pub oracle: OracleScorer,
    pub value_map: ValueMapParams,
    pub fusion: FusionConfig,
    pub prediction: PredictionParams,
    pub remote: RemoteParams,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v <= 0.0 {
        return Err(Error::Config(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
    }
    Ok(())
}

impl Params {
    pub fn parse(text: &str) -> Result<Self> {
        let p: Params = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut p = Self::parse(&std::fs::read_to_string(path)?)?;
        // A relative prior path is resolved against the config file.
        if let (Some(prior), Some(dir)) = (&p.prediction.prior, path.parent()) {
            if prior.is_relative() {
                p.prediction.prior = Some(dir.join(prior));
            }
        }
        Ok(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("params serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.episode;
        if e.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        positive("success_radius_m", e.success_radius_m)?;
        positive("lookahead_m", e.lookahead_m)?;
        if !(0.0..180.0).contains(&e.align_tolerance_deg) {
            return Err(Error::Config("align_tolerance_deg must lie in [0, 180)".into()));
        }
        if e.arrival_tolerance_cells < 0 {
            return Err(Error::Config("arrival_tolerance_cells must be non-negative".into()));
        }
        unit("episode.goal_hysteresis", e.goal_hysteresis)?;
        self.sensor.validate()?;
        positive("oracle.lambda_m", self.oracle.lambda_m)?;
        unit("oracle.s_max", self.oracle.s_max)?;
        for (name, v) in [("oracle.noise_sd", self.oracle.noise_sd), ("oracle.cue_noise_sd", self.oracle.cue_noise_sd)]
        {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be non-negative")));
            }
        }
        positive("oracle.cue_saturation", self.oracle.cue_saturation)?;
        positive("value_map.d_max_m", self.value_map.d_max_m)?;
        positive("value_map.sigma", self.value_map.sigma)?;
        let f = &self.fusion;
        positive("fusion.epsilon", f.epsilon)?;
        unit("fusion.sci_confidence", f.sci_confidence)?;
        unit("fusion.sci_dense", f.sci_dense)?;
        unit("fusion.sci_sparse", f.sci_sparse)?;
        unit("fusion.lock_threshold", f.lock_threshold)?;
        if f.sci_sparse > f.sci_dense {
            return Err(Error::Config("fusion.sci_sparse exceeds fusion.sci_dense".into()));
        }
        if f.lock_neighborhood == 0 || f.lock_neighborhood.is_multiple_of(2) {
            return Err(Error::Config("fusion.lock_neighborhood must be odd".into()));
        }
        if self.prediction.max_targets == 0 {
            return Err(Error::Config("prediction.max_targets must be positive".into()));
        }
        if self.remote.timeout_ms == 0 {
            return Err(Error::Config("remote.timeout_ms must be positive".into()));
        }
        Ok(())
    }

    pub fn prior_table(&self) -> Result<PriorTable> {
        match &self.prediction.prior {
            Some(path) => PriorTable::parse(&std::fs::read_to_string(path)?),
            None => Ok(PriorTable::builtin()),
        }
    }
}
