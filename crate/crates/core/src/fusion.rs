//! Frontier ranking and target locking: semantic cue intensity, adaptive
//! weights, the dual-model aggregation score and goal selection.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::grid::{BitLayer, CellCoord, ClassId, GridLayer};
use crate::layered_map::LayeredMap;

pub const DAR_EPSILON: f64 = 1e-6;
pub const SCI_CONFIDENCE: f64 = 0.6;
pub const SCI_DENSE: f64 = 0.6;
pub const SCI_SPARSE: f64 = 0.3;
pub const LOCK_THRESHOLD: f64 = 0.7;
pub const LOCK_NEIGHBORHOOD: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SciCategory {
    Dense,
    Moderate,
    Sparse,
}

impl SciCategory {
    pub fn classify(value: f64, dense: f64, sparse: f64) -> Self {
        if value > dense {
            SciCategory::Dense
        } else if value < sparse {
            SciCategory::Sparse
        } else {
            SciCategory::Moderate
        }
    }
}

impl std::fmt::Display for SciCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SciCategory::Dense => "dense",
            SciCategory::Moderate => "moderate",
            SciCategory::Sparse => "sparse",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SciReading {
    pub value: f64,
    pub category: SciCategory,
}

impl SciReading {
    pub fn new(value: f64) -> Result<Self> {
        check_unit("sci", value)?;
        Ok(Self { value, category: SciCategory::classify(value, SCI_DENSE, SCI_SPARSE) })
    }

    pub fn zero() -> Self {
        Self { value: 0.0, category: SciCategory::Sparse }
    }
}

/// Fraction of `fov_cells` carrying a label with confidence above `conf_threshold`.
pub fn compute_sci_with(
    smap: &GridLayer<ClassId>,
    cmap: &GridLayer<f64>,
    fov_cells: &[CellCoord],
    conf_threshold: f64,
) -> Result<SciReading> {
    smap.same_dims(cmap)?;
    if fov_cells.is_empty() {
        return Err(Error::EmptyFov);
    }
    let mut hits = 0usize;
    for &c in fov_cells {
        let i = smap.check(c)?;
        if !smap.cells()[i].is_empty() && cmap.cells()[i] > conf_threshold {
            hits += 1;
        }
    }
    SciReading::new(hits as f64 / fov_cells.len() as f64)
}

pub fn compute_sci(smap: &GridLayer<ClassId>, cmap: &GridLayer<f64>, fov_cells: &[CellCoord]) -> Result<SciReading> {
    compute_sci_with(smap, cmap, fov_cells, SCI_CONFIDENCE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarWeights {
    pub w_pred: f64,
    pub w_vlm: f64,
}

impl DarWeights {
    pub const PRED_ONLY: DarWeights = DarWeights { w_pred: 1.0, w_vlm: 0.0 };
    pub const VLM_ONLY: DarWeights = DarWeights { w_pred: 0.0, w_vlm: 1.0 };
}

pub fn weights_from_sci(sci: SciReading) -> DarWeights {
    DarWeights { w_pred: 1.0 - sci.value, w_vlm: sci.value }
}

/// `w_pred / (d + ε) + w_vlm · v` with `d` already normalized to `[0, 1]`.
pub fn dar_score(d_norm: f64, v: f64, w: DarWeights, eps: f64) -> f64 {
    w.w_pred / (d_norm + eps) + w.w_vlm * v
}

/// Inputs to frontier ranking. A `None` layer contributes nothing to the score
/// and is never read.
#[derive(Debug, Clone, Copy)]
pub struct FrontierScoring<'a> {
    /// Distance to the nearest predicted target, in cells.
    pub distance: Option<&'a GridLayer<f64>>,
    /// Smoothed, normalized value map.
    pub value: Option<&'a GridLayer<f64>>,
    pub weights: DarWeights,
    pub eps: f64,
}

impl FrontierScoring<'_> {
    pub fn score_at(&self, i: usize, diagonal: f64) -> f64 {
        let mut s = 0.0;
        if let Some(d) = self.distance {
            s += self.weights.w_pred / (d.cells()[i] / diagonal + self.eps);
        }
        if let Some(v) = self.value {
            s += self.weights.w_vlm * v.cells()[i];
        }
        s
    }
}

/// Highest-scoring frontier cell not in `exclude`. Ties go to the cell nearest
/// `agent`, then to the first cell in row-major order.
pub fn select_frontier(
    frontier: &BitLayer,
    scoring: &FrontierScoring<'_>,
    agent: CellCoord,
    exclude: Option<&BitLayer>,
) -> Result<Option<(CellCoord, f64)>> {
    for layer in [scoring.distance, scoring.value].into_iter().flatten() {
        frontier.same_dims(layer)?;
    }
    if let Some(ex) = exclude {
        frontier.same_dims(ex)?;
    }
    let diagonal = frontier.diagonal();
    let mut best: Option<(CellCoord, f64, i64)> = None;
    for (i, &f) in frontier.cells().iter().enumerate() {
        if !f || exclude.is_some_and(|ex| ex.cells()[i]) {
            continue;
        }
        let c = frontier.coord(i);
        let s = scoring.score_at(i, diagonal);
        let (dx, dy) = (i64::from(c.x - agent.x), i64::from(c.y - agent.y));
        let d2 = dx * dx + dy * dy;
        let better = match best {
            None => true,
            Some((_, bs, bd)) => s > bs || (s == bs && d2 < bd),
        };
        if better {
            best = Some((c, s, d2));
        }
    }
    Ok(best.map(|(c, s, _)| (c, s)))
}

/// Which semantic layers may trigger and shape a target lock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LockMode {
    /// Threshold on the target map, region where both maps agree.
    Fused,
    /// Target map only.
    TargetOnly,
    /// Target class of the multi-object map only.
    MultiOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetLock {
    /// Navigable cell to drive to.
    pub goal: CellCoord,
    /// Highest-valued cell of the lock region.
    pub anchor: CellCoord,
    pub value: f64,
    /// True when the fused region was empty and the target map alone was used
    /// (only with `LockParams::fallback_to_target`).
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockParams {
    pub mode: LockMode,
    pub threshold: f64,
    pub neighborhood: usize,
    /// In fused mode, lock on the target map alone when the two semantic
    /// maps share no target cell. Off by default: such a lock is usually a
    /// misdetection that the multi-object map has already overruled.
    pub fallback_to_target: bool,
}

impl Default for LockParams {
    fn default() -> Self {
        Self {
            mode: LockMode::Fused,
            threshold: LOCK_THRESHOLD,
            neighborhood: LOCK_NEIGHBORHOOD,
            fallback_to_target: false,
        }
    }
}

fn argmax(values: &[f64], region: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if region(i) && best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Locks onto a detected target once confidence passes the threshold and
/// returns a navigable cell near it.
pub fn try_lock_target(maps: &LayeredMap, target: ClassId, params: &LockParams) -> Option<TargetLock> {
    let n = maps.cmap_target.len();
    let st = maps.smap_target.cells();
    let ct = maps.cmap_target.cells();
    let sm = maps.smap_multi.cells();
    let cm = maps.cmap_multi.cells();

    let (values, region, fallback): (Vec<f64>, Vec<bool>, bool) = match params.mode {
        LockMode::Fused | LockMode::TargetOnly => {
            if !ct.iter().any(|&c| c > params.threshold) {
                return None;
            }
            // Candidates are over-threshold target detections the multi-object map agrees with.
            let fused: Vec<bool> = (0..n).map(|i| st[i] && sm[i] == target && ct[i] > params.threshold).collect();
            if params.mode == LockMode::Fused && fused.iter().any(|&b| b) {
                let vals = (0..n).map(|i| if fused[i] { (ct[i] + cm[i]) / 2.0 } else { 0.0 }).collect();
                (vals, fused, false)
            } else if params.mode == LockMode::TargetOnly || params.fallback_to_target {
                (ct.to_vec(), st.to_vec(), params.mode == LockMode::Fused)
            } else {
                return None;
            }
        }
        LockMode::MultiOnly => {
            let region: Vec<bool> = sm.iter().map(|&k| k == target).collect();
            if !(0..n).any(|i| region[i] && cm[i] > params.threshold) {
                return None;
            }
            (cm.to_vec(), region, false)
        }
    };

    let a = argmax(&values, |i| region[i])?;
    let anchor = maps.cmap_target.coord(a);
    let half = (params.neighborhood / 2) as i32;
    let (mut sx, mut sy, mut k) = (0.0, 0.0, 0usize);
    for dy in -half..=half {
        for dx in -half..=half {
            let c = CellCoord::new(anchor.x + dx, anchor.y + dy);
            if let Some(i) = maps.cmap_target.index(c) {
                if region[i] {
                    sx += f64::from(c.x);
                    sy += f64::from(c.y);
                    k += 1;
                }
            }
        }
    }
    let centroid = (sx / k as f64, sy / k as f64);
    let goal = nearest_navigable(&maps.explored, &maps.obstacle, centroid)?;
    Some(TargetLock { goal, anchor, value: values[a], fallback })
}

/// Explored, obstacle-free cell nearest to `point`; ties go to row-major order.
pub fn nearest_navigable(explored: &BitLayer, obstacle: &BitLayer, point: (f64, f64)) -> Option<CellCoord> {
    let mut best: Option<(CellCoord, f64)> = None;
    for (i, (&e, &o)) in explored.cells().iter().zip(obstacle.cells()).enumerate() {
        if !e || o {
            continue;
        }
        let c = explored.coord(i);
        let d = (f64::from(c.x) - point.0).hypot(f64::from(c.y) - point.1);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((c, d));
        }
    }
    best.map(|(c, _)| c)
}

/// How frontier weights are derived for one decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    /// From the semantic cue intensity of the current view.
    Adaptive,
    /// Fixed weights; the cue intensity is neither computed nor used.
    Fixed(DarWeights),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    pub eps: f64,
    pub sci_confidence: f64,
    pub sci_dense: f64,
    pub sci_sparse: f64,
    pub weights: WeightRule,
    pub lock: LockParams,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            eps: DAR_EPSILON,
            sci_confidence: SCI_CONFIDENCE,
            sci_dense: SCI_DENSE,
            sci_sparse: SCI_SPARSE,
            weights: WeightRule::Adaptive,
            lock: LockParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GoalKind {
    Explore(CellCoord),
    Navigate(CellCoord),
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalDecision {
    pub kind: GoalKind,
    pub dar_score: Option<f64>,
    pub sci: Option<SciReading>,
    pub weights: Option<DarWeights>,
    pub lock: Option<TargetLock>,
}

/// Per-step view of the world handed to [`decide`].
#[derive(Debug, Clone, Copy)]
pub struct DecisionInputs<'a> {
    pub maps: &'a LayeredMap,
    pub fov_cells: &'a [CellCoord],
    pub distance: Option<&'a GridLayer<f64>>,
    pub value: Option<&'a GridLayer<f64>>,
    pub agent: CellCoord,
    pub target: ClassId,
    pub exclude: Option<&'a BitLayer>,
}

/// Weights for the current view under `rule`.
pub fn current_weights(inputs: &DecisionInputs<'_>, params: &FusionParams) -> Result<(Option<SciReading>, DarWeights)> {
    Ok(match params.weights {
        WeightRule::Fixed(w) => (None, w),
        WeightRule::Adaptive => {
            let v = compute_sci_with(
                &inputs.maps.smap_multi,
                &inputs.maps.cmap_multi,
                inputs.fov_cells,
                params.sci_confidence,
            )?
            .value;
            let sci = SciReading { value: v, category: SciCategory::classify(v, params.sci_dense, params.sci_sparse) };
            (Some(sci), weights_from_sci(sci))
        }
    })
}

/// Lock if possible, otherwise rank frontiers; `Stop` when none remain.
pub fn decide(inputs: &DecisionInputs<'_>, params: &FusionParams) -> Result<GoalDecision> {
    if let Some(lock) = try_lock_target(inputs.maps, inputs.target, &params.lock) {
        return Ok(GoalDecision {
            kind: GoalKind::Navigate(lock.goal),
            dar_score: None,
            sci: None,
            weights: None,
            lock: Some(lock),
        });
    }
    let (sci, weights) = current_weights(inputs, params)?;
    let scoring = FrontierScoring { distance: inputs.distance, value: inputs.value, weights, eps: params.eps };
    let chosen = select_frontier(&inputs.maps.frontier, &scoring, inputs.agent, inputs.exclude)?;
    Ok(match chosen {
        Some((c, s)) => {
            GoalDecision { kind: GoalKind::Explore(c), dar_score: Some(s), sci, weights: Some(weights), lock: None }
        }
        None => GoalDecision { kind: GoalKind::Stop, dar_score: None, sci, weights: Some(weights), lock: None },
    })
}
