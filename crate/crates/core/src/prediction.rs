//! Predicted target locations and the distance map derived from them.
//!
//! The built-in predictor is a co-occurrence heuristic over the multi-class
//! semantic map; a learned predictor can be reached over the wire protocol
//! (see [`crate::wire`]).

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellCoord, ClassId, GridLayer};

pub const DEFAULT_PRIOR_TOML: &str = include_str!("../data/cooccurrence.toml");

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedTargets {
    pub points: Vec<CellCoord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap {
    /// Cells; distance to the nearest predicted target.
    pub grid: GridLayer<f64>,
}

/// Per-target-class affinity tables keyed by class name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriorTable(pub BTreeMap<String, BTreeMap<String, f64>>);

impl PriorTable {
    pub fn parse(text: &str) -> Result<Self> {
        let table: PriorTable = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for (target, row) in &table.0 {
            for (class, &w) in row {
                if w.is_nan() || w < 0.0 {
                    return Err(Error::Config(format!("affinity {target}.{class} = {w} is negative")));
                }
            }
            if !row.values().any(|&w| w > 0.0) {
                return Err(Error::Config(format!("target {target} has no positive affinity")));
            }
        }
        Ok(table)
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_PRIOR_TOML).expect("bundled prior parses")
    }

    /// Resolves names against a scene's class list (`class_names[k]` is id `k+1`).
    pub fn resolve(&self, class_names: &[String]) -> CooccurrencePrior {
        let n = class_names.len() + 1;
        let mut weights = vec![vec![0.0; n]; n];
        for (t, tname) in class_names.iter().enumerate() {
            let row = &mut weights[t + 1];
            match self.0.get(tname) {
                Some(entries) => {
                    for (k, kname) in class_names.iter().enumerate() {
                        row[k + 1] = entries.get(kname).copied().unwrap_or(0.0);
                    }
                    if row.iter().all(|&w| w == 0.0) {
                        row[t + 1] = 1.0;
                    }
                }
                None => row[t + 1] = 1.0,
            }
        }
        CooccurrencePrior { weights }
    }
}

/// Square affinity matrix indexed by `ClassId` (row = target class).
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrencePrior {
    weights: Vec<Vec<f64>>,
}

impl CooccurrencePrior {
    pub fn from_matrix(weights: Vec<Vec<f64>>) -> Result<Self> {
        let n = weights.len();
        if weights.iter().any(|r| r.len() != n) {
            return Err(Error::Config("co-occurrence matrix is not square".into()));
        }
        if weights.iter().flatten().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::Config("co-occurrence weights must be non-negative".into()));
        }
        Ok(Self { weights })
    }

    /// Self-affinity only.
    pub fn identity(num_classes: u16) -> Self {
        let n = num_classes as usize + 1;
        let mut weights = vec![vec![0.0; n]; n];
        for (i, row) in weights.iter_mut().enumerate().skip(1) {
            row[i] = 1.0;
        }
        Self { weights }
    }

    pub fn weight(&self, target: ClassId, class: ClassId) -> f64 {
        self.weights.get(target.0 as usize).and_then(|r| r.get(class.0 as usize)).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub class: ClassId,
    pub cells: Vec<CellCoord>,
    pub mean_confidence: f64,
}

impl Cluster {
    pub fn centroid(&self) -> (f64, f64) {
        let n = self.cells.len() as f64;
        let sx: f64 = self.cells.iter().map(|c| f64::from(c.x)).sum();
        let sy: f64 = self.cells.iter().map(|c| f64::from(c.y)).sum();
        (sx / n, sy / n)
    }
}

/// 8-connected components of equal nonzero labels, in row-major order of
/// their first cell.
pub fn label_clusters(smap: &GridLayer<ClassId>, cmap: &GridLayer<f64>) -> Vec<Cluster> {
    let (w, h) = smap.dims();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        let class = smap.cells()[start];
        if class.is_empty() || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut cells = Vec::new();
        let mut conf = 0.0;
        while let Some(i) = queue.pop_front() {
            let c = smap.coord(i);
            cells.push(c);
            conf += cmap.cells()[i];
            for n in c.neighbors8() {
                if let Some(j) = smap.index(n) {
                    if !seen[j] && smap.cells()[j] == class {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        let mean_confidence = conf / cells.len() as f64;
        out.push(Cluster { class, cells, mean_confidence });
    }
    out
}

/// Clusters scoring below this fraction of the best one are not returned.
pub const RELATIVE_CUTOFF: f64 = 0.5;

/// Affinity-weighted cluster centroids, best first. Falls back to the map
/// center when no cluster has positive affinity with the target.
pub fn predict_targets(
    smap: &GridLayer<ClassId>,
    cmap: &GridLayer<f64>,
    target_class: ClassId,
    prior: &CooccurrencePrior,
    max_targets: usize,
) -> Result<PredictedTargets> {
    smap.same_dims(cmap)?;
    let mut scored: Vec<(f64, CellCoord)> = label_clusters(smap, cmap)
        .into_iter()
        .filter_map(|cl| {
            let score = prior.weight(target_class, cl.class) * cl.mean_confidence;
            let (cx, cy) = cl.centroid();
            let c = CellCoord::new(
                (cx.round() as i32).clamp(0, smap.width() as i32 - 1),
                (cy.round() as i32).clamp(0, smap.height() as i32 - 1),
            );
            (score > 0.0).then_some((score, c))
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| (a.1.y, a.1.x).cmp(&(b.1.y, b.1.x))));
    let best = scored.first().map_or(0.0, |s| s.0);
    let mut points: Vec<CellCoord> = Vec::new();
    for (score, c) in scored {
        if points.len() == max_targets.max(1) || score < RELATIVE_CUTOFF * best {
            break;
        }
        if !points.contains(&c) {
            points.push(c);
        }
    }
    if points.is_empty() {
        points.push(smap.center());
    }
    Ok(PredictedTargets { points })
}

/// `D(x, y) = min_i ‖(x, y) − p_i‖` in cells.
pub fn distance_map(points: &PredictedTargets, dims: (usize, usize), resolution: f64) -> Result<DistanceMap> {
    if points.points.is_empty() {
        return Err(Error::NoTargets);
    }
    let mut grid = GridLayer::new(dims.0, dims.1, resolution, 0.0);
    for (i, v) in grid.cells_mut().iter_mut().enumerate() {
        let c = CellCoord::new((i % dims.0) as i32, (i / dims.0) as i32);
        *v = points.points.iter().map(|p| c.dist(*p)).fold(f64::INFINITY, f64::min);
    }
    Ok(DistanceMap { grid })
}

/// Result of one prediction, with a note when a fallback path was taken.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictOutcome {
    pub targets: PredictedTargets,
    pub fallback: Option<String>,
}

pub trait TargetPredictor {
    fn predict(
        &mut self,
        smap: &GridLayer<ClassId>,
        cmap: &GridLayer<f64>,
        target_class: ClassId,
    ) -> Result<PredictOutcome>;
}

#[derive(Debug, Clone)]
pub struct HeuristicPredictor {
    pub prior: CooccurrencePrior,
    pub max_targets: usize,
}

impl TargetPredictor for HeuristicPredictor {
    fn predict(
        &mut self,
        smap: &GridLayer<ClassId>,
        cmap: &GridLayer<f64>,
        target_class: ClassId,
    ) -> Result<PredictOutcome> {
        let targets = predict_targets(smap, cmap, target_class, &self.prior, self.max_targets)?;
        Ok(PredictOutcome { targets, fallback: None })
    }
}
