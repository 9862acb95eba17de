//! The coupled occupancy / exploration / semantic / confidence layers and
//! their per-observation update rules.
//!
//! Semantic layers come in two flavors: a binary single-target map with its
//! confidence companion, and a multi-class label map with its own confidence
//! layer. Both confidence layers use the same "take the higher value, else
//! average" rule; the multi-class label only changes on a strictly higher
//! confidence.

use crate::error::{check_unit, Error, Result};
use crate::grid::{BitLayer, CellCoord, ClassId, GridLayer};
use crate::world::{Detection, Observation};

/// New single-target confidence after observing the target with confidence `c`.
pub fn update_target_confidence(cmap: f64, c: f64) -> Result<f64> {
    check_unit("confidence", c)?;
    check_unit("stored confidence", cmap)?;
    Ok(if c >= cmap { c } else { (cmap + c) / 2.0 })
}

/// New `(label, confidence)` of a multi-class cell after a detection of class
/// `l_obj` with confidence `c`.
///
/// A label is replaced only when `c > cmap`. Equal or lower confidence is
/// averaged in when the labels agree and ignored when they disagree.
pub fn update_multi_maps(smap: ClassId, cmap: f64, l_obj: ClassId, c: f64, num_classes: u16) -> Result<(ClassId, f64)> {
    check_unit("confidence", c)?;
    check_unit("stored confidence", cmap)?;
    if l_obj.is_empty() || l_obj.0 > num_classes {
        return Err(Error::UnknownClass(l_obj.0));
    }
    Ok(if c > cmap {
        (l_obj, c)
    } else if smap == l_obj {
        (smap, (cmap + c) / 2.0)
    } else {
        (smap, cmap)
    })
}

/// Which semantic layer families receive detections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SemanticLayers {
    pub target: bool,
    pub multi: bool,
}

impl SemanticLayers {
    pub const ALL: SemanticLayers = SemanticLayers { target: true, multi: true };
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMap {
    pub obstacle: BitLayer,
    pub explored: BitLayer,
    pub frontier: BitLayer,
    pub smap_target: BitLayer,
    pub smap_multi: GridLayer<ClassId>,
    pub cmap_target: GridLayer<f64>,
    pub cmap_multi: GridLayer<f64>,
    num_classes: u16,
}

impl LayeredMap {
    pub fn new(width: usize, height: usize, resolution: f64, num_classes: u16) -> Self {
        let bits = GridLayer::new(width, height, resolution, false);
        let conf = GridLayer::new(width, height, resolution, 0.0);
        Self {
            obstacle: bits.clone(),
            explored: bits.clone(),
            frontier: bits.clone(),
            smap_target: bits,
            smap_multi: GridLayer::new(width, height, resolution, ClassId::EMPTY),
            cmap_target: conf.clone(),
            cmap_multi: conf,
            num_classes,
        }
    }

    pub fn width(&self) -> usize {
        self.obstacle.width()
    }

    pub fn height(&self) -> usize {
        self.obstacle.height()
    }

    pub fn resolution(&self) -> f64 {
        self.obstacle.resolution()
    }

    pub fn num_classes(&self) -> u16 {
        self.num_classes
    }

    /// Sets `O = 1` on every listed cell. Obstacles are never cleared.
    ///
    /// All coordinates are validated before any cell is written.
    pub fn mark_obstacles(&mut self, occupied: &[CellCoord]) -> Result<()> {
        for &c in occupied {
            self.obstacle.check(c)?;
        }
        for &c in occupied {
            self.obstacle.set(c, true);
        }
        Ok(())
    }

    /// Sets `E = 1` on every listed cell; explored cells never revert.
    pub fn mark_explored(&mut self, visible: &[CellCoord]) -> Result<()> {
        for &c in visible {
            self.explored.check(c)?;
        }
        for &c in visible {
            self.explored.set(c, true);
        }
        Ok(())
    }

    /// Routes each detector pass to its layer family: the multi-class pass to
    /// the multi-object layers, the target-prompted pass to the single-target
    /// layers.
    pub fn apply_observation(
        &mut self,
        obs: &Observation,
        target_class: ClassId,
        layers: SemanticLayers,
    ) -> Result<()> {
        self.apply_detections_with(
            &obs.detections,
            target_class,
            SemanticLayers { target: false, multi: layers.multi },
        )?;
        self.apply_detections_with(
            &obs.target_detections,
            target_class,
            SemanticLayers { target: layers.target, multi: false },
        )
    }

    /// Applies detections in list order to both semantic layer families.
    pub fn apply_detections(&mut self, detections: &[Detection], target_class: ClassId) -> Result<()> {
        self.apply_detections_with(detections, target_class, SemanticLayers::ALL)
    }

    pub fn apply_detections_with(
        &mut self,
        detections: &[Detection],
        target_class: ClassId,
        layers: SemanticLayers,
    ) -> Result<()> {
        for det in detections {
            check_unit("confidence", det.confidence)?;
            self.smap_multi.check(det.cell)?;
            if det.class.is_empty() || det.class.0 > self.num_classes {
                return Err(Error::UnknownClass(det.class.0));
            }
        }
        for det in detections {
            if layers.multi {
                let (label, conf) = update_multi_maps(
                    *self.smap_multi.at(det.cell),
                    *self.cmap_multi.at(det.cell),
                    det.class,
                    det.confidence,
                    self.num_classes,
                )?;
                self.smap_multi.set(det.cell, label);
                self.cmap_multi.set(det.cell, conf);
            }
            if layers.target && det.class == target_class {
                let conf = update_target_confidence(*self.cmap_target.at(det.cell), det.confidence)?;
                self.cmap_target.set(det.cell, conf);
                // A zero-confidence hit carries no evidence and must not create
                // a labeled cell with zero confidence.
                if conf > 0.0 {
                    self.smap_target.set(det.cell, true);
                }
            }
        }
        Ok(())
    }

    pub fn refresh_frontiers(&mut self) {
        self.frontier = extract_frontiers(&self.obstacle, &self.explored);
    }
}

/// Explored, obstacle-free cells with at least one unexplored 8-neighbor.
/// Neighbors outside the grid count as unexplored.
pub fn extract_frontiers(obstacle: &BitLayer, explored: &BitLayer) -> BitLayer {
    assert_eq!(obstacle.dims(), explored.dims(), "layer dimensions differ");
    let (w, h) = explored.dims();
    let mut out = GridLayer::new(w, h, explored.resolution(), false);
    let e = explored.cells();
    let o = obstacle.cells();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !e[i] || o[i] {
                continue;
            }
            let edge = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
            let open = edge
                || !e[i - w - 1]
                || !e[i - w]
                || !e[i - w + 1]
                || !e[i - 1]
                || !e[i + 1]
                || !e[i + w - 1]
                || !e[i + w]
                || !e[i + w + 1];
            if open {
                out.cells_mut()[i] = true;
            }
        }
    }
    out
}
