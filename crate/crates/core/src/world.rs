//! Deterministic grid world: scenes, agent kinematics, ray-cast visibility and
//! the synthetic detector / semantic-score oracles that stand in for a camera
//! pipeline.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BitLayer, CellCoord, ClassId, GridLayer};
use crate::planner::geodesic_field;
use crate::rays::{Fan, RayStep};

pub const FORWARD_STEP_M: f64 = 0.25;
pub const TURN_STEP_RAD: f64 = PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    /// Meters; cell `(i, j)` is centered at `(i·res, j·res)`.
    pub x: f64,
    pub y: f64,
    /// Radians in `[0, 2π)`; 0 faces +x, π/2 faces −y (up).
    pub heading: f64,
}

impl AgentPose {
    pub fn at_cell(cell: CellCoord, resolution: f64, heading: f64) -> Self {
        Self { x: f64::from(cell.x) * resolution, y: f64::from(cell.y) * resolution, heading: normalize_angle(heading) }
    }

    pub fn cell(&self, resolution: f64) -> CellCoord {
        CellCoord::new((self.x / resolution).round() as i32, (self.y / resolution).round() as i32)
    }

    /// Euclidean distance in meters to the center of `cell`.
    pub fn dist_to_cell(&self, cell: CellCoord, resolution: f64) -> f64 {
        (f64::from(cell.x) * resolution - self.x).hypot(f64::from(cell.y) * resolution - self.y)
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    MoveForward,
    TurnLeft,
    TurnRight,
    Stop,
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Action::MoveForward => "MOVE_FORWARD",
            Action::TurnLeft => "TURN_LEFT",
            Action::TurnRight => "TURN_RIGHT",
            Action::Stop => "STOP",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: ClassId,
    pub cell: CellCoord,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Row-major sorted, deduplicated.
    pub visible_cells: Vec<CellCoord>,
    /// Visible cells that are walls or objects (depth returns).
    pub occupied: Vec<CellCoord>,
    /// Multi-class detector pass; feeds the multi-object layers.
    pub detections: Vec<Detection>,
    /// Target-prompted detector pass; feeds the single-target layers. Its
    /// errors are drawn independently of the multi-class pass.
    pub target_detections: Vec<Detection>,
    pub fov_deg: f64,
    pub max_range: f64,
}

/// Ray-casting sensor and synthetic detector parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub fov_deg: f64,
    pub max_range_m: f64,
    pub ray_step_deg: f64,
    pub radial_step_cells: f64,
    /// Mean detection confidence for classes without an override.
    pub detection_accuracy: f64,
    /// Per-class mean confidence overrides, keyed by class name.
    pub class_accuracy: std::collections::BTreeMap<String, f64>,
    pub confidence_sd: f64,
    pub false_negative_rate: f64,
    pub false_positive_rate: f64,
    pub false_positive_confidence: f64,
    /// Label confusion. The multi-class pass gives a visible object a wrong
    /// class with this probability; the target-prompted pass reports a visible
    /// non-target object as the target with it. Confused labels and free-cell
    /// false positives (at `false_positive_rate`) both draw their confidence
    /// around `false_positive_confidence`.
    pub confusion_rate: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov_deg: 79.0,
            max_range_m: 5.0,
            ray_step_deg: 1.0,
            radial_step_cells: 0.5,
            detection_accuracy: 0.85,
            class_accuracy: Default::default(),
            confidence_sd: 0.1,
            false_negative_rate: 0.2,
            false_positive_rate: 0.0001,
            false_positive_confidence: 0.55,
            confusion_rate: 0.02,
        }
    }
}

impl SensorConfig {
    /// Every visible object detected at confidence 1.0; nothing else reported.
    pub fn noiseless() -> Self {
        Self {
            detection_accuracy: 1.0,
            confidence_sd: 0.0,
            false_negative_rate: 0.0,
            false_positive_rate: 0.0,
            confusion_rate: 0.0,
            ..Self::default()
        }
    }

    pub fn fan(&self) -> Fan {
        Fan {
            fov_deg: self.fov_deg,
            max_range_m: self.max_range_m,
            angle_step_deg: self.ray_step_deg,
            radial_step_cells: self.radial_step_cells,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("detection_accuracy", self.detection_accuracy),
            ("false_negative_rate", self.false_negative_rate),
            ("false_positive_rate", self.false_positive_rate),
            ("false_positive_confidence", self.false_positive_confidence),
            ("confusion_rate", self.confusion_rate),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        for (name, v) in &self.class_accuracy {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::Config(format!("class_accuracy.{name} = {v} is outside [0, 1]")));
            }
        }
        let positive = [
            ("fov_deg", self.fov_deg),
            ("max_range_m", self.max_range_m),
            ("ray_step_deg", self.ray_step_deg),
            ("radial_step_cells", self.radial_step_cells),
        ];
        for (name, v) in positive {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.confidence_sd.is_nan() || self.confidence_sd < 0.0 {
            return Err(Error::Config("confidence_sd must be non-negative".into()));
        }
        Ok(())
    }
}

/// Static world. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Scene {
    name: String,
    walls: BitLayer,
    objects: Vec<(ClassId, CellCoord)>,
    class_names: Vec<String>,
    start: AgentPose,
    target_class: ClassId,
    optimal_path_length: f64,
    blocked: BitLayer,
    object_at: GridLayer<ClassId>,
    target_field: GridLayer<f64>,
}

impl Scene {
    /// Builds and validates a scene. `class_names[k]` names `ClassId(k + 1)`.
    ///
    /// Object cells are not traversable but do not block rays; only walls do.
    /// The optimal path length is the geodesic distance from the start cell
    /// to the nearest target-class object cell.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        width: usize,
        height: usize,
        resolution: f64,
        walls: &[CellCoord],
        objects: Vec<(ClassId, CellCoord)>,
        class_names: Vec<String>,
        start: AgentPose,
        target_class: ClassId,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidScene("empty grid".into()));
        }
        if resolution.is_nan() || resolution <= 0.0 {
            return Err(Error::InvalidScene("resolution must be positive".into()));
        }
        let n = class_names.len() as u16;
        let mut wall_layer = GridLayer::new(width, height, resolution, false);
        for &c in walls {
            wall_layer.check(c)?;
            wall_layer.set(c, true);
        }
        let mut object_at = GridLayer::new(width, height, resolution, ClassId::EMPTY);
        let mut objects = objects;
        objects.sort_by_key(|&(k, c)| (c.y, c.x, k));
        objects.dedup_by_key(|o| o.1);
        for &(class, c) in &objects {
            object_at.check(c)?;
            if class.is_empty() || class.0 > n {
                return Err(Error::UnknownClass(class.0));
            }
            if wall_layer.is_set(c) {
                return Err(Error::InvalidScene(format!("object at wall cell {c}")));
            }
            object_at.set(c, class);
        }
        if target_class.is_empty() || target_class.0 > n {
            return Err(Error::UnknownClass(target_class.0));
        }
        let mut blocked = wall_layer.clone();
        for (i, k) in object_at.cells().iter().enumerate() {
            if !k.is_empty() {
                blocked.cells_mut()[i] = true;
            }
        }
        let start_cell = start.cell(resolution);
        blocked.check(start_cell)?;
        if blocked.is_set(start_cell) {
            return Err(Error::StartOccupied(start_cell));
        }
        let targets: Vec<CellCoord> = objects.iter().filter(|&&(k, _)| k == target_class).map(|&(_, c)| c).collect();
        if targets.is_empty() {
            return Err(Error::InvalidScene(format!("no object of target class {target_class}")));
        }
        let target_field = geodesic_field(&blocked, &targets);
        let cells = target_field.at(start_cell);
        if !cells.is_finite() {
            return Err(Error::InvalidScene("no target reachable from the start".into()));
        }
        Ok(Self {
            name: name.into(),
            walls: wall_layer,
            objects,
            class_names,
            start: AgentPose { heading: normalize_angle(start.heading), ..start },
            target_class,
            optimal_path_length: cells * resolution,
            blocked,
            object_at,
            target_field,
        })
    }

    /// Checks a declared optimal length against the computed one.
    pub fn check_declared_optimal(&self, declared_m: f64) -> Result<()> {
        if declared_m <= 0.0 {
            return Err(Error::NonPositiveOptimal(declared_m));
        }
        if (declared_m - self.optimal_path_length).abs() > 1e-6 {
            return Err(Error::InvalidScene(format!(
                "declared optimal path {declared_m} m differs from computed {} m",
                self.optimal_path_length
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn width(&self) -> usize {
        self.walls.width()
    }
    pub fn height(&self) -> usize {
        self.walls.height()
    }
    pub fn dims(&self) -> (usize, usize) {
        self.walls.dims()
    }
    pub fn resolution(&self) -> f64 {
        self.walls.resolution()
    }
    pub fn walls(&self) -> &BitLayer {
        &self.walls
    }
    /// Walls and object cells.
    pub fn blocked(&self) -> &BitLayer {
        &self.blocked
    }
    pub fn objects(&self) -> &[(ClassId, CellCoord)] {
        &self.objects
    }
    pub fn object_at(&self, c: CellCoord) -> ClassId {
        self.object_at.get(c).copied().unwrap_or(ClassId::EMPTY)
    }
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }
    pub fn num_classes(&self) -> u16 {
        self.class_names.len() as u16
    }
    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.class_names.iter().position(|n| n == name).map(|i| ClassId(i as u16 + 1))
    }
    pub fn class_name(&self, id: ClassId) -> Option<&str> {
        id.0.checked_sub(1).and_then(|i| self.class_names.get(i as usize)).map(String::as_str)
    }
    pub fn start(&self) -> AgentPose {
        self.start
    }
    pub fn target_class(&self) -> ClassId {
        self.target_class
    }
    /// Meters.
    pub fn optimal_path_length(&self) -> f64 {
        self.optimal_path_length
    }
    pub fn target_cells(&self) -> impl Iterator<Item = CellCoord> + '_ {
        self.objects.iter().filter(|&&(k, _)| k == self.target_class).map(|&(_, c)| c)
    }

    /// Geodesic distance (cells) from each cell to the nearest object of `class`.
    pub fn class_field(&self, class: ClassId) -> GridLayer<f64> {
        if class == self.target_class {
            return self.target_field.clone();
        }
        let sources: Vec<_> = self.objects.iter().filter(|o| o.0 == class).map(|o| o.1).collect();
        geodesic_field(&self.blocked, &sources)
    }

    pub fn target_field(&self) -> &GridLayer<f64> {
        &self.target_field
    }

    pub fn is_free(&self, c: CellCoord) -> bool {
        self.blocked.in_bounds(c) && !self.blocked.is_set(c)
    }

    /// Whether `pose` lies within `radius_m` of any target-class object cell.
    pub fn within_target_radius(&self, pose: &AgentPose, radius_m: f64) -> bool {
        let res = self.resolution();
        self.target_cells().any(|c| pose.dist_to_cell(c, res) <= radius_m + 1e-9)
    }
}

/// Applies one action. Collisions leave the pose unchanged; STOP is a no-op here
/// and signals termination to the caller.
pub fn step(scene: &Scene, pose: &AgentPose, action: Action) -> AgentPose {
    match action {
        Action::TurnLeft => AgentPose { heading: normalize_angle(pose.heading + TURN_STEP_RAD), ..*pose },
        Action::TurnRight => AgentPose { heading: normalize_angle(pose.heading - TURN_STEP_RAD), ..*pose },
        Action::Stop => *pose,
        Action::MoveForward => {
            let next = AgentPose {
                x: pose.x + FORWARD_STEP_M * pose.heading.cos(),
                y: pose.y - FORWARD_STEP_M * pose.heading.sin(),
                heading: pose.heading,
            };
            if scene.is_free(next.cell(scene.resolution())) {
                next
            } else {
                *pose
            }
        }
    }
}

/// Cells swept by the sensor fan, each ray truncated at (and including) the
/// first wall cell. Furniture sits below the camera and does not occlude.
/// Returned row-major sorted.
pub fn visible_cells(scene: &Scene, pose: &AgentPose, fan: &Fan) -> Vec<CellCoord> {
    let (w, h) = scene.dims();
    let mut seen = vec![false; w * h];
    fan.march(
        pose.x,
        pose.y,
        pose.heading,
        scene.resolution(),
        scene.dims(),
        |c| if scene.walls().is_set(c) { RayStep::StopAfter } else { RayStep::Continue },
        |_, c| seen[c.y as usize * w + c.x as usize] = true,
    );
    seen.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| CellCoord::new((i % w) as i32, (i / w) as i32)).collect()
}

fn truncated_normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    if sd <= 0.0 {
        return mean.clamp(0.0, 1.0);
    }
    let normal = Normal::new(mean, sd).expect("finite sd");
    for _ in 0..64 {
        let v = normal.sample(rng);
        if (0.0..=1.0).contains(&v) {
            return v;
        }
    }
    mean.clamp(0.0, 1.0)
}

/// One simulated perception step. Deterministic in `(scene, pose, seed)`.
///
/// Two detector passes share the view. The multi-class pass yields one
/// detection per visible object cell (or none, with the false-negative
/// probability) whose label is occasionally wrong. The target-prompted pass
/// reports only the target class, drawing its own noise. Each visible free
/// cell may yield a spurious detection in either pass. Detections are ordered
/// by row-major cell index, then class id.
pub fn observe(scene: &Scene, pose: &AgentPose, seed: u64, sensor: &SensorConfig) -> Observation {
    let visible = visible_cells(scene, pose, &sensor.fan());
    observe_cells(scene, visible, seed, sensor)
}

pub(crate) fn observe_cells(scene: &Scene, visible: Vec<CellCoord>, seed: u64, sensor: &SensorConfig) -> Observation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prompted = ChaCha8Rng::seed_from_u64(crate::episode::mix_seed(seed, 0x7A56));
    let accuracy: Vec<f64> = scene
        .class_names()
        .iter()
        .map(|n| sensor.class_accuracy.get(n).copied().unwrap_or(sensor.detection_accuracy))
        .collect();
    let target = scene.target_class();
    let mut occupied = Vec::new();
    let mut detections = Vec::new();
    let mut target_detections = Vec::new();
    let n_classes = scene.num_classes();
    for &c in &visible {
        let blocked = scene.blocked().is_set(c);
        if blocked {
            occupied.push(c);
        }
        let class = scene.object_at(c);

        // Multi-class pass.
        if !class.is_empty() {
            let dropped = rng.random::<f64>() < sensor.false_negative_rate;
            let (label, mean) = if n_classes > 1 && rng.random::<f64>() < sensor.confusion_rate {
                // Any class but the true one, reported with low confidence.
                let k = rng.random_range(1..n_classes);
                (ClassId(if k >= class.0 { k + 1 } else { k }), sensor.false_positive_confidence)
            } else {
                (class, accuracy[class.0 as usize - 1])
            };
            let conf = truncated_normal(&mut rng, mean, sensor.confidence_sd);
            if !dropped {
                detections.push(Detection { class: label, cell: c, confidence: conf });
            }
        } else if !blocked
            && sensor.false_positive_rate > 0.0
            && n_classes > 0
            && rng.random::<f64>() < sensor.false_positive_rate
        {
            let k = ClassId(rng.random_range(1..=n_classes));
            let conf = truncated_normal(&mut rng, sensor.false_positive_confidence, sensor.confidence_sd);
            detections.push(Detection { class: k, cell: c, confidence: conf });
        }

        // Target-prompted pass, with its own draws.
        if target.is_empty() {
            continue;
        }
        if class == target {
            let dropped = prompted.random::<f64>() < sensor.false_negative_rate;
            let conf = truncated_normal(&mut prompted, accuracy[class.0 as usize - 1], sensor.confidence_sd);
            if !dropped {
                target_detections.push(Detection { class, cell: c, confidence: conf });
            }
            continue;
        }
        let rate = if !class.is_empty() {
            sensor.confusion_rate
        } else if !blocked {
            sensor.false_positive_rate
        } else {
            0.0
        };
        if rate > 0.0 && prompted.random::<f64>() < rate {
            let conf = truncated_normal(&mut prompted, sensor.false_positive_confidence, sensor.confidence_sd);
            target_detections.push(Detection { class: target, cell: c, confidence: conf });
        }
    }
    detections.sort_by_key(|d| (d.cell.y, d.cell.x, d.class));
    target_detections.sort_by_key(|d| (d.cell.y, d.cell.x));
    Observation {
        visible_cells: visible,
        occupied,
        detections,
        target_detections,
        fov_deg: sensor.fov_deg,
        max_range: sensor.max_range_m,
    }
}

/// Scene-level relevance score for the current view; the pluggable stand-in
/// for a vision-language model.
pub trait SemanticScorer {
    fn score(
        &mut self,
        scene: &Scene,
        pose: &AgentPose,
        visible: &[CellCoord],
        target_class: ClassId,
        seed: u64,
    ) -> f64;
}

/// `clamp01(s_max · exp(−d/λ) + noise)` where `d` is the geodesic distance in
/// meters from the nearest visible cell to the nearest target-class object.
///
/// The noise is zero-mean normal. Its deviation is `noise_sd` plus
/// `cue_noise_sd · (1 − min(1, cue / cue_saturation))`, where `cue` is the
/// fraction of visible cells holding an object: a view of bare floor carries
/// little for a vision-language model to go on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleScorer {
    pub lambda_m: f64,
    pub s_max: f64,
    pub noise_sd: f64,
    pub cue_noise_sd: f64,
    pub cue_saturation: f64,
}

impl Default for OracleScorer {
    fn default() -> Self {
        Self { lambda_m: 1.0, s_max: 1.0, noise_sd: 0.05, cue_noise_sd: 0.3, cue_saturation: 0.3 }
    }
}

impl OracleScorer {
    /// Noise-free apart from `noise_sd`; the formula used by `from_distance`.
    pub fn plain(lambda_m: f64, s_max: f64, noise_sd: f64) -> Self {
        Self { lambda_m, s_max, noise_sd, cue_noise_sd: 0.0, cue_saturation: 1.0 }
    }

    pub fn noise_sd_for(&self, cue: f64) -> f64 {
        let lack = 1.0 - (cue / self.cue_saturation).clamp(0.0, 1.0);
        self.noise_sd + self.cue_noise_sd * lack
    }

    /// Score at distance `d_m` with the given noise deviation.
    pub fn score_with_sd(&self, d_m: f64, sd: f64, seed: u64) -> f64 {
        let noise = if sd > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Normal::new(0.0, sd).expect("finite sd").sample(&mut rng)
        } else {
            0.0
        };
        (self.s_max * (-d_m / self.lambda_m).exp() + noise).clamp(0.0, 1.0)
    }

    /// Score at distance `d_m` for a view saturated with cues.
    pub fn from_distance(&self, d_m: f64, seed: u64) -> f64 {
        self.score_with_sd(d_m, self.noise_sd, seed)
    }
}

/// Fraction of `visible` cells that hold an object.
pub fn semantic_cue(scene: &Scene, visible: &[CellCoord]) -> f64 {
    if visible.is_empty() {
        return 0.0;
    }
    visible.iter().filter(|&&c| !scene.object_at(c).is_empty()).count() as f64 / visible.len() as f64
}

impl SemanticScorer for OracleScorer {
    fn score(
        &mut self,
        scene: &Scene,
        _pose: &AgentPose,
        visible: &[CellCoord],
        target_class: ClassId,
        seed: u64,
    ) -> f64 {
        let owned;
        let field = if target_class == scene.target_class() {
            scene.target_field()
        } else {
            owned = scene.class_field(target_class);
            &owned
        };
        let d_cells = visible.iter().map(|&c| *field.at(c)).fold(f64::INFINITY, f64::min);
        let sd = self.noise_sd_for(semantic_cue(scene, visible));
        self.score_with_sd(d_cells * scene.resolution(), sd, seed)
    }
}

/// Free-function form of the oracle score.
pub fn semantic_score(
    scene: &Scene,
    pose: &AgentPose,
    target_class: ClassId,
    seed: u64,
    sensor: &SensorConfig,
    oracle: &OracleScorer,
) -> f64 {
    let visible = visible_cells(scene, pose, &sensor.fan());
    oracle.clone().score(scene, pose, &visible, target_class, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("c{i}")).collect()
    }

    fn room(w: usize, h: usize) -> Vec<CellCoord> {
        let mut walls = Vec::new();
        for x in 0..w as i32 {
            walls.push(CellCoord::new(x, 0));
            walls.push(CellCoord::new(x, h as i32 - 1));
        }
        for y in 0..h as i32 {
            walls.push(CellCoord::new(0, y));
            walls.push(CellCoord::new(w as i32 - 1, y));
        }
        walls
    }

    fn open_scene() -> Scene {
        Scene::new(
            "open",
            12,
            12,
            0.25,
            &room(12, 12),
            vec![(ClassId(1), CellCoord::new(9, 9))],
            names(2),
            AgentPose::at_cell(CellCoord::new(5, 5), 0.25, 0.0),
            ClassId(1),
        )
        .unwrap()
    }

    #[test]
    fn forward_advances_one_cell() {
        let s = open_scene();
        let p = step(&s, &s.start(), Action::MoveForward);
        assert_eq!(p.cell(0.25), CellCoord::new(6, 5));
        assert!((p.x - 1.5).abs() < 1e-12);
    }

    #[test]
    fn twelve_left_turns_return_heading() {
        let s = open_scene();
        let mut p = AgentPose { heading: 1.0, ..s.start() };
        for _ in 0..12 {
            p = step(&s, &p, Action::TurnLeft);
        }
        assert!((p.heading - 1.0).abs() < 1e-9);
        let p2 = step(&s, &p, Action::TurnRight);
        assert!((p2.heading - (1.0 - TURN_STEP_RAD)).abs() < 1e-9);
    }

    #[test]
    fn move_into_wall_is_noop() {
        let s = open_scene();
        let p = AgentPose::at_cell(CellCoord::new(10, 5), 0.25, 0.0);
        assert_eq!(step(&s, &p, Action::MoveForward), p);
        assert_eq!(step(&s, &p, Action::Stop), p);
    }

    #[test]
    fn enclosed_agent_sees_only_walls_and_itself() {
        let mut walls = room(12, 12);
        for c in CellCoord::new(5, 5).neighbors8() {
            walls.push(c);
        }
        let s = Scene::new(
            "box",
            12,
            12,
            0.25,
            &walls,
            vec![(ClassId(1), CellCoord::new(9, 9))],
            names(1),
            AgentPose::at_cell(CellCoord::new(8, 8), 0.25, 0.0),
            ClassId(1),
        )
        .unwrap();
        let pose = AgentPose::at_cell(CellCoord::new(5, 5), 0.25, 0.0);
        let vis = visible_cells(&s, &pose, &SensorConfig::default().fan());
        assert!(vis.contains(&CellCoord::new(5, 5)));
        for c in &vis {
            assert!(*c == CellCoord::new(5, 5) || s.walls().is_set(*c), "{c} not a wall");
        }
        assert_eq!(vis.len(), 4, "{vis:?}");
    }

    #[test]
    fn range_one_cell_forward_arc() {
        let s = open_scene();
        let fan = Fan { max_range_m: 0.25, ..SensorConfig::default().fan() };
        let vis = visible_cells(&s, &s.start(), &fan);
        // Samples at 0, 0.5 and 1.0 cells; at 1.0 cell the ±39.5° fan spans
        // rows 5 ± 0.636, which round to rows 4..=6 in column 6.
        let expected = vec![CellCoord::new(6, 4), CellCoord::new(5, 5), CellCoord::new(6, 5), CellCoord::new(6, 6)];
        assert_eq!(vis, expected);
    }

    #[test]
    fn noiseless_detects_every_visible_object() {
        let s = open_scene();
        let pose = AgentPose::at_cell(CellCoord::new(5, 5), 0.25, -std::f64::consts::FRAC_PI_4);
        let obs = observe(&s, &pose, 7, &SensorConfig::noiseless());
        assert!(obs.visible_cells.contains(&CellCoord::new(9, 9)));
        assert_eq!(obs.detections, vec![Detection { class: ClassId(1), cell: CellCoord::new(9, 9), confidence: 1.0 }]);
        assert!(obs.occupied.contains(&CellCoord::new(9, 9)));
    }

    #[test]
    fn full_false_negative_rate_drops_all() {
        let s = open_scene();
        let pose = AgentPose::at_cell(CellCoord::new(5, 5), 0.25, -std::f64::consts::FRAC_PI_4);
        let sensor = SensorConfig { false_negative_rate: 1.0, false_positive_rate: 0.0, ..Default::default() };
        assert!(observe(&s, &pose, 3, &sensor).detections.is_empty());
    }

    #[test]
    fn observation_is_seed_deterministic() {
        let s = open_scene();
        let sensor = SensorConfig { false_positive_rate: 0.3, ..Default::default() };
        let pose = AgentPose::at_cell(CellCoord::new(3, 3), 0.25, -0.5);
        let a = observe(&s, &pose, 11, &sensor);
        let b = observe(&s, &pose, 11, &sensor);
        assert_eq!(a, b);
        for d in &a.detections {
            assert!(a.visible_cells.contains(&d.cell));
            assert!((0.0..=1.0).contains(&d.confidence));
        }
    }

    #[test]
    fn oracle_score_values() {
        let oracle = OracleScorer::plain(2.0, 1.0, 0.0);
        assert_eq!(oracle.from_distance(0.0, 1), 1.0);
        assert!((oracle.from_distance(2.0, 1) - (-1.0f64).exp()).abs() < 1e-12);
        assert!((oracle.from_distance(2.0, 1) - 0.3679).abs() < 1e-4);
        assert_eq!(oracle.from_distance(f64::INFINITY, 1), 0.0);

        let s = open_scene();
        let pose = AgentPose::at_cell(CellCoord::new(5, 5), 0.25, -std::f64::consts::FRAC_PI_4);
        let sensor = SensorConfig::default();
        let full = OracleScorer { s_max: 0.8, ..oracle };
        assert_eq!(semantic_score(&s, &pose, ClassId(1), 0, &sensor, &full), 0.8);
    }

    #[test]
    fn scene_rejects_unreachable_target() {
        let mut walls = room(12, 12);
        walls.extend(CellCoord::new(9, 9).neighbors8());
        let err = Scene::new(
            "sealed",
            12,
            12,
            0.25,
            &walls,
            vec![(ClassId(1), CellCoord::new(9, 9))],
            names(1),
            AgentPose::at_cell(CellCoord::new(3, 3), 0.25, 0.0),
            ClassId(1),
        );
        assert!(matches!(err, Err(Error::InvalidScene(_))));
    }

    #[test]
    fn optimal_length_is_geodesic_to_target_cell() {
        let s = open_scene();
        // (5,5) -> (9,9): four diagonal steps.
        assert!((s.optimal_path_length() - 4.0 * 2f64.sqrt() * 0.25).abs() < 1e-12);
        assert!(s.check_declared_optimal(s.optimal_path_length()).is_ok());
        assert!(s.check_declared_optimal(1.0).is_err());
    }
}
