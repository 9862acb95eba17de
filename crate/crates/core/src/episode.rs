//! One navigation episode: observe, update maps, score, predict, decide, plan
//! and act until STOP, the step limit or the end of the frontier.

use std::fmt::Write as _;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Params;
use crate::error::{Error, Result};
use crate::fusion::{
    compute_sci_with, select_frontier, try_lock_target, weights_from_sci, DarWeights, FrontierScoring, LockMode,
    LockParams, SciCategory, SciReading,
};
use crate::grid::{BitLayer, CellCoord, ClassId, GridLayer};
use crate::layered_map::{LayeredMap, SemanticLayers};
use crate::metrics::Outcome;
use crate::planner::{astar, extract_waypoint, heading_error, local_step, Path, PlanOutcome};
use crate::prediction::{distance_map, HeuristicPredictor, PriorTable, TargetPredictor};
use crate::value_map::ValueMap;
use crate::wire::{RemotePredictor, RemoteScorer};
use crate::world::{observe, step, Action, AgentPose, Scene, SemanticScorer, FORWARD_STEP_M, TURN_STEP_RAD};

/// Which decision modules are enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ablation {
    /// Single-target semantic layer.
    pub stl: bool,
    /// Multi-object semantic layer.
    pub mol: bool,
    /// Target prediction.
    pub tpm: bool,
    /// Value map.
    pub vm: bool,
}

impl Ablation {
    pub const FULL: Ablation = Ablation { stl: true, mol: true, tpm: true, vm: true };

    /// Parses a comma-separated list of modules to disable (`stl`, `mol`,
    /// `tpm`, `vm`); empty or `none` keeps every module.
    pub fn disabling(list: &str) -> Result<Self> {
        let mut a = Self::FULL;
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty() && *s != "none") {
            match name.to_ascii_lowercase().as_str() {
                "stl" => a.stl = false,
                "mol" => a.mol = false,
                "tpm" => a.tpm = false,
                "vm" => a.vm = false,
                other => return Err(Error::Config(format!("unknown module `{other}`"))),
            }
        }
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tpm && !self.vm {
            return Err(Error::Config("at least one of tpm and vm must stay enabled".into()));
        }
        if !self.stl && !self.mol {
            return Err(Error::Config("at least one of stl and mol must stay enabled".into()));
        }
        Ok(())
    }

    /// `full`, or the disabled modules as `w/o vm+tpm`.
    pub fn label(&self) -> String {
        let off: Vec<&str> = [("stl", self.stl), ("mol", self.mol), ("tpm", self.tpm), ("vm", self.vm)]
            .into_iter()
            .filter(|(_, on)| !on)
            .map(|(n, _)| n)
            .collect();
        if off.is_empty() {
            "full".into()
        } else {
            format!("w/o {}", off.join("+"))
        }
    }

    fn lock_mode(&self) -> LockMode {
        match (self.stl, self.mol) {
            (true, true) => LockMode::Fused,
            (true, false) => LockMode::TargetOnly,
            _ => LockMode::MultiOnly,
        }
    }
}

impl Default for Ablation {
    fn default() -> Self {
        Self::FULL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Score-ranked frontiers.
    #[default]
    Fusion,
    /// Uniformly random frontier; same locking and replanning.
    RandomFrontier,
}

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub params: Params,
    pub prior: PriorTable,
    pub ablation: Ablation,
    pub strategy: Strategy,
    pub seed: u64,
}

impl EpisodeConfig {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        let prior = params.prior_table()?;
        Ok(Self { params, prior, ablation: Ablation::FULL, strategy: Strategy::Fusion, seed: 0 })
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.ablation.validate()
    }

    /// Short description used in trace headers and reports.
    pub fn label(&self) -> String {
        match self.strategy {
            Strategy::Fusion => self.ablation.label(),
            Strategy::RandomFrontier => "random-frontier".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Stop,
    StepLimit,
    NoFrontier,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Stop => "stop",
            Termination::StepLimit => "step_limit",
            Termination::NoFrontier => "no_frontier",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scene: String,
    pub seed: u64,
    pub success: bool,
    pub path_length_m: f64,
    pub optimal_length_m: f64,
    pub steps: usize,
    pub termination: Termination,
    /// Mean cue intensity over all steps (0 when the multi-object layer is off).
    pub mean_sci: f64,
    /// Mean prediction weight the adaptive rule assigns over all steps.
    pub mean_w_pred: f64,
    pub predictor_calls: usize,
    pub scorer_calls: usize,
    pub value_fills: usize,
    pub fallbacks: usize,
}

impl EpisodeResult {
    pub fn outcome(&self) -> Outcome {
        Outcome { success: self.success, path_length_m: self.path_length_m, optimal_length_m: self.optimal_length_m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Goal {
    Explore(CellCoord),
    Navigate(CellCoord),
}

impl Goal {
    fn cell(self) -> CellCoord {
        match self {
            Goal::Explore(c) | Goal::Navigate(c) => c,
        }
    }
}

impl std::fmt::Display for Goal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Goal::Explore(c) => write!(f, "explore({},{})", c.x, c.y),
            Goal::Navigate(c) => write!(f, "navigate({},{})", c.x, c.y),
        }
    }
}

/// Read-only view of the episode state after each action, for renderers.
pub struct StepView<'a> {
    pub step: usize,
    pub scene: &'a Scene,
    pub maps: &'a LayeredMap,
    pub value: &'a ValueMap,
    pub distance: Option<&'a GridLayer<f64>>,
    pub pose: AgentPose,
    pub goal: Option<CellCoord>,
    pub path: Option<&'a Path>,
    pub action: Action,
}

/// Result plus the line-oriented decision trace.
#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub result: EpisodeResult,
    pub trace: String,
}

/// Deterministic 64-bit mixing of a seed with a stream tag.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(seed: u64, step: usize, kind: u64) -> u64 {
    mix_seed(mix_seed(seed, kind), step as u64)
}

/// Samples points along the segment between two cell centers and reports
/// whether any lands on a blocked cell.
fn segment_blocked(obstacle: &BitLayer, pose: &AgentPose, to: CellCoord, res: f64) -> bool {
    let (x0, y0) = (pose.x / res, pose.y / res);
    let (x1, y1) = (f64::from(to.x), f64::from(to.y));
    let n = ((x1 - x0).hypot(y1 - y0) * 4.0).ceil().max(1.0) as usize;
    (0..=n).any(|i| {
        let t = i as f64 / n as f64;
        let c = CellCoord::new((x0 + t * (x1 - x0)).round() as i32, (y0 + t * (y1 - y0)).round() as i32);
        obstacle.is_set(c)
    })
}

/// Turns in a full rotation on the 30° lattice.
const FULL_SCAN_TURNS: u32 = 12;

/// Bearing from `pose` to the mean of `cell`'s unexplored in-grid neighbors.
fn unexplored_bearing(maps: &LayeredMap, cell: CellCoord, pose: &AgentPose) -> Option<f64> {
    let (mut sx, mut sy, mut k) = (0.0, 0.0, 0);
    for n in cell.neighbors8() {
        if maps.explored.in_bounds(n) && !maps.explored.is_set(n) {
            sx += f64::from(n.x);
            sy += f64::from(n.y);
            k += 1;
        }
    }
    if k == 0 {
        return None;
    }
    let res = maps.explored.resolution();
    let (mx, my) = (sx / f64::from(k) * res, sy / f64::from(k) * res);
    let dx = mx - pose.x;
    let dy = my - pose.y;
    Some(crate::world::normalize_angle((-dy).atan2(dx)))
}

fn ahead(pose: &AgentPose, heading: f64) -> AgentPose {
    AgentPose { x: pose.x + FORWARD_STEP_M * heading.cos(), y: pose.y - FORWARD_STEP_M * heading.sin(), heading }
}

/// Heading on the turn lattice whose forward step lands on a known-free cell
/// closest to `to`. Used when the aligned heading would run into an obstacle.
fn detour_heading(obstacle: &BitLayer, pose: &AgentPose, to: CellCoord, res: f64) -> Option<f64> {
    let mut best: Option<(f64, f64, f64)> = None;
    for k in 0..12 {
        let h = crate::world::normalize_angle(pose.heading + f64::from(k) * TURN_STEP_RAD);
        let land = ahead(pose, h);
        let c = land.cell(res);
        if !obstacle.in_bounds(c) || obstacle.is_set(c) {
            continue;
        }
        let d = (land.x / res - f64::from(to.x)).hypot(land.y / res - f64::from(to.y));
        let turn = heading_error(pose.heading, h).abs();
        if best.is_none_or(|(bd, bt, _)| d < bd - 1e-9 || (d < bd + 1e-9 && turn < bt)) {
            best = Some((d, turn, h));
        }
    }
    best.map(|b| b.2)
}

fn steer_to(heading: f64, want: f64) -> Action {
    let err = heading_error(heading, want);
    if err.abs() < 1e-6 {
        Action::MoveForward
    } else if err > 0.0 {
        Action::TurnLeft
    } else {
        Action::TurnRight
    }
}

fn chebyshev(a: CellCoord, b: CellCoord) -> i32 {
    (a.x - b.x).abs().max((a.y - b.y).abs())
}

pub fn run_episode(scene: &Scene, config: &EpisodeConfig) -> Result<EpisodeRun> {
    run_episode_with(scene, config, &mut |_| {})
}

pub fn run_episode_with(
    scene: &Scene,
    config: &EpisodeConfig,
    observer: &mut dyn FnMut(&StepView<'_>),
) -> Result<EpisodeRun> {
    config.validate()?;
    let p = &config.params;
    let abl = config.ablation;
    let target = scene.target_class();
    let res = scene.resolution();
    let (w, h) = scene.dims();
    let seed = config.seed;
    let timeout = Duration::from_millis(p.remote.timeout_ms);

    let heuristic =
        HeuristicPredictor { prior: config.prior.resolve(scene.class_names()), max_targets: p.prediction.max_targets };
    let mut predictor: Box<dyn TargetPredictor> = match &p.remote.predictor {
        Some(endpoint) => Box::new(RemotePredictor::connect(endpoint, timeout, heuristic)),
        None => Box::new(heuristic),
    };
    let mut scorer: Box<dyn SemanticScorer> = match &p.remote.scorer {
        Some(endpoint) => Box::new(RemoteScorer::connect(endpoint, timeout, p.oracle)),
        None => Box::new(p.oracle),
    };

    let mut maps = LayeredMap::new(w, h, res, scene.num_classes());
    let mut vmap = ValueMap::new(w, h, res, p.value_map.d_max_m, p.sensor.fov_deg);
    vmap.weighting = p.value_map.weighting;
    vmap.angle_step_deg = p.sensor.ray_step_deg;
    vmap.radial_step_cells = p.sensor.radial_step_cells;
    let layers = SemanticLayers { target: abl.stl, multi: abl.mol };
    let lock_params = LockParams {
        mode: abl.lock_mode(),
        threshold: p.fusion.lock_threshold,
        neighborhood: p.fusion.lock_neighborhood,
        fallback_to_target: p.fusion.lock_fallback,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x5EED));

    let mut trace = String::new();
    let _ = writeln!(
        trace,
        "episode scene={} seed={} config={} target={} size={}x{} l={:.4}",
        scene.name(),
        seed,
        config.label(),
        scene.class_name(target).unwrap_or("?"),
        w,
        h,
        scene.optimal_path_length()
    );

    let diagonal = maps.frontier.diagonal();
    let mut pose = scene.start();
    let mut goal: Option<Goal> = None;
    let mut locked = false;
    let mut excluded = GridLayer::new(w, h, res, false);
    let mut path: Option<Path> = None;
    let mut distance: Option<GridLayer<f64>> = None;
    let mut dar: Option<f64> = None;
    let mut bumped = false;
    let mut detour: Option<f64> = None;
    let mut scan_turns = 0;
    let mut look_turns = 0;
    let mut walked = 0.0;
    let (mut sci_sum, mut wpred_sum) = (0.0, 0.0);
    let (mut predictor_calls, mut scorer_calls, mut value_fills, mut fallbacks) = (0, 0, 0, 0);
    let mut termination = Termination::StepLimit;
    let mut steps = 0;
    let mut stopped = false;

    for t in 0..p.episode.max_steps {
        let obs = observe(scene, &pose, stream(seed, t, 1), &p.sensor);
        maps.mark_explored(&obs.visible_cells)?;
        maps.mark_obstacles(&obs.occupied)?;
        maps.apply_observation(&obs, target, layers)?;
        maps.refresh_frontiers();
        let agent = pose.cell(res);

        let mut score = None;
        if abl.vm && config.strategy == Strategy::Fusion {
            let s = scorer.score(scene, &pose, &obs.visible_cells, target, stream(seed, t, 2));
            scorer_calls += 1;
            vmap.sector_fill(&pose, s, &maps.obstacle)?;
            value_fills += 1;
            score = Some(s);
        }

        let sci = if abl.mol {
            compute_sci_with(&maps.smap_multi, &maps.cmap_multi, &obs.visible_cells, p.fusion.sci_confidence)?.value
        } else {
            0.0
        };
        let sci =
            SciReading { value: sci, category: SciCategory::classify(sci, p.fusion.sci_dense, p.fusion.sci_sparse) };
        let weights = if !abl.vm {
            DarWeights::PRED_ONLY
        } else if !abl.tpm {
            DarWeights::VLM_ONLY
        } else {
            weights_from_sci(sci)
        };
        sci_sum += sci.value;
        wpred_sum += weights.w_pred;

        if let Some(lock) = try_lock_target(&maps, target, &lock_params) {
            if goal != Some(Goal::Navigate(lock.goal)) {
                goal = Some(Goal::Navigate(lock.goal));
                path = None;
                dar = None;
            }
            locked = true;
        }

        // Goal selection and planning; unreachable exploration goals are
        // excluded and another frontier is tried.
        let mut action = None;
        let mut no_frontier = false;
        let mut selected = false;
        loop {
            // On arrival at a frontier goal, face its unexplored side before
            // giving it up; the field of view is narrow.
            if let Some(Goal::Explore(c)) = goal {
                if agent == c && maps.frontier.is_set(c) && look_turns < FULL_SCAN_TURNS / 2 {
                    if let Some(b) = unexplored_bearing(&maps, c, &pose) {
                        let err = heading_error(pose.heading, b);
                        if err.abs() > p.episode.align_tolerance_deg.to_radians() + 1e-9 {
                            look_turns += 1;
                            action = Some(if err > 0.0 { Action::TurnLeft } else { Action::TurnRight });
                            break;
                        }
                    }
                }
            }
            let needs_goal = match goal {
                None => true,
                Some(Goal::Explore(c)) => !selected || !maps.frontier.is_set(c) || excluded.is_set(c) || agent == c,
                Some(Goal::Navigate(_)) => false,
            };
            if needs_goal {
                let mut current = None;
                if let Some(Goal::Explore(c)) = goal {
                    if agent == c {
                        excluded.set(c, true);
                    } else if maps.frontier.is_set(c) && !excluded.is_set(c) {
                        current = Some(c);
                    }
                }
                selected = true;
                let chosen = match config.strategy {
                    Strategy::Fusion => {
                        if abl.tpm && weights.w_pred > 0.0 {
                            let (smap, cmap) = if abl.mol {
                                (maps.smap_multi.clone(), maps.cmap_multi.clone())
                            } else {
                                let ids = maps.smap_target.map(|&b| if b { target } else { ClassId::EMPTY });
                                (ids, maps.cmap_target.clone())
                            };
                            let out = predictor.predict(&smap, &cmap, target)?;
                            predictor_calls += 1;
                            if let Some(note) = out.fallback {
                                fallbacks += 1;
                                let _ = writeln!(trace, "fallback t={t} reason={note}");
                            }
                            distance = Some(distance_map(&out.targets, (w, h), res)?.grid);
                        }
                        let smoothed = (abl.vm && weights.w_vlm > 0.0).then(|| vmap.smoothed(p.value_map.sigma));
                        let scoring = FrontierScoring {
                            distance: if abl.tpm && weights.w_pred > 0.0 { distance.as_ref() } else { None },
                            value: smoothed.as_ref(),
                            weights,
                            eps: p.fusion.epsilon,
                        };
                        let best = select_frontier(&maps.frontier, &scoring, agent, Some(&excluded))?;
                        match (best, current) {
                            (Some((_, top)), Some(c)) => {
                                let kept = scoring.score_at(maps.frontier.index(c).expect("in grid"), diagonal);
                                if kept >= (1.0 - p.episode.goal_hysteresis) * top {
                                    Some((c, kept))
                                } else {
                                    best
                                }
                            }
                            _ => best,
                        }
                    }
                    Strategy::RandomFrontier => match current {
                        Some(c) => Some((c, 0.0)),
                        None => {
                            let open: Vec<CellCoord> = maps.frontier.ones().filter(|&c| !excluded.is_set(c)).collect();
                            (!open.is_empty()).then(|| (open[rng.random_range(0..open.len())], 0.0))
                        }
                    },
                };
                match chosen {
                    Some((c, s)) => {
                        if goal != Some(Goal::Explore(c)) {
                            path = None;
                        }
                        scan_turns = 0;
                        look_turns = 0;
                        goal = Some(Goal::Explore(c));
                        dar = (config.strategy == Strategy::Fusion).then_some(s);
                    }
                    None if scan_turns < FULL_SCAN_TURNS => {
                        // Look around before concluding that nothing is left.
                        goal = None;
                        scan_turns += 1;
                        action = Some(Action::TurnLeft);
                        break;
                    }
                    None => {
                        goal = None;
                        no_frontier = true;
                        action = Some(Action::Stop);
                        break;
                    }
                }
            }
            let g = goal.expect("goal set above");
            if let Goal::Navigate(c) = g {
                if chebyshev(agent, c) <= p.episode.arrival_tolerance_cells {
                    action = Some(Action::Stop);
                    break;
                }
            }
            let stale = match &path {
                None => true,
                Some(pa) => {
                    pa.goal() != g.cell()
                        || !pa.cells.contains(&agent)
                        || pa.cells.iter().any(|&c| maps.obstacle.is_set(c))
                }
            };
            if !stale {
                break;
            }
            path = None;
            match astar(&maps.obstacle, agent, g.cell())? {
                PlanOutcome::Found(pa) => {
                    path = Some(pa);
                    break;
                }
                PlanOutcome::Unreachable { substitute } => match g {
                    Goal::Explore(c) => {
                        excluded.set(c, true);
                        goal = None;
                    }
                    Goal::Navigate(_) => {
                        if substitute == agent {
                            action = Some(Action::Stop);
                        } else if let Ok(PlanOutcome::Found(pa)) = astar(&maps.obstacle, agent, substitute) {
                            path = Some(pa);
                        } else {
                            action = Some(Action::Stop);
                        }
                        break;
                    }
                },
            }
        }

        let action = match action {
            Some(a) => a,
            None => {
                let pa = path.as_ref().expect("planned above");
                let next = pa.cells.iter().position(|&c| c == agent).and_then(|i| pa.cells.get(i + 1)).copied();
                let mut wp = extract_waypoint(pa, &pose, p.episode.lookahead_m, res);
                if bumped || segment_blocked(&maps.obstacle, &pose, wp, res) {
                    wp = next.unwrap_or(wp);
                }
                let is_final = matches!(goal, Some(Goal::Navigate(_))) && wp == pa.goal();
                let proposed = local_step(&pose, wp, is_final, res, p.episode.align_tolerance_deg);
                if detour.is_none()
                    && proposed == Action::MoveForward
                    && maps.obstacle.is_set(ahead(&pose, pose.heading).cell(res))
                {
                    detour = detour_heading(&maps.obstacle, &pose, next.unwrap_or(wp), res);
                }
                match detour {
                    Some(h) => steer_to(pose.heading, h),
                    None => proposed,
                }
            }
        };
        if action == Action::MoveForward || action == Action::Stop {
            detour = None;
        }

        let before = pose;
        pose = step(scene, &pose, action);
        bumped = false;
        if action == Action::MoveForward {
            if pose == before {
                bumped = true;
                let blocked = ahead(&before, before.heading).cell(res);
                if maps.obstacle.in_bounds(blocked) {
                    maps.mark_obstacles(&[blocked])?;
                }
                path = None;
            } else {
                walked += FORWARD_STEP_M;
            }
        }
        steps = t + 1;

        let _ = write!(
            trace,
            "t={t} x={:.4} y={:.4} h={:.1} act={action} goal=",
            pose.x,
            pose.y,
            pose.heading.to_degrees()
        );
        match goal {
            Some(g) => {
                let _ = write!(trace, "{g}");
            }
            None => trace.push('-'),
        }
        match dar {
            Some(d) => {
                let _ = write!(trace, " dar={d:.6}");
            }
            None => trace.push_str(" dar=-"),
        }
        let _ = write!(
            trace,
            " sci={:.4} cat={} w={:.4}/{:.4} lock={}",
            sci.value,
            sci.category,
            weights.w_pred,
            weights.w_vlm,
            if locked { "yes" } else { "no" }
        );
        match score {
            Some(s) => {
                let _ = write!(trace, " score={s:.4}");
            }
            None => trace.push_str(" score=-"),
        }
        let _ = writeln!(trace, " pred={predictor_calls} fills={value_fills}{}", if bumped { " bump" } else { "" });

        observer(&StepView {
            step: t,
            scene,
            maps: &maps,
            value: &vmap,
            distance: distance.as_ref(),
            pose,
            goal: goal.map(Goal::cell),
            path: path.as_ref(),
            action,
        });

        if action == Action::Stop {
            stopped = true;
            termination = if no_frontier { Termination::NoFrontier } else { Termination::Stop };
            break;
        }
    }

    let success = stopped && scene.within_target_radius(&pose, p.episode.success_radius_m);
    let n = steps.max(1) as f64;
    let result = EpisodeResult {
        scene: scene.name().to_owned(),
        seed,
        success,
        path_length_m: walked,
        optimal_length_m: scene.optimal_path_length(),
        steps,
        termination,
        mean_sci: sci_sum / n,
        mean_w_pred: wpred_sum / n,
        predictor_calls,
        scorer_calls,
        value_fills,
        fallbacks,
    };
    let _ = writeln!(
        trace,
        "result success={} steps={} p={:.4} l={:.4} term={} mean_sci={:.6} pred_calls={} scorer_calls={} fills={} fallbacks={}",
        u8::from(result.success),
        result.steps,
        result.path_length_m,
        result.optimal_length_m,
        result.termination,
        result.mean_sci,
        result.predictor_calls,
        result.scorer_calls,
        result.value_fills,
        result.fallbacks
    );
    Ok(EpisodeRun { result, trace })
}
