//! Oracle checks shared by the topic test files and the acceptance target.
//! Each check returns a short detail line on success and a description of
//! the first mismatch on failure.

#![allow(dead_code)]

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use objnav_core::fusion::{dar_score, select_frontier, weights_from_sci, DarWeights, FrontierScoring, SciReading};
use objnav_core::layered_map::{extract_frontiers, update_multi_maps, update_target_confidence};
use objnav_core::metrics::{spl, Outcome};
use objnav_core::planner::{astar, PlanOutcome};
use objnav_core::prediction::{distance_map, PredictedTargets};
use objnav_core::value_map::update_value_cell;
use objnav_core::{BitLayer, CellCoord, ClassId, GridLayer};

pub type Check = Result<String, String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut ChaCha8Rng, w: usize, h: usize, p: f64) -> BitLayer {
    let cells = (0..w * h).map(|_| rng.random_bool(p)).collect();
    GridLayer::from_vec(w, h, 0.25, cells).unwrap()
}

/// Frontier rule evaluated one cell at a time through the public accessors.
pub fn brute_frontier(obstacle: &BitLayer, explored: &BitLayer) -> BitLayer {
    let (w, h) = explored.dims();
    let mut out = GridLayer::new(w, h, explored.resolution(), false);
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let c = CellCoord::new(x, y);
            if !explored.is_set(c) || obstacle.is_set(c) {
                continue;
            }
            let unexplored_neighbor = (-1..=1)
                .flat_map(|dy| (-1..=1).map(move |dx| (dx, dy)))
                .filter(|&d| d != (0, 0))
                .any(|(dx, dy)| !explored.get(CellCoord::new(x + dx, y + dy)).copied().unwrap_or(false));
            out.set(c, unexplored_neighbor);
        }
    }
    out
}

pub fn frontier_oracle(maps: usize) -> Check {
    let mut r = rng(6);
    for k in 0..maps {
        let p_explored = r.random_range(0.2..0.95);
        let explored = random_bits(&mut r, 16, 16, p_explored);
        let obstacle = random_bits(&mut r, 16, 16, 0.25);
        let got = extract_frontiers(&obstacle, &explored);
        let want = brute_frontier(&obstacle, &explored);
        if got != want {
            let c = got.iter().zip(want.iter()).find(|(a, b)| a.1 != b.1).map(|(a, _)| a.0);
            return Err(format!("map {k}: first differing cell {c:?}"));
        }
    }
    Ok(format!("{maps} random 16x16 maps match the per-cell rule"))
}

const TABLE: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

pub fn confidence_tables() -> Check {
    let mut cases = 0;
    for &stored in &TABLE {
        for &c in &TABLE {
            // Written out by hand: overwrite on a higher reading, else average.
            let want = if c >= stored { c } else { 0.5 * (stored + c) };
            let got = update_target_confidence(stored, c).map_err(|e| e.to_string())?;
            if got != want {
                return Err(format!("target map ({stored}, {c}): got {got}, want {want}"));
            }
            cases += 1;
            for old in 0..=3u16 {
                for obs in 1..=3u16 {
                    let (want_label, want_conf) = if c > stored {
                        (obs, c)
                    } else if old == obs {
                        (old, 0.5 * (stored + c))
                    } else {
                        (old, stored)
                    };
                    let got = update_multi_maps(ClassId(old), stored, ClassId(obs), c, 3).map_err(|e| e.to_string())?;
                    if got != (ClassId(want_label), want_conf) {
                        return Err(format!("multi map ({old}, {stored}) + ({obs}, {c}): got {got:?}"));
                    }
                    cases += 1;
                }
            }
        }
    }
    for bad in [-0.1, 1.1, f64::NAN] {
        if update_target_confidence(0.5, bad).is_ok() || update_multi_maps(ClassId(1), 0.5, ClassId(1), bad, 3).is_ok()
        {
            return Err(format!("confidence {bad} accepted"));
        }
    }
    if update_multi_maps(ClassId(1), 0.5, ClassId(4), 0.9, 3).is_ok() {
        return Err("class outside the table accepted".into());
    }
    Ok(format!("{cases} table entries match"))
}

pub fn value_algebra() -> Check {
    let n = 100;
    for i in 0..=n {
        for j in 0..=n {
            let (v, s) = (i as f64 / n as f64, j as f64 / n as f64);
            let out = update_value_cell(v, s).map_err(|e| e.to_string())?;
            let tol = 1e-12;
            if out < v.min(s) - tol || out > v.max(s) + tol || out < 0.5 * (v + s) - tol {
                return Err(format!("update({v}, {s}) = {out} leaves its bounds"));
            }
        }
    }
    for (v, s, want) in [(0.5, 0.5, 0.5), (0.2, 0.8, 0.68), (0.0, 0.0, 0.0)] {
        let got = update_value_cell(v, s).map_err(|e| e.to_string())?;
        if (got - want).abs() > 1e-12 {
            return Err(format!("update({v}, {s}) = {got}, want {want}"));
        }
    }
    Ok("101x101 sweep bounded; 0.5/0.5 -> 0.5 and 0.2/0.8 -> 0.68".into())
}

/// Exhaustive frontier ranking written independently of the library.
fn exhaustive_best(
    frontier: &BitLayer,
    dist: Option<&GridLayer<f64>>,
    value: Option<&GridLayer<f64>>,
    w: DarWeights,
    eps: f64,
    agent: CellCoord,
    exclude: Option<&BitLayer>,
) -> Option<(CellCoord, f64)> {
    let diag = (frontier.width() as f64).hypot(frontier.height() as f64);
    let mut all: Vec<(f64, i64, usize, CellCoord)> = Vec::new();
    for (i, (c, &f)) in frontier.iter().enumerate() {
        if !f || exclude.is_some_and(|e| *e.at(c)) {
            continue;
        }
        let mut s = 0.0;
        if let Some(d) = dist {
            s += w.w_pred / (d.at(c) / diag + eps);
        }
        if let Some(v) = value {
            s += w.w_vlm * v.at(c);
        }
        let d2 = i64::from((c.x - agent.x).pow(2) + (c.y - agent.y).pow(2));
        all.push((s, d2, i, c));
    }
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    all.first().map(|t| (t.3, t.0))
}

pub fn select_frontier_oracle(instances: usize) -> Check {
    let mut r = rng(22);
    for k in 0..instances {
        let (w, h) = (r.random_range(4..24), r.random_range(4..24));
        let density = r.random_range(0.02..0.4);
        let frontier = random_bits(&mut r, w, h, density);
        let n_points = r.random_range(1..4);
        let points: Vec<CellCoord> =
            (0..n_points).map(|_| CellCoord::new(r.random_range(0..w as i32), r.random_range(0..h as i32))).collect();
        let dist = distance_map(&PredictedTargets { points }, (w, h), 0.25).unwrap().grid;
        // Coarse values so ties (and the tie-break) actually occur.
        let value =
            GridLayer::from_vec(w, h, 0.25, (0..w * h).map(|_| f64::from(r.random_range(0..4u8)) / 3.0).collect())
                .unwrap();
        let exclude = r.random_bool(0.3).then(|| random_bits(&mut r, w, h, 0.3));
        let sci = r.random_range(0.0..=1.0);
        let weights = match k % 5 {
            0 => DarWeights::PRED_ONLY,
            1 => DarWeights::VLM_ONLY,
            _ => weights_from_sci(SciReading::new(sci).unwrap()),
        };
        let use_dist = k % 7 != 3;
        let use_value = k % 7 != 4;
        let agent = CellCoord::new(r.random_range(0..w as i32), r.random_range(0..h as i32));
        let scoring = FrontierScoring {
            distance: use_dist.then_some(&dist),
            value: use_value.then_some(&value),
            weights,
            eps: 1e-6,
        };
        let got = select_frontier(&frontier, &scoring, agent, exclude.as_ref()).map_err(|e| e.to_string())?;
        let want = exhaustive_best(&frontier, scoring.distance, scoring.value, weights, 1e-6, agent, exclude.as_ref());
        if got != want {
            return Err(format!("instance {k}: got {got:?}, exhaustive {want:?}"));
        }
    }
    Ok(format!("{instances} random instances equal the exhaustive argmax"))
}

pub fn dar_monotonicity() -> Check {
    let grid: Vec<f64> = (0..=20).map(|i| f64::from(i) / 20.0).collect();
    let eps = 1e-6;
    for &sci in &grid {
        let w = weights_from_sci(SciReading::new(sci).unwrap());
        for pair in grid.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            for &x in &grid {
                let (near, far) = (dar_score(lo, x, w, eps), dar_score(hi, x, w, eps));
                if w.w_pred > 0.0 && near <= far || w.w_pred == 0.0 && near != far {
                    return Err(format!("sci {sci}: score not decreasing in distance at d={lo}, v={x}"));
                }
                let (low, high) = (dar_score(x, lo, w, eps), dar_score(x, hi, w, eps));
                if w.w_vlm > 0.0 && low >= high || w.w_vlm == 0.0 && low != high {
                    return Err(format!("sci {sci}: score not increasing in value at d={x}, v={lo}"));
                }
            }
        }
    }
    let mut r = rng(3);
    for k in 0..1000 {
        let sci = if k < 2 { k as f64 } else { r.random_range(0.0..=1.0) };
        let w = weights_from_sci(SciReading::new(sci).unwrap());
        if w.w_pred + w.w_vlm != 1.0 || w.w_pred < 0.0 || w.w_vlm < 0.0 || w.w_vlm != sci {
            return Err(format!("weights {w:?} for sci {sci}"));
        }
    }
    Ok("monotone over 21x21x21 sweeps; simplex exact for 1000 samples".into())
}

/// Plain array-scan Dijkstra over the same move set as the planner: four unit
/// moves and four diagonal moves that may not clip a blocked corner.
pub fn dijkstra_cost(obstacle: &BitLayer, start: CellCoord, goal: CellCoord) -> Option<f64> {
    let (w, h) = obstacle.dims();
    let free =
        |x: i32, y: i32| x >= 0 && y >= 0 && x < w as i32 && y < h as i32 && !obstacle.is_set(CellCoord::new(x, y));
    let mut dist = vec![f64::INFINITY; w * h];
    let mut done = vec![false; w * h];
    dist[start.y as usize * w + start.x as usize] = 0.0;
    loop {
        let mut best: Option<usize> = None;
        for i in 0..w * h {
            if !done[i] && dist[i].is_finite() && best.is_none_or(|b| dist[i] < dist[b]) {
                best = Some(i);
            }
        }
        let i = best?;
        done[i] = true;
        let (x, y) = ((i % w) as i32, (i / w) as i32);
        if (x, y) == (goal.x, goal.y) {
            return Some(dist[i]);
        }
        for dy in -1..=1 {
            for dx in -1..=1 {
                if (dx, dy) == (0, 0) || !free(x + dx, y + dy) {
                    continue;
                }
                let diagonal = dx != 0 && dy != 0;
                if diagonal && !(free(x + dx, y) && free(x, y + dy)) {
                    continue;
                }
                let n = (y + dy) as usize * w + (x + dx) as usize;
                let nd = dist[i] + if diagonal { SQRT_2 } else { 1.0 };
                if nd < dist[n] {
                    dist[n] = nd;
                }
            }
        }
    }
}

pub fn astar_oracle(grids: usize) -> Check {
    let mut r = rng(44);
    let mut solved = 0;
    let mut attempts = 0;
    while solved < grids {
        attempts += 1;
        let obstacle = random_bits(&mut r, 20, 20, 0.25);
        let pick = |r: &mut ChaCha8Rng| CellCoord::new(r.random_range(0..20), r.random_range(0..20));
        let (start, goal) = (pick(&mut r), pick(&mut r));
        if obstacle.is_set(start) || obstacle.is_set(goal) {
            continue;
        }
        let Some(want) = dijkstra_cost(&obstacle, start, goal) else {
            if let Ok(PlanOutcome::Found(_)) = astar(&obstacle, start, goal) {
                return Err(format!("A* found a path the oracle says does not exist ({start:?} -> {goal:?})"));
            }
            continue;
        };
        let path = match astar(&obstacle, start, goal).map_err(|e| e.to_string())? {
            PlanOutcome::Found(p) => p,
            PlanOutcome::Unreachable { .. } => return Err(format!("A* missed a path {start:?} -> {goal:?}")),
        };
        let cost = path.length_m / obstacle.resolution();
        if (cost - want).abs() > 1e-9 {
            return Err(format!("grid {solved}: A* cost {cost}, Dijkstra {want}"));
        }
        if path.cells.first() != Some(&start) || path.goal() != goal {
            return Err(format!("grid {solved}: path does not join {start:?} and {goal:?}"));
        }
        let mut walked = 0.0;
        for (a, b) in path.cells.iter().zip(&path.cells[1..]) {
            let (dx, dy) = ((b.x - a.x).abs(), (b.y - a.y).abs());
            if dx > 1 || dy > 1 || dx + dy == 0 {
                return Err(format!("grid {solved}: non-adjacent step {a:?} -> {b:?}"));
            }
            if dx + dy == 2 && (obstacle.is_set(CellCoord::new(b.x, a.y)) || obstacle.is_set(CellCoord::new(a.x, b.y)))
            {
                return Err(format!("grid {solved}: corner cut at {a:?} -> {b:?}"));
            }
            walked += if dx + dy == 2 { SQRT_2 } else { 1.0 };
        }
        if let Some(c) = path.cells.iter().find(|&&c| obstacle.is_set(c)) {
            return Err(format!("grid {solved}: path crosses obstacle {c:?}"));
        }
        if (walked - want).abs() > 1e-9 {
            return Err(format!("grid {solved}: walked {walked}, reported {want}"));
        }
        solved += 1;
    }
    Ok(format!("{solved} solvable grids ({attempts} drawn) match Dijkstra; no path cell on an obstacle"))
}

pub fn distance_oracle(sets: usize) -> Check {
    let mut r = rng(55);
    for k in 0..sets {
        let (w, h) = (r.random_range(1..30), r.random_range(1..30));
        let n = r.random_range(1..6);
        let points: Vec<CellCoord> =
            (0..n).map(|_| CellCoord::new(r.random_range(0..w as i32), r.random_range(0..h as i32))).collect();
        let d =
            distance_map(&PredictedTargets { points: points.clone() }, (w, h), 0.25).map_err(|e| e.to_string())?.grid;
        for (c, &v) in d.iter() {
            let want = points
                .iter()
                .map(|p| f64::from((c.x - p.x).pow(2) + (c.y - p.y).pow(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            if (v - want).abs() > 1e-12 {
                return Err(format!("set {k}: D{c:?} = {v}, brute force {want}"));
            }
        }
        for _ in 0..200 {
            let a = CellCoord::new(r.random_range(0..w as i32), r.random_range(0..h as i32));
            let b = CellCoord::new(r.random_range(0..w as i32), r.random_range(0..h as i32));
            let gap = f64::from((a.x - b.x).pow(2) + (a.y - b.y).pow(2)).sqrt();
            if (d.at(a) - d.at(b)).abs() > gap + 1e-12 {
                return Err(format!("set {k}: not 1-Lipschitz between {a:?} and {b:?}"));
            }
        }
    }
    let d = distance_map(&PredictedTargets { points: vec![CellCoord::new(3, 4)] }, (8, 8), 0.25).unwrap().grid;
    let v = *d.at(CellCoord::new(0, 0));
    if v != 5.0 {
        return Err(format!("(0,0) -> (3,4) = {v}"));
    }
    if distance_map(&PredictedTargets { points: vec![] }, (4, 4), 0.25).is_ok() {
        return Err("empty target set accepted".into());
    }
    Ok(format!("{sets} random target sets match brute force; 1-Lipschitz; (0,0)->(3,4) = 5"))
}

pub fn spl_worked_values() -> Check {
    let o = |success, p, l| Outcome { success, path_length_m: p, optimal_length_m: l };
    let cases = [
        (vec![o(true, 2.0, 2.0), o(true, 7.5, 7.5)], 100.0),
        (vec![o(false, 2.0, 2.0), o(false, 3.0, 1.0)], 0.0),
        (vec![o(true, 4.0, 2.0), o(false, 5.0, 3.0)], 25.0),
    ];
    for (list, want) in cases {
        let got = spl(&list).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("SPL {got}, want {want}"));
        }
    }
    Ok("100 / 0 / 25.0 reproduced exactly".into())
}
