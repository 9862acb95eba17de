//! Global planning on the obstacle layer: 8-connected A* without corner
//! cutting, geodesic distance fields, waypoint extraction and a minimal
//! heading-alignment local controller.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::grid::{BitLayer, CellCoord, GridLayer};
use crate::world::{normalize_angle, Action, AgentPose};

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub cells: Vec<CellCoord>,
    pub length_m: f64,
}

impl Path {
    pub fn goal(&self) -> CellCoord {
        *self.cells.last().expect("paths are never empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Found(Path),
    /// Goal occupied or unreachable. `substitute` is the reachable free cell
    /// nearest (Euclidean) to the goal.
    Unreachable {
        substitute: CellCoord,
    },
}

impl PlanOutcome {
    pub fn path(self) -> Option<Path> {
        match self {
            PlanOutcome::Found(p) => Some(p),
            PlanOutcome::Unreachable { .. } => None,
        }
    }
}

/// Octile distance in cells: admissible for unit / √2 step costs.
pub fn octile(a: CellCoord, b: CellCoord) -> f64 {
    let dx = f64::from((a.x - b.x).abs());
    let dy = f64::from((a.y - b.y).abs());
    dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy)
}

#[derive(Clone, Copy)]
struct Entry {
    f: f64,
    h: f64,
    index: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Min-heap on f, then h, then index.
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.h.total_cmp(&self.h)).then_with(|| other.index.cmp(&self.index))
    }
}

/// Successors of `index` with their step costs; diagonal moves need both
/// orthogonal neighbors passable.
fn successors(
    width: usize,
    height: usize,
    index: usize,
    passable: impl Fn(usize) -> bool,
    mut f: impl FnMut(usize, f64),
) {
    let x = (index % width) as i32;
    let y = (index / width) as i32;
    let (w, h) = (width as i32, height as i32);
    let idx = |x: i32, y: i32| -> Option<usize> {
        (x >= 0 && y >= 0 && x < w && y < h).then(|| y as usize * width + x as usize)
    };
    for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
        if let Some(n) = idx(x + dx, y + dy) {
            if passable(n) {
                f(n, 1.0);
            }
        }
    }
    for (dx, dy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        if let (Some(n), Some(a), Some(b)) = (idx(x + dx, y + dy), idx(x + dx, y), idx(x, y + dy)) {
            if passable(n) && passable(a) && passable(b) {
                f(n, SQRT_2);
            }
        }
    }
}

/// Minimal-cost path from `start` to `goal` over cells with `O = 0`.
pub fn astar(obstacle: &BitLayer, start: CellCoord, goal: CellCoord) -> Result<PlanOutcome> {
    let si = obstacle.check(start)?;
    let gi = obstacle.check(goal)?;
    if obstacle.cells()[si] {
        return Err(Error::StartOccupied(start));
    }
    let (w, h) = obstacle.dims();
    let blocked = obstacle.cells();
    let passable = |i: usize| !blocked[i];

    let mut g = vec![f64::INFINITY; w * h];
    let mut parent = vec![usize::MAX; w * h];
    let mut closed = vec![false; w * h];
    let mut open = BinaryHeap::new();
    g[si] = 0.0;
    let h0 = octile(start, goal);
    open.push(Entry { f: h0, h: h0, index: si });

    while let Some(Entry { index, .. }) = open.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        if index == gi {
            let mut cells = vec![obstacle.coord(gi)];
            let mut cur = gi;
            while cur != si {
                cur = parent[cur];
                cells.push(obstacle.coord(cur));
            }
            cells.reverse();
            return Ok(PlanOutcome::Found(Path { cells, length_m: g[gi] * obstacle.resolution() }));
        }
        let gc = g[index];
        successors(w, h, index, passable, |n, cost| {
            let ng = gc + cost;
            if !closed[n] && ng < g[n] {
                g[n] = ng;
                parent[n] = index;
                let hn = octile(obstacle.coord(n), goal);
                open.push(Entry { f: ng + hn, h: hn, index: n });
            }
        });
    }

    // Search exhausted: `closed` is the reachable component of `start`.
    let substitute = closed
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(i, _)| obstacle.coord(i))
        .min_by(|a, b| a.dist(goal).total_cmp(&b.dist(goal)).then_with(|| (a.y, a.x).cmp(&(b.y, b.x))))
        .unwrap_or(start);
    Ok(PlanOutcome::Unreachable { substitute })
}

/// Multi-source geodesic distance (cells) to the nearest source, moving over
/// unblocked cells (sources are always enterable). Unreachable cells hold +∞.
pub fn geodesic_field(blocked: &BitLayer, sources: &[CellCoord]) -> GridLayer<f64> {
    let (w, h) = blocked.dims();
    let mut dist = GridLayer::new(w, h, blocked.resolution(), f64::INFINITY);
    let mut is_source = vec![false; w * h];
    let mut open = BinaryHeap::new();
    for &s in sources {
        if let Some(i) = blocked.index(s) {
            is_source[i] = true;
            dist.cells_mut()[i] = 0.0;
            open.push(Entry { f: 0.0, h: 0.0, index: i });
        }
    }
    let b = blocked.cells();
    let passable = |i: usize| !b[i] || is_source[i];
    let mut done = vec![false; w * h];
    while let Some(Entry { f, index, .. }) = open.pop() {
        if done[index] {
            continue;
        }
        done[index] = true;
        let d = dist.cells_mut();
        successors(w, h, index, passable, |n, cost| {
            let nd = f + cost;
            if nd < d[n] {
                d[n] = nd;
                open.push(Entry { f: nd, h: 0.0, index: n });
            }
        });
    }
    dist
}

/// First path cell at least `lookahead_m` of arc length beyond the path cell
/// nearest the agent; the goal when the remaining path is shorter.
pub fn extract_waypoint(path: &Path, pose: &AgentPose, lookahead_m: f64, resolution: f64) -> CellCoord {
    let nearest = path
        .cells
        .iter()
        .enumerate()
        .min_by(|a, b| pose.dist_to_cell(*a.1, resolution).total_cmp(&pose.dist_to_cell(*b.1, resolution)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut arc = 0.0;
    for pair in path.cells[nearest..].windows(2) {
        arc += pair[0].dist(pair[1]) * resolution;
        if arc >= lookahead_m - 1e-9 {
            return pair[1];
        }
    }
    path.goal()
}

/// Bearing (radians, same convention as headings) from the pose to a cell center.
pub fn bearing_to(pose: &AgentPose, cell: CellCoord, resolution: f64) -> f64 {
    let dx = f64::from(cell.x) * resolution - pose.x;
    let dy = f64::from(cell.y) * resolution - pose.y;
    normalize_angle((-dy).atan2(dx))
}

/// Signed heading error in `(−π, π]`.
pub fn heading_error(heading: f64, bearing: f64) -> f64 {
    let e = (bearing - heading).rem_euclid(2.0 * PI);
    if e > PI {
        e - 2.0 * PI
    } else {
        e
    }
}

/// Turn toward the waypoint until within `align_tol_deg` (inclusive), then
/// move forward. STOP only when standing on the final goal.
pub fn local_step(
    pose: &AgentPose,
    waypoint: CellCoord,
    is_final_goal: bool,
    resolution: f64,
    align_tol_deg: f64,
) -> Action {
    if pose.cell(resolution) == waypoint {
        return if is_final_goal { Action::Stop } else { Action::TurnLeft };
    }
    let err = heading_error(pose.heading, bearing_to(pose, waypoint, resolution));
    if err.abs() <= align_tol_deg.to_radians() + 1e-9 {
        Action::MoveForward
    } else if err > 0.0 {
        Action::TurnLeft
    } else {
        Action::TurnRight
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::AgentPose;

    fn free(w: usize, h: usize) -> BitLayer {
        GridLayer::new(w, h, 0.25, false)
    }

    fn straight_path(n: i32) -> Path {
        let cells: Vec<_> = (0..n).map(|x| CellCoord::new(x, 0)).collect();
        Path { length_m: f64::from(n - 1) * 0.25, cells }
    }

    #[test]
    fn start_equals_goal() {
        let p = astar(&free(5, 5), CellCoord::new(2, 2), CellCoord::new(2, 2)).unwrap().path().unwrap();
        assert_eq!(p.cells, vec![CellCoord::new(2, 2)]);
        assert_eq!(p.length_m, 0.0);
    }

    #[test]
    fn open_diagonal() {
        let p = astar(&free(10, 10), CellCoord::new(0, 0), CellCoord::new(9, 9)).unwrap().path().unwrap();
        assert!((p.length_m / 0.25 - 9.0 * SQRT_2).abs() < 1e-9);
        assert_eq!(p.cells.len(), 10);
    }

    #[test]
    fn start_occupied_is_error() {
        let mut o = free(4, 4);
        o.set(CellCoord::new(0, 0), true);
        assert!(matches!(astar(&o, CellCoord::new(0, 0), CellCoord::new(3, 3)), Err(Error::StartOccupied(_))));
    }

    #[test]
    fn no_corner_cutting() {
        // Walls at (1,0) and (0,1): the diagonal (0,0)->(1,1) is forbidden.
        let mut o = free(3, 3);
        o.set(CellCoord::new(1, 0), true);
        o.set(CellCoord::new(0, 1), true);
        let out = astar(&o, CellCoord::new(0, 0), CellCoord::new(2, 2)).unwrap();
        assert_eq!(out, PlanOutcome::Unreachable { substitute: CellCoord::new(0, 0) });
    }

    #[test]
    fn occupied_goal_suggests_nearest_reachable() {
        let mut o = free(5, 5);
        o.set(CellCoord::new(4, 4), true);
        let out = astar(&o, CellCoord::new(0, 0), CellCoord::new(4, 4)).unwrap();
        match out {
            PlanOutcome::Unreachable { substitute } => {
                assert!(substitute == CellCoord::new(3, 4) || substitute == CellCoord::new(4, 3));
                assert_eq!(substitute, CellCoord::new(4, 3), "row-major tie-break");
            }
            other => panic!("expected unreachable, got {other:?}"),
        }
    }

    #[test]
    fn geodesic_field_around_wall() {
        let mut o = free(5, 3);
        for y in 0..2 {
            o.set(CellCoord::new(2, y), true);
        }
        let f = geodesic_field(&o, &[CellCoord::new(0, 0)]);
        assert_eq!(*f.at(CellCoord::new(0, 0)), 0.0);
        assert_eq!(*f.at(CellCoord::new(2, 0)), f64::INFINITY);
        // (0,0)->(1,1) diagonal; (1,1)->(2,2) would cut the corner at (2,1), so via (1,2).
        assert!((f.at(CellCoord::new(2, 2)) - (SQRT_2 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn waypoint_lookahead() {
        let res = 0.25;
        let short = straight_path(3);
        let pose = AgentPose::at_cell(CellCoord::new(0, 0), res, 0.0);
        assert_eq!(extract_waypoint(&short, &pose, 1.0, res), CellCoord::new(2, 0));

        let long = straight_path(8);
        assert_eq!(extract_waypoint(&long, &pose, 1.0, res), CellCoord::new(4, 0));

        let at_goal = AgentPose::at_cell(CellCoord::new(7, 0), res, 0.0);
        assert_eq!(extract_waypoint(&long, &at_goal, 1.0, res), CellCoord::new(7, 0));
    }

    #[test]
    fn controller_cases() {
        let res = 0.25;
        let pose = AgentPose::at_cell(CellCoord::new(5, 5), res, 0.0);
        assert_eq!(local_step(&pose, CellCoord::new(9, 5), false, res, 15.0), Action::MoveForward);
        assert_eq!(local_step(&pose, CellCoord::new(5, 1), false, res, 15.0), Action::TurnLeft);
        assert_eq!(local_step(&pose, CellCoord::new(5, 9), false, res, 15.0), Action::TurnRight);
        assert_eq!(local_step(&pose, CellCoord::new(5, 5), true, res, 15.0), Action::Stop);

        // Exactly ±15°: the waypoint lies along a ray at 15° from the heading.
        let boundary = AgentPose { heading: 15f64.to_radians(), ..pose };
        assert_eq!(local_step(&boundary, CellCoord::new(9, 5), false, res, 15.0), Action::MoveForward);
        let boundary = AgentPose { heading: normalize_angle(-15f64.to_radians()), ..pose };
        assert_eq!(local_step(&boundary, CellCoord::new(9, 5), false, res, 15.0), Action::MoveForward);
        let outside = AgentPose { heading: 15.5f64.to_radians(), ..pose };
        assert_eq!(local_step(&outside, CellCoord::new(9, 5), false, res, 15.0), Action::TurnRight);
    }
}
