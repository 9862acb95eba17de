//! Procedural multi-room scenes in two flavors: semantically sparse (a few
//! small objects) and semantically dense (rooms packed with furniture).

use std::collections::{BTreeSet, VecDeque};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellCoord, ClassId, GridLayer};
use crate::world::{AgentPose, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    Sparse,
    Dense,
}

impl std::fmt::Display for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Density::Sparse => "sparse",
            Density::Dense => "dense",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutSpec {
    pub room_cols: usize,
    pub room_rows: usize,
    /// Interior size of each room in cells.
    pub room_w: usize,
    pub room_h: usize,
    pub door_width: usize,
    pub resolution: f64,
    /// Target fraction of room interior covered by furniture in dense scenes.
    pub dense_fill: f64,
}

impl Default for LayoutSpec {
    fn default() -> Self {
        Self { room_cols: 4, room_rows: 3, room_w: 12, room_h: 12, door_width: 2, resolution: 0.25, dense_fill: 0.5 }
    }
}

struct Item {
    class: &'static str,
    w: usize,
    h: usize,
}

const fn item(class: &'static str, w: usize, h: usize) -> Item {
    Item { class, w, h }
}

struct RoomKind {
    name: &'static str,
    items: &'static [Item],
}

const ROOMS: &[RoomKind] = &[
    RoomKind {
        name: "bedroom",
        items: &[item("bed", 3, 4), item("nightstand", 1, 1), item("wardrobe", 1, 3), item("lamp", 1, 1)],
    },
    RoomKind {
        name: "bathroom",
        items: &[item("toilet", 1, 2), item("sink", 1, 1), item("bathtub", 2, 4), item("towel", 1, 1)],
    },
    RoomKind {
        name: "living",
        items: &[item("tv", 1, 2), item("sofa", 2, 4), item("coffee_table", 2, 2), item("lamp", 1, 1)],
    },
    RoomKind {
        name: "office",
        items: &[item("desk", 2, 3), item("chair", 1, 1), item("shelf", 1, 3), item("plant", 1, 1)],
    },
    RoomKind {
        name: "kitchen",
        items: &[item("oven", 1, 2), item("fridge", 2, 2), item("counter", 1, 4), item("sink", 1, 1)],
    },
];

/// Generic furniture used to pack dense rooms; carries no target affinity.
const CLUTTER: &[Item] = &[item("box", 1, 1), item("cabinet", 1, 2), item("bench", 1, 3), item("crate", 2, 2)];

/// Room kind that tends to sit next to each kind (bathroom off a bedroom,
/// kitchen off the living room).
const NEIGHBOR_KIND: &[(&str, &str)] = &[
    ("bedroom", "bathroom"),
    ("bathroom", "bedroom"),
    ("living", "kitchen"),
    ("kitchen", "living"),
    ("office", "living"),
];

/// Target classes and the room kind that holds them.
pub const TARGETS: &[(&str, &str)] =
    &[("bed", "bedroom"), ("toilet", "bathroom"), ("tv", "living"), ("chair", "office"), ("oven", "kitchen")];

struct Builder {
    w: usize,
    h: usize,
    blocked: GridLayer<bool>,
    /// Cells that must stay free (doorways and their approaches).
    reserved: GridLayer<bool>,
    objects: Vec<(&'static str, CellCoord)>,
}

type Rect = (usize, usize, usize, usize);

impl Builder {
    /// Whether the free cells inside `rect` form one 4-connected region
    /// without leaving it.
    fn free_connected_in(&self, rect: Rect) -> bool {
        let (x0, y0, rw, rh) = rect;
        let inside =
            |c: CellCoord| c.x >= x0 as i32 && c.y >= y0 as i32 && c.x < (x0 + rw) as i32 && c.y < (y0 + rh) as i32;
        let free: Vec<CellCoord> = (y0..y0 + rh)
            .flat_map(|y| (x0..x0 + rw).map(move |x| CellCoord::new(x as i32, y as i32)))
            .filter(|&c| !self.blocked.is_set(c))
            .collect();
        let Some(&start) = free.first() else { return false };
        let mut seen = GridLayer::new(self.w, self.h, self.blocked.resolution(), false);
        seen.set(start, true);
        let mut q = VecDeque::from([start]);
        let mut count = 1;
        while let Some(c) = q.pop_front() {
            for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let n = CellCoord::new(c.x + d.0, c.y + d.1);
                if inside(n) && !self.blocked.is_set(n) && !seen.is_set(n) {
                    seen.set(n, true);
                    count += 1;
                    q.push_back(n);
                }
            }
        }
        count == free.len()
    }

    /// Places an item inside the room rectangle if it fits without blocking
    /// reserved cells or cutting the room's free space in two.
    fn try_place(&mut self, rng: &mut ChaCha8Rng, it: &Item, room: Rect) -> bool {
        let (x0, y0, rw, rh) = room;
        for _ in 0..40 {
            let (w, h) = if rng.random_bool(0.5) { (it.w, it.h) } else { (it.h, it.w) };
            if w > rw || h > rh {
                continue;
            }
            let x = x0 + rng.random_range(0..=rw - w);
            let y = y0 + rng.random_range(0..=rh - h);
            let cells: Vec<CellCoord> =
                (y..y + h).flat_map(|yy| (x..x + w).map(move |xx| CellCoord::new(xx as i32, yy as i32))).collect();
            if cells.iter().any(|&c| self.blocked.is_set(c) || self.reserved.is_set(c)) {
                continue;
            }
            for &c in &cells {
                self.blocked.set(c, true);
            }
            if self.free_connected_in(room) {
                self.objects.extend(cells.iter().map(|&c| (it.class, c)));
                return true;
            }
            for &c in &cells {
                self.blocked.set(c, false);
            }
        }
        false
    }
}

/// Rooms adjacent in the room grid, as `(a, b)` with `a < b`.
fn room_edges(cols: usize, rows: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                e.push((i, i + 1));
            }
            if r + 1 < rows {
                e.push((i, i + cols));
            }
        }
    }
    e
}

fn room_distances(n: usize, doors: &[(usize, usize)], from: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; n];
    d[from] = 0;
    let mut q = VecDeque::from([from]);
    while let Some(a) = q.pop_front() {
        for &(x, y) in doors {
            let b = if x == a {
                y
            } else if y == a {
                x
            } else {
                continue;
            };
            if d[b] == usize::MAX {
                d[b] = d[a] + 1;
                q.push_back(b);
            }
        }
    }
    d
}

/// Generates one scene. Fully determined by `(spec, density, seed)`.
pub fn generate_scene(name: &str, spec: &LayoutSpec, density: Density, seed: u64) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cols, rows) = (spec.room_cols, spec.room_rows);
    let n_rooms = cols * rows;
    if n_rooms < 2 || spec.room_w < 6 || spec.room_h < 6 || spec.door_width == 0 {
        return Err(Error::InvalidScene("layout too small".into()));
    }
    let w = cols * (spec.room_w + 1) + 1;
    let h = rows * (spec.room_h + 1) + 1;
    let room_rect = |i: usize| {
        let (c, r) = (i % cols, i / cols);
        (c * (spec.room_w + 1) + 1, r * (spec.room_h + 1) + 1, spec.room_w, spec.room_h)
    };

    let mut b = Builder {
        w,
        h,
        blocked: GridLayer::new(w, h, spec.resolution, true),
        reserved: GridLayer::new(w, h, spec.resolution, false),
        objects: Vec::new(),
    };
    for i in 0..n_rooms {
        let (x0, y0, rw, rh) = room_rect(i);
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                b.blocked.set(CellCoord::new(x as i32, y as i32), false);
            }
        }
    }

    // Spanning tree of doors plus one extra door for a loop.
    let mut edges = room_edges(cols, rows);
    edges.shuffle(&mut rng);
    let mut comp: Vec<usize> = (0..n_rooms).collect();
    let mut doors = Vec::new();
    let mut spare = Vec::new();
    for (a, bb) in edges {
        let (ca, cb) = (comp[a], comp[bb]);
        if ca != cb {
            comp.iter_mut().filter(|c| **c == cb).for_each(|c| *c = ca);
            doors.push((a, bb));
        } else {
            spare.push((a, bb));
        }
    }
    if let Some(&e) = spare.first() {
        doors.push(e);
    }
    for &(a, bb) in &doors {
        let (ax, ay, rw, rh) = room_rect(a);
        let horizontal = bb == a + 1;
        let span = if horizontal { rh } else { rw };
        let off = rng.random_range(1..span - spec.door_width);
        for k in 0..spec.door_width {
            let (door, before, after) = if horizontal {
                let x = (ax + rw) as i32;
                let y = (ay + off + k) as i32;
                (CellCoord::new(x, y), CellCoord::new(x - 1, y), CellCoord::new(x + 1, y))
            } else {
                let x = (ax + off + k) as i32;
                let y = (ay + rh) as i32;
                (CellCoord::new(x, y), CellCoord::new(x, y - 1), CellCoord::new(x, y + 1))
            };
            b.blocked.set(door, false);
            for c in [door, before, after] {
                b.reserved.set(c, true);
            }
        }
    }

    // Room roles: start room, goal room as far as possible from it.
    let start_room = rng.random_range(0..n_rooms);
    let dist = room_distances(n_rooms, &doors, start_room);
    let far = *dist.iter().max().expect("rooms");
    let candidates: Vec<usize> = (0..n_rooms).filter(|&i| dist[i] == far).collect();
    let goal_room = *candidates.choose(&mut rng).expect("non-empty");
    let &(target, goal_kind) = TARGETS.choose(&mut rng).expect("targets");
    let goal_kind = ROOMS.iter().find(|k| k.name == goal_kind).expect("known room kind");
    let neighbor_kind = NEIGHBOR_KIND
        .iter()
        .find(|(k, _)| *k == goal_kind.name)
        .and_then(|(_, n)| ROOMS.iter().find(|r| r.name == *n))
        .expect("every room kind has a neighbor kind");
    // The goal room and its neighbor kind appear nowhere else.
    let others: Vec<&RoomKind> =
        ROOMS.iter().filter(|k| k.name != goal_kind.name && k.name != neighbor_kind.name).collect();

    // Keep the start cell clear.
    let (sx0, sy0, srw, srh) = room_rect(start_room);
    let start =
        CellCoord::new((sx0 + rng.random_range(1..srw - 1)) as i32, (sy0 + rng.random_range(1..srh - 1)) as i32);
    b.reserved.set(start, true);

    let mut order: Vec<usize> = (0..n_rooms).collect();
    order.sort_by_key(|&i| (i != goal_room, i));
    for i in order {
        let rect = room_rect(i);
        let kind = if i == goal_room {
            goal_kind
        } else if doors.iter().any(|&(a, bb)| (a == goal_room && bb == i) || (bb == goal_room && a == i)) {
            neighbor_kind
        } else {
            *others.choose(&mut rng).expect("others")
        };
        // The target leads the goal room's list and is absent everywhere else.
        let mut items: Vec<&Item> = kind.items.iter().filter(|it| it.class != target).collect();
        if i == goal_room {
            items.insert(0, kind.items.iter().find(|it| it.class == target).expect("target in its room"));
        }
        match density {
            Density::Sparse => {
                // The anchor object of each room, plus one companion in the goal room.
                let anchor = items[0];
                let shrink = |it: &Item| Item { class: it.class, w: 1, h: it.h.min(2) };
                let placed = b.try_place(&mut rng, &shrink(anchor), rect);
                if i == goal_room {
                    if !placed {
                        return Err(Error::InvalidScene("could not place the target".into()));
                    }
                    let companion = items[1 + rng.random_range(0..items.len() - 1)];
                    b.try_place(&mut rng, &shrink(companion), rect);
                }
            }
            Density::Dense => {
                for (k, it) in items.iter().enumerate() {
                    let placed = b.try_place(&mut rng, it, rect);
                    if k == 0 && i == goal_room && !placed {
                        return Err(Error::InvalidScene("could not place the target".into()));
                    }
                }
                let area = (rect.2 * rect.3) as f64;
                let in_room = |b: &Builder| {
                    (rect.1..rect.1 + rect.3)
                        .flat_map(|y| (rect.0..rect.0 + rect.2).map(move |x| CellCoord::new(x as i32, y as i32)))
                        .filter(|&c| b.blocked.is_set(c))
                        .count() as f64
                };
                let mut failures = 0;
                while in_room(&b) / area < spec.dense_fill && failures < 30 {
                    let pool_pick = rng.random_range(0..items.len() + CLUTTER.len());
                    let it = if pool_pick < items.len() { items[pool_pick] } else { &CLUTTER[pool_pick - items.len()] };
                    if it.class == target {
                        continue;
                    }
                    if !b.try_place(&mut rng, it, rect) {
                        failures += 1;
                    }
                }
            }
        }
    }

    let names: BTreeSet<&str> = b.objects.iter().map(|o| o.0).collect();
    let class_names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let id = |n: &str| ClassId(class_names.iter().position(|k| k == n).expect("named") as u16 + 1);
    let objects: Vec<(ClassId, CellCoord)> = b.objects.iter().map(|&(n, c)| (id(n), c)).collect();
    let object_cells: BTreeSet<CellCoord> = b.objects.iter().map(|o| o.1).collect();
    let walls: Vec<CellCoord> = b.blocked.ones().filter(|c| !object_cells.contains(c)).collect();
    let heading = (rng.random_range(0..12) as f64 * 30.0).to_radians();
    let target = id(target);
    Scene::new(
        name,
        w,
        h,
        spec.resolution,
        &walls,
        objects,
        class_names,
        AgentPose::at_cell(start, spec.resolution, heading),
        target,
    )
}

/// `count` scenes of one density, seeds derived from `seed`. Layouts that
/// cannot hold their target are skipped and regenerated.
pub fn generate_split(spec: &LayoutSpec, density: Density, count: usize, seed: u64) -> Result<Vec<Scene>> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0u64;
    while out.len() < count {
        if k > 50 * count as u64 + 50 {
            return Err(Error::InvalidScene("scene generator keeps failing".into()));
        }
        let name = format!("{density}-{:03}", out.len());
        match generate_scene(&name, spec, density, crate::episode::mix_seed(seed, k)) {
            Ok(s) => out.push(s),
            Err(Error::InvalidScene(_)) => {}
            Err(e) => return Err(e),
        }
        k += 1;
    }
    Ok(out)
}

/// Half sparse, half dense (sparse first).
pub fn generate_suite(spec: &LayoutSpec, count: usize, seed: u64) -> Result<Vec<Scene>> {
    let mut v = generate_split(spec, Density::Sparse, count / 2 + count % 2, seed)?;
    v.extend(generate_split(spec, Density::Dense, count / 2, mix_seed_dense(seed))?);
    Ok(v)
}

fn mix_seed_dense(seed: u64) -> u64 {
    crate::episode::mix_seed(seed, 0xDE45E)
}
