//! Text scene format (`objnav-scene v1`): a header, a class legend and a
//! character grid.
//!
//! ```text
//! objnav-scene v1
//! size 6 4 0.25
//! class b bed
//! class t tv
//! target bed
//! heading 90
//! map
//! ######
//! #A..b#
//! #..t.#
//! ######
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{CellCoord, ClassId};
use crate::world::{AgentPose, Scene};

const MAGIC: &str = "objnav-scene v1";
const RESERVED: [char; 3] = ['#', '.', 'A'];

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::SceneParse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| err(line, format!("bad number `{s}`")))
}

pub fn parse_scene(name: &str, text: &str) -> Result<Scene> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let mut header = lines.by_ref().filter(|(_, l)| !l.is_empty() && !l.starts_with("//"));
    match header.next() {
        Some((_, MAGIC)) => {}
        Some((n, other)) => return Err(err(n, format!("expected `{MAGIC}`, found `{other}`"))),
        None => return Err(err(0, "empty scene file")),
    }

    let mut size: Option<(usize, usize, f64)> = None;
    let mut legend: BTreeMap<char, ClassId> = BTreeMap::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut target: Option<(usize, String)> = None;
    let mut heading_deg = 0.0f64;
    let mut optimal: Option<f64> = None;
    let mut map_line = 0;
    for (n, line) in header.by_ref() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["size", w, h, r] => size = Some((num(n, w)?, num(n, h)?, num(n, r)?)),
            ["class", ch, name] => {
                let mut chars = ch.chars();
                let c = chars
                    .next()
                    .filter(|_| chars.next().is_none())
                    .ok_or_else(|| err(n, "legend key must be one character"))?;
                if RESERVED.contains(&c) || c.is_whitespace() {
                    return Err(err(n, format!("`{c}` is reserved")));
                }
                if class_names.iter().any(|k| k == name) {
                    return Err(err(n, format!("class `{name}` declared twice")));
                }
                if legend.insert(c, ClassId(class_names.len() as u16 + 1)).is_some() {
                    return Err(err(n, format!("legend key `{c}` declared twice")));
                }
                class_names.push((*name).to_owned());
            }
            ["target", name] => target = Some((n, (*name).to_owned())),
            ["heading", deg] => heading_deg = num(n, deg)?,
            ["optimal", m] => optimal = Some(num(n, m)?),
            ["map"] => {
                map_line = n;
                break;
            }
            _ => return Err(err(n, format!("unrecognized line `{line}`"))),
        }
    }
    if map_line == 0 {
        return Err(err(0, "missing `map` section"));
    }
    let (w, h, res) = size.ok_or_else(|| err(map_line, "missing `size` line"))?;
    if w == 0 || h == 0 || !(res > 0.0) {
        return Err(err(map_line, "size must be positive"));
    }
    let (tline, tname) = target.ok_or_else(|| err(map_line, "missing `target` line"))?;
    let target_class = class_names
        .iter()
        .position(|k| *k == tname)
        .map(|i| ClassId(i as u16 + 1))
        .ok_or_else(|| err(tline, format!("target `{tname}` is not a declared class")))?;

    let mut walls = Vec::new();
    let mut objects = Vec::new();
    let mut start: Option<CellCoord> = None;
    let mut rows = 0usize;
    for (n, line) in lines {
        if rows == h {
            if !line.is_empty() {
                return Err(err(n, "extra rows after the grid"));
            }
            continue;
        }
        if line.chars().count() != w {
            return Err(err(n, format!("row has {} cells, expected {w}", line.chars().count())));
        }
        for (x, ch) in line.chars().enumerate() {
            let c = CellCoord::new(x as i32, rows as i32);
            match ch {
                '#' => walls.push(c),
                '.' => {}
                'A' => {
                    if start.replace(c).is_some() {
                        return Err(err(n, "more than one start cell"));
                    }
                }
                k => objects.push((*legend.get(&k).ok_or_else(|| err(n, format!("unknown cell `{k}`")))?, c)),
            }
        }
        rows += 1;
    }
    if rows != h {
        return Err(err(0, format!("grid has {rows} rows, expected {h}")));
    }
    let start = start.ok_or_else(|| err(0, "no start cell `A`"))?;
    let scene = Scene::new(
        name,
        w,
        h,
        res,
        &walls,
        objects,
        class_names,
        AgentPose::at_cell(start, res, heading_deg.to_radians()),
        target_class,
    )?;
    if let Some(m) = optimal {
        scene.check_declared_optimal(m)?;
    }
    Ok(scene)
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scene");
    parse_scene(name, &std::fs::read_to_string(path)?)
}

/// Legend keys assigned to classes in order when writing.
const KEYS: &str = "abcdefghijklmnopqrstuvwxyzBCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

pub fn write_scene(scene: &Scene) -> Result<String> {
    let keys: Vec<char> = KEYS.chars().collect();
    if scene.class_names().len() > keys.len() {
        return Err(Error::InvalidScene(format!("at most {} classes can be written", keys.len())));
    }
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "size {} {} {}", scene.width(), scene.height(), scene.resolution());
    for (i, name) in scene.class_names().iter().enumerate() {
        let _ = writeln!(out, "class {} {name}", keys[i]);
    }
    let target = scene.class_name(scene.target_class()).expect("validated target");
    let _ = writeln!(out, "target {target}");
    let _ = writeln!(out, "heading {}", (scene.start().heading.to_degrees() * 1e6).round() / 1e6);
    let _ = writeln!(out, "optimal {}", scene.optimal_path_length());
    out.push_str("map\n");
    let start = scene.start().cell(scene.resolution());
    for y in 0..scene.height() as i32 {
        for x in 0..scene.width() as i32 {
            let c = CellCoord::new(x, y);
            let k = scene.object_at(c);
            out.push(if c == start {
                'A'
            } else if scene.walls().is_set(c) {
                '#'
            } else if !k.is_empty() {
                keys[k.0 as usize - 1]
            } else {
                '.'
            });
        }
        out.push('\n');
    }
    Ok(out)
}
