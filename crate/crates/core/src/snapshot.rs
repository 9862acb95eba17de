//! Plain-text dump of a [`LayeredMap`] (`objnav-map v1`), exact under
//! round-trip.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{ClassId, GridLayer};
use crate::layered_map::LayeredMap;

const MAGIC: &str = "objnav-map v1";

fn bits(out: &mut String, name: &str, layer: &GridLayer<bool>) {
    let _ = writeln!(out, "layer {name}");
    for row in layer.cells().chunks(layer.width()) {
        out.extend(row.iter().map(|&b| if b { '1' } else { '0' }));
        out.push('\n');
    }
}

fn values<V: std::fmt::Display>(out: &mut String, name: &str, layer: &GridLayer<V>) {
    let _ = writeln!(out, "layer {name}");
    for row in layer.cells().chunks(layer.width()) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

pub fn write_snapshot(map: &LayeredMap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "size {} {} {}", map.width(), map.height(), map.resolution());
    let _ = writeln!(out, "classes {}", map.num_classes());
    bits(&mut out, "obstacle", &map.obstacle);
    bits(&mut out, "explored", &map.explored);
    bits(&mut out, "frontier", &map.frontier);
    bits(&mut out, "smap_target", &map.smap_target);
    values(&mut out, "cmap_target", &map.cmap_target);
    values(&mut out, "smap_multi", &map.smap_multi.map(|k| k.0));
    values(&mut out, "cmap_multi", &map.cmap_multi);
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.inner.next().map(|(i, l)| (i + 1, l)).ok_or_else(|| Error::Snapshot("unexpected end of snapshot".into()))
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let (n, l) = self.next()?;
        if l != want {
            return Err(Error::Snapshot(format!("line {n}: expected `{want}`, found `{l}`")));
        }
        Ok(())
    }

    fn field(&mut self, key: &str, arity: usize) -> Result<(usize, Vec<&'a str>)> {
        let (n, l) = self.next()?;
        let mut parts = l.split(' ');
        if parts.next() != Some(key) {
            return Err(Error::Snapshot(format!("line {n}: expected `{key}`")));
        }
        let rest: Vec<&str> = parts.collect();
        if rest.len() != arity {
            return Err(Error::Snapshot(format!("line {n}: `{key}` takes {arity} values")));
        }
        Ok((n, rest))
    }
}

fn num<T: std::str::FromStr>(n: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Snapshot(format!("line {n}: bad number `{s}`")))
}

fn read_bits(lines: &mut Lines<'_>, name: &str, into: &mut GridLayer<bool>) -> Result<()> {
    lines.expect(&format!("layer {name}"))?;
    let w = into.width();
    for y in 0..into.height() {
        let (n, l) = lines.next()?;
        if l.len() != w {
            return Err(Error::Snapshot(format!("line {n}: expected {w} cells")));
        }
        for (x, ch) in l.bytes().enumerate() {
            into.cells_mut()[y * w + x] = match ch {
                b'0' => false,
                b'1' => true,
                _ => return Err(Error::Snapshot(format!("line {n}: bad cell `{}`", ch as char))),
            };
        }
    }
    Ok(())
}

fn read_values<V: std::str::FromStr>(lines: &mut Lines<'_>, name: &str, into: &mut GridLayer<V>) -> Result<()> {
    lines.expect(&format!("layer {name}"))?;
    let w = into.width();
    for y in 0..into.height() {
        let (n, l) = lines.next()?;
        let row: Vec<&str> = l.split(' ').collect();
        if row.len() != w {
            return Err(Error::Snapshot(format!("line {n}: expected {w} cells")));
        }
        for (x, s) in row.into_iter().enumerate() {
            into.cells_mut()[y * w + x] = num(n, s)?;
        }
    }
    Ok(())
}

pub fn parse_snapshot(text: &str) -> Result<LayeredMap> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    lines.expect(MAGIC)?;
    let (n, size) = lines.field("size", 3)?;
    let (w, h, res): (usize, usize, f64) = (num(n, size[0])?, num(n, size[1])?, num(n, size[2])?);
    if w == 0 || h == 0 || !(res > 0.0) {
        return Err(Error::Snapshot(format!("line {n}: invalid size")));
    }
    let (n, classes) = lines.field("classes", 1)?;
    let num_classes: u16 = num(n, classes[0])?;
    let mut map = LayeredMap::new(w, h, res, num_classes);
    read_bits(&mut lines, "obstacle", &mut map.obstacle)?;
    read_bits(&mut lines, "explored", &mut map.explored)?;
    read_bits(&mut lines, "frontier", &mut map.frontier)?;
    read_bits(&mut lines, "smap_target", &mut map.smap_target)?;
    read_values(&mut lines, "cmap_target", &mut map.cmap_target)?;
    let mut ids: GridLayer<u16> = GridLayer::new(w, h, res, 0);
    read_values(&mut lines, "smap_multi", &mut ids)?;
    map.smap_multi = ids.map(|&k| ClassId(k));
    read_values(&mut lines, "cmap_multi", &mut map.cmap_multi)?;
    lines.expect("end")?;
    for &k in ids.cells() {
        if k > num_classes {
            return Err(Error::UnknownClass(k));
        }
    }
    for &c in map.cmap_target.cells().iter().chain(map.cmap_multi.cells()) {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::ConfidenceOutOfRange { name: "snapshot", value: c });
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CellCoord;

    #[test]
    fn round_trip_is_exact() {
        let mut m = LayeredMap::new(4, 3, 0.25, 5);
        m.obstacle.set(CellCoord::new(0, 0), true);
        m.explored.fill(true);
        m.refresh_frontiers();
        m.smap_target.set(CellCoord::new(2, 1), true);
        m.cmap_target.set(CellCoord::new(2, 1), 0.1 + 0.2);
        m.smap_multi.set(CellCoord::new(3, 2), ClassId(5));
        m.cmap_multi.set(CellCoord::new(3, 2), 1.0 / 3.0);
        let text = write_snapshot(&m);
        assert!(text.starts_with("objnav-map v1\nsize 4 3 0.25\nclasses 5\nlayer obstacle\n1000\n"));
        assert_eq!(parse_snapshot(&text).unwrap(), m);
    }

    #[test]
    fn rejects_damage() {
        let m = LayeredMap::new(2, 2, 0.25, 1);
        let text = write_snapshot(&m);
        assert!(parse_snapshot(&text.replace("v1", "v2")).is_err());
        assert!(parse_snapshot(&text.replacen("00\n", "0\n", 1)).is_err());
        assert!(parse_snapshot(&text.replace("end\n", "")).is_err());
        assert!(parse_snapshot(&text.replacen("0 0\n0 0\nlayer smap_multi", "0 2\n0 0\nlayer smap_multi", 1)).is_err());
    }
}
