//! Binary PGM (P5) export of map layers.

use std::path::Path;

use crate::error::Result;
use crate::grid::{CellCoord, ClassId, GridLayer};
use crate::layered_map::LayeredMap;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Gray {
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm())?;
        Ok(())
    }

    /// Parses a P5 image with maxval 255 and single-space/newline separators.
    pub fn from_pgm(bytes: &[u8]) -> Option<Self> {
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
        }
        pos += 1;
        if fields[0] != "P5" || fields[3] != "255" {
            return None;
        }
        let (width, height): (usize, usize) = (fields[1].parse().ok()?, fields[2].parse().ok()?);
        let pixels = bytes.get(pos..)?.to_vec();
        (pixels.len() == width * height).then_some(Self { width, height, pixels })
    }
}

fn from_fn<V>(layer: &GridLayer<V>, f: impl Fn(&V) -> u8) -> Gray {
    Gray { width: layer.width(), height: layer.height(), pixels: layer.cells().iter().map(f).collect() }
}

/// Values in `[0, 1]` mapped linearly to `0..=255`.
pub fn unit_layer(layer: &GridLayer<f64>) -> Gray {
    from_fn(layer, |&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
}

/// Non-negative values scaled by the layer maximum; brighter is closer to 0.
pub fn distance_layer(layer: &GridLayer<f64>) -> Gray {
    let max = layer.cells().iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    from_fn(layer, |&v| if max > 0.0 { (255.0 * (1.0 - (v / max).min(1.0))).round() as u8 } else { 255 })
}

/// Class ids spread evenly over `1..=255`; 0 stays black.
pub fn class_layer(layer: &GridLayer<ClassId>, num_classes: u16) -> Gray {
    let n = u32::from(num_classes.max(1));
    from_fn(layer, |k| if k.is_empty() { 0 } else { (u32::from(k.0).min(n) * 255 / n) as u8 })
}

/// Occupancy view: unexplored 0, obstacle 64, explored free 128, frontier 176.
/// Values above 176 are left for stamps.
pub fn occupancy_layer(map: &LayeredMap) -> Gray {
    let o = map.obstacle.cells();
    let e = map.explored.cells();
    let f = map.frontier.cells();
    Gray {
        width: map.width(),
        height: map.height(),
        pixels: (0..o.len())
            .map(|i| match (o[i], e[i], f[i]) {
                (true, _, _) => 64,
                (_, _, true) => 176,
                (_, true, _) => 128,
                _ => 0,
            })
            .collect(),
    }
}

/// Marks cells (agent, goal, path) at a fixed intensity.
pub fn stamp(img: &mut Gray, cells: &[CellCoord], value: u8) {
    for c in cells {
        if c.x >= 0 && c.y >= 0 && (c.x as usize) < img.width && (c.y as usize) < img.height {
            img.pixels[c.y as usize * img.width + c.x as usize] = value;
        }
    }
}
