//! Semantic value map: per-cell relevance to the target, filled along the
//! sensor fan with a contraharmonic update and read back smoothed and
//! min-max normalized.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_unit, Result};
use crate::grid::{BitLayer, GridLayer};
use crate::planner::heading_error;
use crate::rays::{Fan, RayStep};
use crate::world::AgentPose;

/// How a view's score is attenuated across the field of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreWeighting {
    /// `s · cos((α − φ) / (fov/2) · π/4)`: 1 on the optical axis, ≈0.707 at the edges.
    #[default]
    Cosine,
    Uniform,
}

pub fn weighted_score(alpha: f64, heading: f64, fov_deg: f64, s: f64, weighting: ScoreWeighting) -> f64 {
    match weighting {
        ScoreWeighting::Uniform => s,
        ScoreWeighting::Cosine => {
            let off = heading_error(heading, alpha).abs() / (fov_deg.to_radians() / 2.0);
            s * (off.min(1.0) * FRAC_PI_4).cos()
        }
    }
}

/// `(v² + s²) / (v + s)`, with `update(0, 0) = 0`.
pub fn update_value_cell(v: f64, s: f64) -> Result<f64> {
    check_non_negative("value", v)?;
    check_non_negative("score", s)?;
    let sum = v + s;
    Ok(if sum == 0.0 { 0.0 } else { (v * v + s * s) / sum })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueMap {
    pub grid: GridLayer<f64>,
    pub d_max_m: f64,
    pub fov_deg: f64,
    pub angle_step_deg: f64,
    pub radial_step_cells: f64,
    pub weighting: ScoreWeighting,
}

impl ValueMap {
    pub fn new(width: usize, height: usize, resolution: f64, d_max_m: f64, fov_deg: f64) -> Self {
        Self {
            grid: GridLayer::new(width, height, resolution, 0.0),
            d_max_m,
            fov_deg,
            angle_step_deg: 1.0,
            radial_step_cells: 0.5,
            weighting: ScoreWeighting::Cosine,
        }
    }

    fn fan(&self) -> Fan {
        Fan {
            fov_deg: self.fov_deg,
            max_range_m: self.d_max_m,
            angle_step_deg: self.angle_step_deg,
            radial_step_cells: self.radial_step_cells,
        }
    }

    /// Updates every cell swept by the fan, rays stopping before the first
    /// obstacle cell. A cell reached by several rays is updated once, with the
    /// largest weighted score among them. Returns the number of cells updated.
    pub fn sector_fill(&mut self, pose: &AgentPose, s: f64, obstacles: &BitLayer) -> Result<usize> {
        check_unit("score", s)?;
        self.grid.same_dims(obstacles)?;
        let w = self.grid.width();
        let mut best: Vec<f64> = vec![f64::NAN; self.grid.len()];
        let (fov, weighting) = (self.fov_deg, self.weighting);
        self.fan().march(
            pose.x,
            pose.y,
            pose.heading,
            self.grid.resolution(),
            self.grid.dims(),
            |c| if obstacles.is_set(c) { RayStep::StopBefore } else { RayStep::Continue },
            |alpha, c| {
                let sw = weighted_score(alpha, pose.heading, fov, s, weighting);
                let slot = &mut best[c.y as usize * w + c.x as usize];
                if slot.is_nan() || sw > *slot {
                    *slot = sw;
                }
            },
        );
        let mut touched = 0;
        for (v, sw) in self.grid.cells_mut().iter_mut().zip(best) {
            if !sw.is_nan() {
                *v = update_value_cell(*v, sw)?;
                touched += 1;
            }
        }
        Ok(touched)
    }

    pub fn smoothed(&self, sigma: f64) -> GridLayer<f64> {
        smooth_and_normalize(&self.grid, sigma)
    }
}

/// Normalized 3×3 Gaussian kernel, row-major.
pub fn gaussian_kernel3(sigma: f64) -> [f64; 9] {
    let mut k = [0.0; 9];
    for (i, w) in k.iter_mut().enumerate() {
        let dx = (i % 3) as f64 - 1.0;
        let dy = (i / 3) as f64 - 1.0;
        *w = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    k
}

/// 3×3 Gaussian blur (replicated border) followed by min-max normalization
/// over the whole grid. A constant map normalizes to all zeros.
pub fn smooth_and_normalize(values: &GridLayer<f64>, sigma: f64) -> GridLayer<f64> {
    let mut out = gaussian_blur3(values, sigma);
    let (lo, hi) = out.cells().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    for v in out.cells_mut() {
        *v = if span > 0.0 { ((*v - lo) / span).clamp(0.0, 1.0) } else { 0.0 };
    }
    out
}

pub fn gaussian_blur3(values: &GridLayer<f64>, sigma: f64) -> GridLayer<f64> {
    let k = gaussian_kernel3(sigma);
    let (w, h) = values.dims();
    let src = values.cells();
    let mut out = values.clone();
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for ky in 0..3 {
                let yy = clamp(y as isize + ky as isize - 1, h);
                for kx in 0..3 {
                    let xx = clamp(x as isize + kx as isize - 1, w);
                    acc += k[ky * 3 + kx] * src[yy * w + xx];
                }
            }
            out.cells_mut()[y * w + x] = acc;
        }
    }
    out
}
