//! Fan-of-rays sampling over a grid, shared by visibility and value-map filling.

use crate::grid::CellCoord;

/// Grid cell reached from `(x_m, y_m)` after travelling `d_m` meters along `alpha`.
///
/// Positions are in meters with cell `(i, j)` centered at `(i·res, j·res)`;
/// `y` decreases as `sin(alpha)` grows, so rows grow "downward". Each axis is
/// rounded to the nearest cell. The result may lie outside any particular grid.
pub fn polar_to_cell(x_m: f64, y_m: f64, alpha: f64, d_m: f64, resolution: f64) -> CellCoord {
    let x = (x_m + d_m * alpha.cos()) / resolution;
    let y = (y_m - d_m * alpha.sin()) / resolution;
    CellCoord::new(x.round() as i32, y.round() as i32)
}

/// What a ray does at a sampled cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayStep {
    Continue,
    /// Visit this cell, then stop the ray.
    StopAfter,
    /// Stop without visiting this cell.
    StopBefore,
}

#[derive(Debug, Clone, Copy)]
pub struct Fan {
    pub fov_deg: f64,
    pub max_range_m: f64,
    pub angle_step_deg: f64,
    /// Radial sampling step in cell lengths.
    pub radial_step_cells: f64,
}

impl Fan {
    /// Angles (radians) of the rays: evenly spaced, both FOV edges included,
    /// spacing no larger than `angle_step_deg`.
    pub fn angles(&self, heading: f64) -> Vec<f64> {
        let n = (self.fov_deg / self.angle_step_deg).ceil().max(1.0) as usize;
        let half = self.fov_deg.to_radians() / 2.0;
        let step = self.fov_deg.to_radians() / n as f64;
        (0..=n).map(|k| heading - half + step * k as f64).collect()
    }

    /// Marches every ray outward from the pose. `classify` decides whether a
    /// sampled in-bounds cell continues or stops the ray; `visit` receives the
    /// ray angle and each visited cell. A ray also stops when it leaves the grid.
    /// Consecutive samples landing in the same cell are visited once per ray.
    #[allow(clippy::too_many_arguments)]
    pub fn march(
        &self,
        x_m: f64,
        y_m: f64,
        heading: f64,
        resolution: f64,
        dims: (usize, usize),
        mut classify: impl FnMut(CellCoord) -> RayStep,
        mut visit: impl FnMut(f64, CellCoord),
    ) {
        let (w, h) = (dims.0 as i32, dims.1 as i32);
        let step_m = self.radial_step_cells * resolution;
        let samples = (self.max_range_m / step_m + 1e-9).floor() as usize;
        for alpha in self.angles(heading) {
            let mut last: Option<CellCoord> = None;
            for k in 0..=samples {
                let cell = polar_to_cell(x_m, y_m, alpha, step_m * k as f64, resolution);
                if Some(cell) == last {
                    continue;
                }
                last = Some(cell);
                if cell.x < 0 || cell.y < 0 || cell.x >= w || cell.y >= h {
                    break;
                }
                match classify(cell) {
                    RayStep::Continue => visit(alpha, cell),
                    RayStep::StopAfter => {
                        visit(alpha, cell);
                        break;
                    }
                    RayStep::StopBefore => break,
                }
            }
        }
    }
}
