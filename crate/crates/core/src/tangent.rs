//! Distortion-aware sampling locations: a regular `k x k` grid laid on the
//! tangent plane at each ERP pixel, projected back to ERP coordinates.
//!
//! Offsets depend only on the row (longitude shifts are exact column
//! shifts), so the grid stores one set of `k²` offsets per row.

use std::f64::consts::TAU;

use crate::error::{dims_err, PanoError, Result};
use crate::feature::FeatureMap;
use crate::resample::{tap_at, EdgeMode};
use crate::sphere::{angular_to_erp, angular_to_unit, erp_to_angular, unit_to_angular, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct TangentGrid {
    height: usize,
    width: usize,
    k: usize,
    /// `[row][tap] -> (dx, dy)`, taps in row-major order over the kernel.
    offsets: Vec<(f32, f32)>,
}

impl TangentGrid {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn kernel(&self) -> usize {
        self.k
    }

    /// Offsets of the `k²` taps for ERP row `row`.
    pub fn row_offsets(&self, row: usize) -> &[(f32, f32)] {
        let n = self.k * self.k;
        &self.offsets[row * n..(row + 1) * n]
    }

    /// Absolute sample location of tap `t` around pixel `(row, col)`;
    /// `x` is wrapped into `[0, W)`.
    pub fn sample_location(&self, row: usize, col: usize, t: usize) -> (f64, f64) {
        let (dx, dy) = self.row_offsets(row)[t];
        let x = (col as f64 + dx as f64).rem_euclid(self.width as f64);
        (x, row as f64 + dy as f64)
    }

    /// Horizontal extent (max dx - min dx) of the taps at `row`.
    pub fn column_span(&self, row: usize) -> f64 {
        let (lo, hi) = self
            .row_offsets(row)
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &(dx, _)| (lo.min(dx as f64), hi.max(dx as f64)));
        hi - lo
    }
}

pub fn build_tangent_grid(height: usize, width: usize, k: usize) -> Result<TangentGrid> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(PanoError::InvalidParameter(format!(
            "tangent kernel size must be odd and >= 3, got {k}"
        )));
    }
    if height == 0 || width != 2 * height {
        return dims_err(format!("equirectangular images need W = 2H, got {height}x{width}"));
    }
    let half = (k / 2) as i64;
    // plane spacing so that the centre row/column land one pixel apart at the equator
    let step = (TAU / width as f64).tan();
    let mut offsets = Vec::with_capacity(height * k * k);
    let col = 0usize;
    for row in 0..height {
        let a = erp_to_angular(col as f64, row as f64, height, width)?;
        let centre = angular_to_unit(a);
        let (sp, cp) = a.phi().sin_cos();
        let (st, ct) = a.theta().sin_cos();
        let east = Vec3::new(cp, 0.0, -sp);
        let north = Vec3::new(-sp * st, ct, -cp * st);
        let (cx, cy) = angular_to_erp(a, height, width);
        for dr in -half..=half {
            for dc in -half..=half {
                let q = centre + east.scale(dc as f64 * step) - north.scale(dr as f64 * step);
                let b = unit_to_angular(q.normalized()?)?;
                let (x, y) = angular_to_erp(b, height, width);
                let mut dx = (x - cx).rem_euclid(width as f64);
                if dx > width as f64 / 2.0 {
                    dx -= width as f64;
                }
                offsets.push((dx as f32, (y - cy) as f32));
            }
        }
    }
    Ok(TangentGrid { height, width, k, offsets })
}

/// Gathers the `k²` tangent-plane samples of every pixel into channels:
/// output channel `c * k² + t` holds tap `t` of input channel `c`.
pub fn gather_tangent(erp: &FeatureMap, grid: &TangentGrid) -> Result<FeatureMap> {
    let (c, h, w) = erp.shape();
    if h != grid.height || w != grid.width {
        return dims_err(format!(
            "ERP {h}x{w} does not match tangent grid {}x{}",
            grid.height, grid.width
        ));
    }
    let n = grid.k * grid.k;
    let plane = h * w;
    let mut out = vec![0.0; c * n * plane];
    for row in 0..h {
        for col in 0..w {
            for t in 0..n {
                let (x, y) = grid.sample_location(row, col, t);
                let tap = tap_at(x, y, h, w, EdgeMode::WrapX);
                for ch in 0..c {
                    out[(ch * n + t) * plane + row * w + col] = tap.eval(erp.data(), ch * plane);
                }
            }
        }
    }
    Ok(FeatureMap::from_parts_unchecked(c * n, h, w, out))
}
