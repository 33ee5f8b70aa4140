//! Precomputed bilinear sampling grids between the equirectangular and
//! cubemap projections.
//!
//! Grids are built once per resolution and applied to any number of
//! channels. Coordinates are stored as `f32` so exported grids re-import
//! bit-exactly.

use crate::error::{dims_err, PanoError, Result};
use crate::feature::{CubeFeatureMap, FeatureMap};
use crate::padding::cube_pad;
use crate::sphere::{angular_to_erp, angular_to_unit, erp_to_angular, face_point_to_sphere,
    sphere_to_face_point, unit_to_angular, FaceId, FacePixel};

/// How out-of-range columns are resolved. Rows always clamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMode {
    Clamp,
    WrapX,
}

/// Seam handling for cube-to-equirectangular sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum C2eBoundary {
    /// Bilinear taps clamp inside the owning face, leaving cracks at seams.
    ClampFace,
    /// Faces are cube-padded by one pixel first so taps cross seams.
    #[default]
    PaddedFace,
}

/// One bilinear footprint: four flat indices and the fractional offsets.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tap {
    pub idx: [usize; 4],
    pub fx: f64,
    pub fy: f64,
}

impl Tap {
    /// Interpolates `src` with offset `base` added to every index.
    #[inline(always)]
    pub fn eval(&self, src: &[f64], base: usize) -> f64 {
        let a = src[base + self.idx[0]];
        let b = src[base + self.idx[1]];
        let c = src[base + self.idx[2]];
        let d = src[base + self.idx[3]];
        let top = a + self.fx * (b - a);
        let bottom = c + self.fx * (d - c);
        top + self.fy * (bottom - top)
    }
}

/// Footprint of `(x, y)` in a `height x width` plane. Integer coordinates
/// are pixel centres.
pub(crate) fn tap_at(x: f64, y: f64, height: usize, width: usize, mode: EdgeMode) -> Tap {
    let yc = y.clamp(0.0, (height - 1) as f64);
    let y0 = yc.floor();
    let fy = yc - y0;
    let y0 = y0 as usize;
    let y1 = (y0 + 1).min(height - 1);

    let (x0, x1, fx) = match mode {
        EdgeMode::Clamp => {
            let xc = x.clamp(0.0, (width - 1) as f64);
            let x0 = xc.floor();
            let fx = xc - x0;
            let x0 = x0 as usize;
            (x0, (x0 + 1).min(width - 1), fx)
        }
        EdgeMode::WrapX => {
            let x0 = x.floor();
            let fx = x - x0;
            let w = width as i64;
            let x0 = x0 as i64;
            (x0.rem_euclid(w) as usize, (x0 + 1).rem_euclid(w) as usize, fx)
        }
    };
    Tap {
        idx: [y0 * width + x0, y0 * width + x1, y1 * width + x0, y1 * width + x1],
        fx,
        fy,
    }
}

/// Bilinear sample of every channel of `img` at `(x, y)`.
pub fn bilinear_sample(img: &FeatureMap, x: f64, y: f64, mode: EdgeMode) -> Result<Vec<f64>> {
    if !x.is_finite() || !y.is_finite() {
        return Err(PanoError::NonFiniteCoordinate { x, y });
    }
    let tap = tap_at(x, y, img.height(), img.width(), mode);
    let plane = img.height() * img.width();
    Ok((0..img.channels()).map(|c| tap.eval(img.data(), c * plane)).collect())
}

fn check_erp_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width != 2 * height {
        return dims_err(format!("equirectangular images need W = 2H, got {height}x{width}"));
    }
    Ok(())
}

fn check_face_size(size: usize) -> Result<()> {
    if size < 2 {
        return dims_err(format!("cube face side must be at least 2, got {size}"));
    }
    Ok(())
}

/// Per-ERP-pixel cube face and in-face coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct C2EGrid {
    height: usize,
    width: usize,
    size: usize,
    faces: Vec<FaceId>,
    u: Vec<f32>,
    v: Vec<f32>,
}

impl C2EGrid {
    /// Reassembles a grid from its planes, e.g. after import.
    pub fn from_parts(
        height: usize,
        width: usize,
        size: usize,
        faces: Vec<FaceId>,
        u: Vec<f32>,
        v: Vec<f32>,
    ) -> Result<Self> {
        check_erp_dims(height, width)?;
        check_face_size(size)?;
        let n = height * width;
        if faces.len() != n || u.len() != n || v.len() != n {
            return dims_err("grid planes must each hold H*W entries");
        }
        let r = size as f32;
        if u.iter().chain(v.iter()).any(|c| !(0.0..=r).contains(c)) {
            return Err(PanoError::InvalidParameter(format!(
                "face coordinates must lie in [0, {size}]"
            )));
        }
        Ok(Self { height, width, size, faces, u, v })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn faces(&self) -> &[FaceId] {
        &self.faces
    }

    pub fn u(&self) -> &[f32] {
        &self.u
    }

    pub fn v(&self) -> &[f32] {
        &self.v
    }

    /// Entry for ERP pixel `(row, col)`.
    pub fn at(&self, row: usize, col: usize) -> (FaceId, f32, f32) {
        let i = row * self.width + col;
        (self.faces[i], self.u[i], self.v[i])
    }

    /// True when the bilinear footprint of this pixel, sampled inside its
    /// own face, would reach past the face border.
    pub fn crosses_seam(&self, row: usize, col: usize) -> bool {
        let (_, u, v) = self.at(row, col);
        let hi = self.size as f32 - 0.5;
        u < 0.5 || u > hi || v < 0.5 || v > hi
    }
}

pub fn build_c2e_grid(height: usize, width: usize, size: usize) -> Result<C2EGrid> {
    check_erp_dims(height, width)?;
    check_face_size(size)?;
    let n = height * width;
    let mut faces = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for i in 0..height {
        for j in 0..width {
            let a = erp_to_angular(j as f64, i as f64, height, width)?;
            let p = sphere_to_face_point(angular_to_unit(a), size as f64)?;
            faces.push(p.face);
            u.push(p.u as f32);
            v.push(p.v as f32);
        }
    }
    Ok(C2EGrid { height, width, size, faces, u, v })
}

/// Samples a cubemap onto the ERP grid.
pub fn apply_c2e(cube: &CubeFeatureMap, grid: &C2EGrid, boundary: C2eBoundary) -> Result<FeatureMap> {
    if cube.size() != grid.size {
        return dims_err(format!(
            "cube side {} does not match grid side {}",
            cube.size(),
            grid.size
        ));
    }
    let padded;
    let (src, side, shift) = match boundary {
        C2eBoundary::ClampFace => (cube, grid.size, -0.5),
        C2eBoundary::PaddedFace => {
            padded = cube_pad(cube, 1)?;
            (&padded, grid.size + 2, 0.5)
        }
    };
    let channels = cube.channels();
    let plane = side * side;
    let taps: Vec<Tap> = (0..grid.faces.len())
        .map(|i| {
            let mut t = tap_at(
                grid.u[i] as f64 + shift,
                grid.v[i] as f64 + shift,
                side,
                side,
                EdgeMode::Clamp,
            );
            let face_base = grid.faces[i].index() * channels * plane;
            for k in &mut t.idx {
                *k += face_base;
            }
            t
        })
        .collect();

    let hw = grid.height * grid.width;
    let mut out = vec![0.0; channels * hw];
    let data = src.data();
    for (c, dst) in out.chunks_exact_mut(hw).enumerate() {
        let base = c * plane;
        for (o, t) in dst.iter_mut().zip(&taps) {
            *o = t.eval(data, base);
        }
    }
    Ok(FeatureMap::from_parts_unchecked(channels, grid.height, grid.width, out))
}

/// Per-cube-pixel fractional ERP coordinates, faces in storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct E2CGrid {
    size: usize,
    height: usize,
    width: usize,
    x: Vec<f32>,
    y: Vec<f32>,
}

impl E2CGrid {
    pub fn from_parts(size: usize, height: usize, width: usize, x: Vec<f32>, y: Vec<f32>) -> Result<Self> {
        check_erp_dims(height, width)?;
        check_face_size(size)?;
        let n = 6 * size * size;
        if x.len() != n || y.len() != n {
            return dims_err("grid planes must each hold 6*r*r entries");
        }
        let (w, h) = (width as f32, (height - 1) as f32);
        if x.iter().any(|c| !(0.0..w).contains(c)) || y.iter().any(|c| !(0.0..=h).contains(c)) {
            return Err(PanoError::InvalidParameter("ERP coordinates out of range".into()));
        }
        Ok(Self { size, height, width, x, y })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn x(&self) -> &[f32] {
        &self.x
    }

    pub fn y(&self) -> &[f32] {
        &self.y
    }

    /// ERP coordinate sampled for cube pixel `(face, row, col)`.
    pub fn at(&self, face: FaceId, row: usize, col: usize) -> (f32, f32) {
        let i = (face.index() * self.size + row) * self.size + col;
        (self.x[i], self.y[i])
    }
}

/// ERP sample coordinate `(x, y)` seen through in-face position `(u, v)`.
pub fn face_to_erp(face: FaceId, u: f64, v: f64, size: usize, height: usize, width: usize) -> Result<(f64, f64)> {
    let ray = face_point_to_sphere(FacePixel { face, u, v, size: size as f64 }, 1.0);
    let a = unit_to_angular(ray)?;
    Ok(angular_to_erp(a, height, width))
}

pub fn build_e2c_grid(size: usize, height: usize, width: usize) -> Result<E2CGrid> {
    check_erp_dims(height, width)?;
    check_face_size(size)?;
    let n = 6 * size * size;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let (wf, hmax) = (width as f64, (height - 1) as f64);
    for face in FaceId::ALL {
        for row in 0..size {
            for col in 0..size {
                let (x, y) = face_to_erp(face, col as f64 + 0.5, row as f64 + 0.5, size, height, width)?;
                let mut xf = x.rem_euclid(wf) as f32;
                if xf >= width as f32 {
                    xf = 0.0;
                }
                xs.push(xf);
                ys.push(y.clamp(0.0, hmax) as f32);
            }
        }
    }
    Ok(E2CGrid { size, height, width, x: xs, y: ys })
}

/// Samples an ERP map onto the six cube faces, wrapping horizontally.
pub fn apply_e2c(erp: &FeatureMap, grid: &E2CGrid) -> Result<CubeFeatureMap> {
    if erp.height() != grid.height || erp.width() != grid.width {
        return dims_err(format!(
            "ERP {}x{} does not match grid {}x{}",
            erp.height(),
            erp.width(),
            grid.height,
            grid.width
        ));
    }
    let channels = erp.channels();
    let plane = grid.height * grid.width;
    let side2 = grid.size * grid.size;
    let taps: Vec<Tap> = grid
        .x
        .iter()
        .zip(&grid.y)
        .map(|(&x, &y)| tap_at(x as f64, y as f64, grid.height, grid.width, EdgeMode::WrapX))
        .collect();
    let mut out = vec![0.0; 6 * channels * side2];
    let src = erp.data();
    for f in 0..6 {
        let face_taps = &taps[f * side2..(f + 1) * side2];
        for c in 0..channels {
            let dst = &mut out[(f * channels + c) * side2..(f * channels + c + 1) * side2];
            for (o, t) in dst.iter_mut().zip(face_taps) {
                *o = t.eval(src, c * plane);
            }
        }
    }
    Ok(CubeFeatureMap::from_parts_unchecked(channels, grid.size, out))
}

/// Horizontal circular shift by `shift` columns (a yaw rotation of the panorama).
pub fn yaw_roll(erp: &FeatureMap, shift: usize) -> FeatureMap {
    let (c, h, w) = erp.shape();
    let s = shift % w;
    let mut out = Vec::with_capacity(erp.data().len());
    for row in erp.data().chunks_exact(w) {
        out.extend_from_slice(&row[w - s..]);
        out.extend_from_slice(&row[..w - s]);
    }
    FeatureMap::from_parts_unchecked(c, h, w, out)
}
