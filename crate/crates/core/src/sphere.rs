//! Coordinate math between angular positions, points on the sphere and
//! cube-face pixel coordinates.
//!
//! Conventions:
//!
//! - `phi` is longitude in `[0, 2π)`, `theta` is latitude in `[-π/2, π/2]`
//!   with the equator at 0. A direction is `(sin φ cos θ, sin θ, cos φ cos θ)`,
//!   so `+z` is front, `+x` is left and `+y` is up.
//! - Cube faces are 90° perspective views with focal length `r/2`. Inside a
//!   face, `u` grows to the right and `v` grows downward, both in `[0, r]`.
//! - An ERP image of `H x 2H` pixels has pixel `(i, j)` centred on
//!   `φ = 2π(j + 0.5)/W - π` and `θ = π/2 - π(i + 0.5)/H`, which places the
//!   front face at the image centre and the back face on the left/right seam.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{PanoError, Result};

/// Longitude/latitude position on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularCoord {
    phi: f64,
    theta: f64,
}

impl AngularCoord {
    /// Builds a coordinate, reducing `phi` modulo 2π.
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        if !phi.is_finite() || !theta.is_finite() {
            return Err(PanoError::InvalidParameter(format!(
                "angles must be finite, got ({phi}, {theta})"
            )));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&theta) {
            return Err(PanoError::InvalidParameter(format!(
                "latitude {theta} outside [-pi/2, pi/2]"
            )));
        }
        Ok(Self {
            phi: wrap_longitude(phi),
            theta,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

fn wrap_longitude(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(PanoError::ZeroVector);
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

/// Cube face, in the storage order used by every cube tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceId {
    B,
    D,
    F,
    L,
    R,
    U,
}

impl FaceId {
    /// Storage order.
    pub const ALL: [FaceId; 6] = [FaceId::B, FaceId::D, FaceId::F, FaceId::L, FaceId::R, FaceId::U];

    /// Tie-break order used when a direction is equidistant from several faces.
    pub const PRIORITY: [FaceId; 6] = [FaceId::F, FaceId::B, FaceId::L, FaceId::R, FaceId::U, FaceId::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<FaceId> {
        Self::ALL.get(i).copied()
    }

    pub fn letter(self) -> char {
        match self {
            FaceId::B => 'B',
            FaceId::D => 'D',
            FaceId::F => 'F',
            FaceId::L => 'L',
            FaceId::R => 'R',
            FaceId::U => 'U',
        }
    }

    pub fn look_dir(self) -> Vec3 {
        match self {
            FaceId::B => Vec3::new(0.0, 0.0, -1.0),
            FaceId::D => Vec3::new(0.0, -1.0, 0.0),
            FaceId::F => Vec3::new(0.0, 0.0, 1.0),
            FaceId::L => Vec3::new(1.0, 0.0, 0.0),
            FaceId::R => Vec3::new(-1.0, 0.0, 0.0),
            FaceId::U => Vec3::new(0.0, 1.0, 0.0),
        }
    }

    /// Component of `v` along this face's looking direction.
    fn axis_component(self, v: Vec3) -> f64 {
        match self {
            FaceId::B => -v.z,
            FaceId::D => -v.y,
            FaceId::F => v.z,
            FaceId::L => v.x,
            FaceId::R => -v.x,
            FaceId::U => v.y,
        }
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A continuous position inside one cube face of side `size` pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacePixel {
    pub face: FaceId,
    pub u: f64,
    pub v: f64,
    pub size: f64,
}

pub fn angular_to_unit(a: AngularCoord) -> Vec3 {
    let (sp, cp) = a.phi.sin_cos();
    let (st, ct) = a.theta.sin_cos();
    Vec3::new(sp * ct, st, cp * ct)
}

/// Inverse of [`angular_to_unit`]. Longitude is canonicalized to 0 at the poles.
pub fn unit_to_angular(v: Vec3) -> Result<AngularCoord> {
    let n = v.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
        return Err(PanoError::NonUnitVector(n));
    }
    let horiz = v.x.hypot(v.z);
    let theta = v.y.atan2(horiz);
    let phi = if horiz == 0.0 { 0.0 } else { wrap_longitude(v.x.atan2(v.z)) };
    Ok(AngularCoord { phi, theta })
}

/// Face whose looking direction is closest to `v`.
pub fn face_of(v: Vec3) -> Result<FaceId> {
    if v == Vec3::default() || !v.is_finite() {
        return Err(PanoError::ZeroVector);
    }
    let mut best = FaceId::PRIORITY[0];
    let mut best_val = best.axis_component(v);
    for &f in &FaceId::PRIORITY[1..] {
        let c = f.axis_component(v);
        if c > best_val {
            best = f;
            best_val = c;
        }
    }
    Ok(best)
}

/// Rotation taking face-local coordinates to sphere coordinates.
pub fn face_rotation(f: FaceId) -> Mat3 {
    match f {
        FaceId::F => Mat3::IDENTITY,
        // about y
        FaceId::L => Mat3([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]),
        FaceId::R => Mat3([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]),
        FaceId::B => Mat3([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]),
        // about x
        FaceId::U => Mat3([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]]),
        FaceId::D => Mat3([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
    }
}

/// Face-local ray through `(u, v)` on the plane `z = size/2`. Works for
/// positions outside `[0, size]` as well (extended image plane).
pub fn face_local_ray(u: f64, v: f64, size: f64) -> Vec3 {
    let h = 0.5 * size;
    Vec3::new(u - h, h - v, h)
}

/// Point on the sphere of the given radius seen through a face pixel.
pub fn face_point_to_sphere(p: FacePixel, radius: f64) -> Vec3 {
    let local = face_local_ray(p.u, p.v, p.size);
    let world = face_rotation(p.face) * local;
    world.scale(radius / local.norm())
}

/// Projects a direction onto its owning face.
pub fn sphere_to_face_point(v: Vec3, size: f64) -> Result<FacePixel> {
    let face = face_of(v)?;
    Ok(project_to_face(v, face, size))
}

/// Projects `v` onto the (possibly extended) image plane of `face`. The
/// caller guarantees that `v` points into the face's half-space.
pub(crate) fn project_to_face(v: Vec3, face: FaceId, size: f64) -> FacePixel {
    let local = face_rotation(face).transpose() * v;
    let h = 0.5 * size;
    let k = h / local.z;
    FacePixel {
        face,
        u: (local.x * k + h).clamp(0.0, size),
        v: (h - local.y * k).clamp(0.0, size),
        size,
    }
}

/// Angular position of a continuous ERP sample coordinate, where integer
/// `(x, y)` are pixel centres.
pub fn erp_to_angular(x: f64, y: f64, height: usize, width: usize) -> Result<AngularCoord> {
    let phi = TAU * (x + 0.5) / width as f64 - PI;
    let theta = (FRAC_PI_2 - PI * (y + 0.5) / height as f64).clamp(-FRAC_PI_2, FRAC_PI_2);
    AngularCoord::new(phi, theta)
}

/// Continuous ERP sample coordinate of an angular position. `x` lies in
/// `[-0.5, W - 0.5)`; `y` in `[-0.5, H - 0.5]`.
pub fn angular_to_erp(a: AngularCoord, height: usize, width: usize) -> (f64, f64) {
    let mut shifted = a.phi + PI;
    if shifted >= TAU {
        shifted -= TAU;
    }
    let x = shifted * width as f64 / TAU - 0.5;
    let y = (FRAC_PI_2 - a.theta) * height as f64 / PI - 0.5;
    (x, y)
}
