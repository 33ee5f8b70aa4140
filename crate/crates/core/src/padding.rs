//! Border padding for panorama feature maps: circular padding for the
//! equirectangular layout, cube padding and spherical padding for cubemaps.
//!
//! Every face has four borders filled from its neighbours. Source locations
//! are resolved geometrically once per call and then copied (or
//! interpolated) for every channel.

use crate::error::{dims_err, Result};
use crate::feature::{CubeFeatureMap, FeatureMap};
use crate::resample::{tap_at, EdgeMode, Tap};
use crate::sphere::{face_local_ray, face_of, face_rotation, project_to_face, FaceId, Vec3};

/// Pads `p` columns on each side by wrapping around the longitude seam and
/// `p` rows on top and bottom by repeating the nearest row.
pub fn circular_pad(erp: &FeatureMap, p: usize) -> Result<FeatureMap> {
    let (c, h, w) = erp.shape();
    if p > w {
        return dims_err(format!("circular pad {p} exceeds width {w}"));
    }
    let (oh, ow) = (h + 2 * p, w + 2 * p);
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let plane = erp.plane(ch);
        for oy in 0..oh {
            let y = oy.saturating_sub(p).min(h - 1);
            let row = &plane[y * w..(y + 1) * w];
            out.extend_from_slice(&row[w - p..]);
            out.extend_from_slice(row);
            out.extend_from_slice(&row[..p]);
        }
    }
    Ok(FeatureMap::from_parts_unchecked(c, oh, ow, out))
}

fn check_cube_pad(cube: &CubeFeatureMap, p: usize) -> Result<()> {
    if p == 0 || p >= cube.size() {
        return dims_err(format!(
            "cube padding needs 1 <= p < r, got p={p}, r={}",
            cube.size()
        ));
    }
    Ok(())
}

/// Face-local ray through padded pixel `(row, col)` of a face padded by `p`.
fn padded_local_ray(row: usize, col: usize, p: usize, size: usize) -> Vec3 {
    let u = col as f64 - p as f64 + 0.5;
    let v = row as f64 - p as f64 + 0.5;
    face_local_ray(u, v, size as f64)
}

fn is_interior(row: usize, col: usize, p: usize, size: usize) -> bool {
    (p..p + size).contains(&row) && (p..p + size).contains(&col)
}

/// Copies the interior of every face into a zeroed padded buffer.
fn copy_interiors(cube: &CubeFeatureMap, p: usize) -> Vec<f64> {
    let (c, r) = (cube.channels(), cube.size());
    let s = r + 2 * p;
    let mut out = vec![0.0; 6 * c * s * s];
    let src = cube.data();
    for fc in 0..6 * c {
        for y in 0..r {
            let from = (fc * r + y) * r;
            let to = (fc * s + y + p) * s + p;
            out[to..to + r].copy_from_slice(&src[from..from + r]);
        }
    }
    out
}

/// Nearest source pixel `(face, row, col)` for a border pixel under cube
/// padding: the neighbouring face is unfolded flat across the shared edge.
fn unfold_source(face: FaceId, row: usize, col: usize, p: usize, size: usize) -> (FaceId, usize, usize) {
    let h = 0.5 * size as f64;
    let local = padded_local_ray(row, col, p, size);
    let rot = face_rotation(face);
    let mut crossings = Vec::with_capacity(2);
    if local.x.abs() > h {
        crossings.push(rot * Vec3::new(local.x.signum(), 0.0, 0.0));
    }
    if local.y.abs() > h {
        crossings.push(rot * Vec3::new(0.0, local.y.signum(), 0.0));
    }
    // exactly one or two crossings for a border pixel; the axis vectors are
    // exact so face_of is unambiguous
    let neighbour = crossings
        .iter()
        .map(|&a| face_of(a).expect("axis vector"))
        .min_by_key(|g| FaceId::PRIORITY.iter().position(|q| q == g))
        .expect("border pixel crosses at least one edge");

    let world = rot * local;
    let nf = face.look_dir();
    let ng = neighbour.look_dir();
    let overshoot = world.dot(ng) - h;
    let unfolded = world - ng.scale(world.dot(ng)) - nf.scale(world.dot(nf))
        + ng.scale(h)
        + nf.scale(h - overshoot);
    let fp = project_to_face(unfolded, neighbour, size as f64);
    let px = |t: f64| (t.floor().max(0.0) as usize).min(size - 1);
    (neighbour, px(fp.v), px(fp.u))
}

/// Cube padding: each border pixel copies the nearest pixel of the
/// adjacent face, without interpolation.
pub fn cube_pad(cube: &CubeFeatureMap, p: usize) -> Result<CubeFeatureMap> {
    check_cube_pad(cube, p)?;
    let (c, r) = (cube.channels(), cube.size());
    let s = r + 2 * p;
    let mut out = copy_interiors(cube, p);
    let src = cube.data();
    let (src_plane, dst_plane) = (r * r, s * s);
    for face in FaceId::ALL {
        for row in 0..s {
            for col in 0..s {
                if is_interior(row, col, p, r) {
                    continue;
                }
                let (g, sy, sx) = unfold_source(face, row, col, p, r);
                for ch in 0..c {
                    let from = (g.index() * c + ch) * src_plane + sy * r + sx;
                    let to = (face.index() * c + ch) * dst_plane + row * s + col;
                    out[to] = src[from];
                }
            }
        }
    }
    Ok(CubeFeatureMap::from_parts_unchecked(c, s, out))
}

/// Bilinear footprint for a border pixel under spherical padding: the ray
/// through the extended image plane is followed to the face that owns it.
fn reproject_tap(face: FaceId, row: usize, col: usize, p: usize, size: usize) -> (FaceId, Tap) {
    let world = face_rotation(face) * padded_local_ray(row, col, p, size);
    let owner = face_of(world).expect("nonzero ray");
    let fp = project_to_face(world, owner, size as f64);
    (owner, tap_at(fp.u - 0.5, fp.v - 0.5, size, size, EdgeMode::Clamp))
}

/// Spherical padding: border pixels are reprojected through the extended
/// face plane and bilinearly sampled from the owning neighbour face.
pub fn spherical_pad(cube: &CubeFeatureMap, p: usize) -> Result<CubeFeatureMap> {
    check_cube_pad(cube, p)?;
    let (c, r) = (cube.channels(), cube.size());
    let s = r + 2 * p;
    let mut out = copy_interiors(cube, p);
    let src = cube.data();
    let (src_plane, dst_plane) = (r * r, s * s);
    for face in FaceId::ALL {
        for row in 0..s {
            for col in 0..s {
                if is_interior(row, col, p, r) {
                    continue;
                }
                let (g, tap) = reproject_tap(face, row, col, p, r);
                for ch in 0..c {
                    let to = (face.index() * c + ch) * dst_plane + row * s + col;
                    out[to] = tap.eval(src, (g.index() * c + ch) * src_plane);
                }
            }
        }
    }
    Ok(CubeFeatureMap::from_parts_unchecked(c, s, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interior_matches(padded: &CubeFeatureMap, cube: &CubeFeatureMap, p: usize) -> bool {
        let r = cube.size();
        FaceId::ALL.iter().all(|&f| {
            (0..cube.channels()).all(|c| {
                (0..r).all(|y| (0..r).all(|x| padded.get(f, c, y + p, x + p) == cube.get(f, c, y, x)))
            })
        })
    }

    #[test]
    fn circular_examples() {
        let row = FeatureMap::new(1, 1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = circular_pad(&row, 1).unwrap();
        assert_eq!(p.shape(), (1, 3, 6));
        assert_eq!(&p.data()[6..12], &[4.0, 1.0, 2.0, 3.0, 4.0, 1.0]);
        // vertical replicate
        assert_eq!(&p.data()[0..6], &p.data()[6..12]);
        assert_eq!(circular_pad(&row, 0).unwrap(), row);
        assert!(circular_pad(&row, 5).is_err());
        assert_eq!(circular_pad(&row, 4).unwrap().width(), 12);
    }

    #[test]
    fn cube_pad_errors() {
        let cube = CubeFeatureMap::zeros(1, 4);
        assert!(cube_pad(&cube, 0).is_err());
        assert!(cube_pad(&cube, 4).is_err());
        assert!(spherical_pad(&cube, 4).is_err());
        assert_eq!(cube_pad(&cube, 3).unwrap().size(), 10);
    }

    #[test]
    fn padding_keeps_interior_and_constants() {
        let cube = CubeFeatureMap::from_fn(2, 8, |f, c, y, x| (f.index() * 1000 + c * 100 + y * 8 + x) as f64);
        for p in [1, 2, 7] {
            assert!(interior_matches(&cube_pad(&cube, p).unwrap(), &cube, p));
            assert!(interior_matches(&spherical_pad(&cube, p).unwrap(), &cube, p));
        }
        let k = CubeFeatureMap::from_fn(1, 8, |_, _, _, _| 2.5);
        assert!(cube_pad(&k, 3).unwrap().data().iter().all(|&v| v == 2.5));
        assert!(spherical_pad(&k, 3).unwrap().data().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn cube_pad_edge_neighbours() {
        let r = 4;
        let cube = CubeFeatureMap::from_fn(1, r, |f, _, y, x| (f.index() * 100 + y * 10 + x) as f64);
        let p = cube_pad(&cube, 1).unwrap();
        for y in 0..r {
            // F right border = L left column, same row
            assert_eq!(p.get(FaceId::F, 0, y + 1, r + 1), cube.get(FaceId::L, 0, y, 0));
            // F left border = R right column
            assert_eq!(p.get(FaceId::F, 0, y + 1, 0), cube.get(FaceId::R, 0, y, r - 1));
            // B right border = R left column
            assert_eq!(p.get(FaceId::B, 0, y + 1, r + 1), cube.get(FaceId::R, 0, y, 0));
        }
        for x in 0..r {
            // F top border = U bottom row; F bottom border = D top row
            assert_eq!(p.get(FaceId::F, 0, 0, x + 1), cube.get(FaceId::U, 0, r - 1, x));
            assert_eq!(p.get(FaceId::F, 0, r + 1, x + 1), cube.get(FaceId::D, 0, 0, x));
        }
    }
}
