//! Independent reference implementations used as test oracles. Nothing
//! here calls the library's projection or convolution code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use pano_core::fusion::{BiProjParams, CeeParams, ConvLayer, SEBlock};
use pano_core::{CubeFeatureMap, FaceId, FeatureMap};

pub type V3 = [f64; 3];

/// Low-order spherical harmonic mix (degree <= 2), a band-limited test signal.
pub fn sh_field(d: V3) -> f64 {
    let [x, y, z] = d;
    0.5 + 0.8 * x + 0.6 * y - 0.4 * z + 0.7 * x * y + 0.5 * (3.0 * z * z - 1.0) + 0.3 * y * z - 0.45 * (x * x - y * y)
}

fn normalize(v: V3) -> V3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Ray of ERP pixel centre `(i, j)`.
pub fn erp_ray(i: usize, j: usize, h: usize, w: usize) -> V3 {
    let phi = TAU * (j as f64 + 0.5) / w as f64 - PI;
    let theta = FRAC_PI_2 - PI * (i as f64 + 0.5) / h as f64;
    [phi.sin() * theta.cos(), theta.sin(), phi.cos() * theta.cos()]
}

/// (forward, right, up) of each face, written out by hand.
pub fn face_frame(f: FaceId) -> (V3, V3, V3) {
    match f {
        FaceId::F => ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        FaceId::L => ([1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]),
        FaceId::B => ([0.0, 0.0, -1.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        FaceId::R => ([-1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]),
        FaceId::U => ([0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]),
        FaceId::D => ([0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
    }
}

/// Unit ray through in-face position `(u, v)`; positions outside `[0, r]`
/// lie on the extended image plane.
pub fn face_ray(f: FaceId, u: f64, v: f64, r: f64) -> V3 {
    let (fw, rt, up) = face_frame(f);
    let h = r / 2.0;
    let (a, b) = (u - h, h - v);
    normalize([
        fw[0] * h + rt[0] * a + up[0] * b,
        fw[1] * h + rt[1] * a + up[1] * b,
        fw[2] * h + rt[2] * a + up[2] * b,
    ])
}

/// Brute-force inverse: owning face by largest axis component (priority
/// F, B, L, R, U, D on ties) and in-face coordinates by plane intersection.
pub fn ray_to_face(d: V3) -> (FaceId, f64, f64) {
    let order = [FaceId::F, FaceId::B, FaceId::L, FaceId::R, FaceId::U, FaceId::D];
    let dot = |a: V3, b: V3| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut best = order[0];
    for &f in &order[1..] {
        if dot(face_frame(f).0, d) > dot(face_frame(best).0, d) {
            best = f;
        }
    }
    let (fw, rt, up) = face_frame(best);
    let t = 1.0 / dot(fw, d);
    let p = [d[0] * t, d[1] * t, d[2] * t];
    // image plane at distance 1 spans [-1, 1]; map to [0, 1] fractions
    (best, (dot(p, rt) + 1.0) / 2.0, (1.0 - dot(p, up)) / 2.0)
}

pub fn render_erp(h: usize, w: usize, f: impl Fn(V3) -> f64) -> FeatureMap {
    FeatureMap::from_fn(1, h, w, |_, i, j| f(erp_ray(i, j, h, w)))
}

pub fn render_cube(r: usize, f: impl Fn(V3) -> f64) -> CubeFeatureMap {
    let rf = r as f64;
    CubeFeatureMap::from_fn(1, r, |face, _, y, x| f(face_ray(face, x as f64 + 0.5, y as f64 + 0.5, rf)))
}

/// Value at every padded pixel of a face padded by `p`, rendered directly
/// through the extended image plane.
pub fn render_extended(r: usize, p: usize, f: impl Fn(V3) -> f64) -> CubeFeatureMap {
    let rf = r as f64;
    let pf = p as f64;
    CubeFeatureMap::from_fn(1, r + 2 * p, |face, _, y, x| {
        f(face_ray(face, x as f64 - pf + 0.5, y as f64 - pf + 0.5, rf))
    })
}

pub fn mean_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn value_range(a: &[f64]) -> f64 {
    let (lo, hi) = a.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    hi - lo
}

/// Mean absolute error over padded border pixels only.
pub fn border_mae(padded: &CubeFeatureMap, oracle: &CubeFeatureMap, p: usize) -> f64 {
    let s = padded.size();
    let r = s - 2 * p;
    let mut sum = 0.0;
    let mut n = 0usize;
    for face in FaceId::ALL {
        for y in 0..s {
            for x in 0..s {
                let inside = (p..p + r).contains(&y) && (p..p + r).contains(&x);
                if !inside {
                    sum += (padded.get(face, 0, y, x) - oracle.get(face, 0, y, x)).abs();
                    n += 1;
                }
            }
        }
    }
    sum / n as f64
}

// ---- nested-loop neural oracles ----

pub fn conv_oracle(x: &FeatureMap, layer: &ConvLayer) -> FeatureMap {
    let (cin, h, w) = x.shape();
    let k = layer.kernel() as isize;
    let p = layer.padding() as isize;
    let oh = h as isize + 2 * p - k + 1;
    let ow = w as isize + 2 * p - k + 1;
    FeatureMap::from_fn(layer.out_channels(), oh as usize, ow as usize, |o, oy, ox| {
        let mut acc = layer.bias().map_or(0.0, |b| b[o]);
        for i in 0..cin {
            for ky in 0..k {
                for kx in 0..k {
                    let sy = oy as isize + ky - p;
                    let sx = ox as isize + kx - p;
                    if sy < 0 || sx < 0 || sy >= h as isize || sx >= w as isize {
                        continue;
                    }
                    acc += layer.weight(o, i, ky as usize, kx as usize) * x.get(i, sy as usize, sx as usize);
                }
            }
        }
        acc
    })
}

fn sig(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn relu_map(x: &FeatureMap) -> FeatureMap {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

pub fn se_gates_oracle(x: &FeatureMap, se: &SEBlock) -> Vec<f64> {
    let (c, h, w) = x.shape();
    let hidden = se.hidden();
    let mut pooled = vec![0.0; c];
    for (ch, p) in pooled.iter_mut().enumerate() {
        for y in 0..h {
            for xx in 0..w {
                *p += x.get(ch, y, xx);
            }
        }
        *p /= (h * w) as f64;
    }
    let mut z = vec![0.0; hidden];
    for j in 0..hidden {
        let mut acc = se.squeeze_b[j];
        for ch in 0..c {
            acc += se.squeeze_w[j * c + ch] * pooled[ch];
        }
        z[j] = acc.max(0.0);
    }
    (0..c)
        .map(|ch| {
            let mut acc = se.excite_b[ch];
            for j in 0..hidden {
                acc += se.excite_w[ch * hidden + j] * z[j];
            }
            sig(acc)
        })
        .collect()
}

pub fn se_oracle(x: &FeatureMap, se: &SEBlock) -> FeatureMap {
    let g = se_gates_oracle(x, se);
    let (c, h, w) = x.shape();
    FeatureMap::from_fn(c, h, w, |ch, y, xx| x.get(ch, y, xx) * g[ch])
}

fn cat(a: &FeatureMap, b: &FeatureMap) -> FeatureMap {
    let (ca, h, w) = a.shape();
    FeatureMap::from_fn(ca + b.channels(), h, w, |c, y, x| if c < ca { a.get(c, y, x) } else { b.get(c - ca, y, x) })
}

pub fn biproj_oracle(fe: &FeatureMap, fc: &FeatureMap, p: &BiProjParams) -> FeatureMap {
    let ee = relu_map(&conv_oracle(fe, &p.equi_encoder));
    let ec = relu_map(&conv_oracle(fc, &p.c2e_encoder));
    let m = conv_oracle(&cat(&ee, &ec), &p.mask);
    let (c, h, w) = fe.shape();
    FeatureMap::from_fn(c, h, w, |ch, y, x| fe.get(ch, y, x) + sig(m.get(0, y, x)) * ec.get(ch, y, x))
}

pub fn cee_oracle(fe: &FeatureMap, fc: &FeatureMap, p: &CeeParams) -> FeatureMap {
    let res = conv_oracle(&relu_map(&conv_oracle(&cat(fe, fc), &p.squeeze)), &p.residual);
    let (c, h, w) = fc.shape();
    let refined = FeatureMap::from_fn(c, h, w, |ch, y, x| fc.get(ch, y, x) + res.get(ch, y, x));
    conv_oracle(&se_oracle(&cat(fe, &refined), &p.se), &p.fuse)
}

pub fn concat_oracle(fe: &FeatureMap, fc: &FeatureMap, reduce: &ConvLayer) -> FeatureMap {
    conv_oracle(&cat(fe, fc), reduce)
}
