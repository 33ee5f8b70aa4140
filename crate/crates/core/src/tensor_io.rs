//! `PNF1` tensor container: a 4-byte magic, a little-endian `u32` rank, one
//! little-endian `u32` per dimension, then the row-major payload as
//! little-endian `f32`. Cube tensors lead with a dimension of 6 in
//! B, D, F, L, R, U order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{PanoError, Result};
use crate::feature::{CubeFeatureMap, FeatureMap};
use crate::resample::{C2EGrid, E2CGrid};
use crate::sphere::FaceId;
use crate::tangent::TangentGrid;

pub const MAGIC: &[u8; 4] = b"PNF1";
pub const MAX_RANK: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

fn container_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(PanoError::Container(msg.into()))
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_RANK {
            return container_err(format!("rank {} not in 1..={MAX_RANK}", dims.len()));
        }
        if dims.iter().any(|&d| d > u32::MAX as usize) {
            return container_err("dimension does not fit in u32");
        }
        let n: usize = dims.iter().product();
        if n != data.len() {
            return container_err(format!("dims {dims:?} hold {n} values, payload has {}", data.len()));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.dims.len() as u32).to_le_bytes())?;
        for &d in &self.dims {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(8 + 4 * self.dims.len() + 4 * self.data.len());
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        if &word != MAGIC {
            return container_err(format!("bad magic {word:?}"));
        }
        r.read_exact(&mut word)?;
        let rank = u32::from_le_bytes(word) as usize;
        if rank == 0 || rank > MAX_RANK {
            return container_err(format!("rank {rank} not in 1..={MAX_RANK}"));
        }
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            r.read_exact(&mut word)?;
            dims.push(u32::from_le_bytes(word) as usize);
        }
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| PanoError::Container("element count overflows".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != n * 4 {
            return container_err(format!("expected {} payload bytes, found {}", n * 4, bytes.len()));
        }
        let data = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        Ok(Self { dims, data })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn to_f32(data: &[f64]) -> Vec<f32> {
    data.iter().map(|&v| v as f32).collect()
}

fn to_f64(data: &[f32]) -> Vec<f64> {
    data.iter().map(|&v| v as f64).collect()
}

impl From<&FeatureMap> for Tensor {
    fn from(m: &FeatureMap) -> Self {
        let (c, h, w) = m.shape();
        Tensor { dims: vec![c, h, w], data: to_f32(m.data()) }
    }
}

impl From<&CubeFeatureMap> for Tensor {
    fn from(m: &CubeFeatureMap) -> Self {
        let (c, r) = (m.channels(), m.size());
        Tensor { dims: vec![6, c, r, r], data: to_f32(m.data()) }
    }
}

impl TryFrom<&Tensor> for FeatureMap {
    type Error = PanoError;

    fn try_from(t: &Tensor) -> Result<Self> {
        match *t.dims() {
            [c, h, w] => FeatureMap::new(c, h, w, to_f64(&t.data)),
            [h, w] => FeatureMap::new(1, h, w, to_f64(&t.data)),
            _ => container_err(format!("expected a [C,H,W] tensor, got {:?}", t.dims())),
        }
    }
}

impl TryFrom<&Tensor> for CubeFeatureMap {
    type Error = PanoError;

    fn try_from(t: &Tensor) -> Result<Self> {
        match *t.dims() {
            [6, c, r, r2] if r == r2 => CubeFeatureMap::new(c, r, to_f64(&t.data)),
            _ => container_err(format!("expected a [6,C,r,r] tensor, got {:?}", t.dims())),
        }
    }
}

/// `[3, H, W]`: face index plane, `u` plane, `v` plane.
pub fn c2e_grid_to_tensor(g: &C2EGrid) -> Tensor {
    let mut data: Vec<f32> = g.faces().iter().map(|f| f.index() as f32).collect();
    data.extend_from_slice(g.u());
    data.extend_from_slice(g.v());
    Tensor { dims: vec![3, g.height(), g.width()], data }
}

/// Inverse of [`c2e_grid_to_tensor`]; the face side is not stored and must be supplied.
pub fn c2e_grid_from_tensor(t: &Tensor, size: usize) -> Result<C2EGrid> {
    let [3, h, w] = *t.dims() else {
        return container_err(format!("expected a [3,H,W] grid, got {:?}", t.dims()));
    };
    let n = h * w;
    let faces = t.data[..n]
        .iter()
        .map(|&f| {
            let i = f as usize;
            if f.fract() != 0.0 || f < 0.0 {
                return container_err(format!("bad face index {f}"));
            }
            FaceId::from_index(i).ok_or_else(|| PanoError::Container(format!("bad face index {f}")))
        })
        .collect::<Result<Vec<_>>>()?;
    C2EGrid::from_parts(h, w, size, faces, t.data[n..2 * n].to_vec(), t.data[2 * n..].to_vec())
}

/// `[6, 2, r, r]`: per face, an `x` plane then a `y` plane.
pub fn e2c_grid_to_tensor(g: &E2CGrid) -> Tensor {
    let r2 = g.size() * g.size();
    let mut data = Vec::with_capacity(12 * r2);
    for f in 0..6 {
        data.extend_from_slice(&g.x()[f * r2..(f + 1) * r2]);
        data.extend_from_slice(&g.y()[f * r2..(f + 1) * r2]);
    }
    Tensor { dims: vec![6, 2, g.size(), g.size()], data }
}

/// Inverse of [`e2c_grid_to_tensor`]; ERP height must be supplied (width is `2H`).
pub fn e2c_grid_from_tensor(t: &Tensor, height: usize) -> Result<E2CGrid> {
    let [6, 2, r, r2] = *t.dims() else {
        return container_err(format!("expected a [6,2,r,r] grid, got {:?}", t.dims()));
    };
    if r != r2 {
        return container_err("grid faces must be square");
    }
    let n = r * r;
    let mut x = Vec::with_capacity(6 * n);
    let mut y = Vec::with_capacity(6 * n);
    for f in 0..6 {
        let base = f * 2 * n;
        x.extend_from_slice(&t.data[base..base + n]);
        y.extend_from_slice(&t.data[base + n..base + 2 * n]);
    }
    E2CGrid::from_parts(r, height, 2 * height, x, y)
}

/// `[k², 2, H, W]`: per tap, a `dx` plane then a `dy` plane, relative to the pixel.
pub fn tangent_grid_to_tensor(g: &TangentGrid) -> Tensor {
    let (h, w, n) = (g.height(), g.width(), g.kernel() * g.kernel());
    let mut data = Vec::with_capacity(n * 2 * h * w);
    for t in 0..n {
        for comp in 0..2 {
            for row in 0..h {
                let (dx, dy) = g.row_offsets(row)[t];
                let v = if comp == 0 { dx } else { dy };
                data.extend(std::iter::repeat_n(v, w));
            }
        }
    }
    Tensor { dims: vec![n, 2, h, w], data }
}
