//! Dense channel-major feature arrays.

use crate::error::{dims_err, PanoError, Result};
use crate::sphere::FaceId;

/// `C x H x W` array, channel-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return dims_err(format!("empty feature map {channels}x{height}x{width}"));
        }
        if data.len() != channels * height * width {
            return dims_err(format!(
                "data length {} != {channels}*{height}*{width}",
                data.len()
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(PanoError::InvalidParameter("feature values must be finite".into()));
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f64) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![value; channels * height * width],
        }
    }

    /// Builds a map by evaluating `f(c, y, x)` at every element.
    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self { channels, height, width, data }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    /// Stacks `self` and `other` along the channel axis.
    pub fn concat_channels(&self, other: &FeatureMap) -> Result<FeatureMap> {
        if self.height != other.height || self.width != other.width {
            return dims_err(format!(
                "cannot concatenate {:?} with {:?}",
                self.shape(),
                other.shape()
            ));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(FeatureMap {
            channels: self.channels + other.channels,
            height: self.height,
            width: self.width,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> FeatureMap {
        FeatureMap {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn from_parts_unchecked(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), channels * height * width);
        Self { channels, height, width, data }
    }
}

/// Six square faces of `C x r x r`, stored in [`FaceId::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFeatureMap {
    channels: usize,
    size: usize,
    data: Vec<f64>,
}

impl CubeFeatureMap {
    pub fn new(channels: usize, size: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || size == 0 {
            return dims_err(format!("empty cube map {channels}x{size}x{size}"));
        }
        if data.len() != 6 * channels * size * size {
            return dims_err(format!(
                "data length {} != 6*{channels}*{size}*{size}",
                data.len()
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(PanoError::InvalidParameter("feature values must be finite".into()));
        }
        Ok(Self { channels, size, data })
    }

    pub fn zeros(channels: usize, size: usize) -> Self {
        Self {
            channels,
            size,
            data: vec![0.0; 6 * channels * size * size],
        }
    }

    /// Builds a cube by evaluating `f(face, c, row, col)`.
    pub fn from_fn(
        channels: usize,
        size: usize,
        mut f: impl FnMut(FaceId, usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(6 * channels * size * size);
        for face in FaceId::ALL {
            for c in 0..channels {
                for y in 0..size {
                    for x in 0..size {
                        data.push(f(face, c, y, x));
                    }
                }
            }
        }
        Self { channels, size, data }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, face: FaceId, c: usize, y: usize, x: usize) -> usize {
        ((face.index() * self.channels + c) * self.size + y) * self.size + x
    }

    #[inline]
    pub fn get(&self, face: FaceId, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.index(face, c, y, x)]
    }

    #[inline]
    pub fn set(&mut self, face: FaceId, c: usize, y: usize, x: usize, v: f64) {
        let i = self.index(face, c, y, x);
        self.data[i] = v;
    }

    /// One face as a `C x r x r` map.
    pub fn face(&self, face: FaceId) -> FeatureMap {
        let n = self.channels * self.size * self.size;
        let start = face.index() * n;
        FeatureMap::from_parts_unchecked(
            self.channels,
            self.size,
            self.size,
            self.data[start..start + n].to_vec(),
        )
    }

    /// Assembles a cube from six `C x r x r` faces given in storage order.
    pub fn from_faces(faces: &[FeatureMap]) -> Result<Self> {
        if faces.len() != 6 {
            return dims_err(format!("expected 6 faces, got {}", faces.len()));
        }
        let (c, h, w) = faces[0].shape();
        if h != w {
            return dims_err(format!("faces must be square, got {h}x{w}"));
        }
        let mut data = Vec::with_capacity(6 * c * h * w);
        for f in faces {
            if f.shape() != (c, h, w) {
                return dims_err(format!("face shape {:?} != {:?}", f.shape(), (c, h, w)));
            }
            data.extend_from_slice(f.data());
        }
        Ok(Self { channels: c, size: h, data })
    }

    pub(crate) fn from_parts_unchecked(channels: usize, size: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), 6 * channels * size * size);
        Self { channels, size, data }
    }
}
