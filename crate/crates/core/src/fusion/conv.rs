use rand::Rng;

use crate::error::{PanoError, Result};
use crate::feature::FeatureMap;

/// Square-kernel 2D convolution (cross-correlation), stride 1, zero padding.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    padding: usize,
    /// `out x in x k x k`
    weights: Vec<f64>,
    bias: Option<Vec<f64>>,
}

impl ConvLayer {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        padding: usize,
        weights: Vec<f64>,
        bias: Option<Vec<f64>>,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kernel == 0 {
            return Err(PanoError::InvalidParameter("conv layer sizes must be nonzero".into()));
        }
        let want = out_channels * in_channels * kernel * kernel;
        if weights.len() != want {
            return Err(PanoError::InvalidParameter(format!(
                "conv weights: expected {want} values, got {}",
                weights.len()
            )));
        }
        if let Some(b) = &bias {
            if b.len() != out_channels {
                return Err(PanoError::InvalidParameter(format!(
                    "conv bias: expected {out_channels} values, got {}",
                    b.len()
                )));
            }
        }
        Ok(Self { in_channels, out_channels, kernel, padding, weights, bias })
    }

    /// All-zero layer with "same" padding.
    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize, with_bias: bool) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel,
            padding: kernel / 2,
            weights: vec![0.0; out_channels * in_channels * kernel * kernel],
            bias: with_bias.then(|| vec![0.0; out_channels]),
        }
    }

    /// Weights and biases uniform in `±1/sqrt(fan_in)`, "same" padding.
    pub fn random(in_channels: usize, out_channels: usize, kernel: usize, with_bias: bool, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / ((in_channels * kernel * kernel) as f64).sqrt();
        let mut layer = Self::zeros(in_channels, out_channels, kernel, with_bias);
        for w in &mut layer.weights {
            *w = rng.gen_range(-bound..bound);
        }
        if let Some(b) = &mut layer.bias {
            for v in b {
                *v = rng.gen_range(-bound..bound);
            }
        }
        layer
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> Option<&[f64]> {
        self.bias.as_deref()
    }

    pub fn bias_mut(&mut self) -> Option<&mut [f64]> {
        self.bias.as_deref_mut()
    }

    #[inline]
    pub fn weight(&self, o: usize, i: usize, ky: usize, kx: usize) -> f64 {
        self.weights[((o * self.in_channels + i) * self.kernel + ky) * self.kernel + kx]
    }

    pub fn set_weight(&mut self, o: usize, i: usize, ky: usize, kx: usize, v: f64) {
        let k = self.kernel;
        self.weights[((o * self.in_channels + i) * k + ky) * k + kx] = v;
    }

    pub fn weight_count(&self) -> usize {
        self.weights.len()
    }

    pub fn bias_count(&self) -> usize {
        self.bias.as_ref().map_or(0, Vec::len)
    }
}

pub fn conv2d(x: &FeatureMap, layer: &ConvLayer) -> Result<FeatureMap> {
    if x.channels() != layer.in_channels {
        return Err(PanoError::ChannelMismatch {
            expected: layer.in_channels,
            got: x.channels(),
        });
    }
    let (h, w) = (x.height(), x.width());
    let (k, p) = (layer.kernel, layer.padding);
    if h + 2 * p < k || w + 2 * p < k {
        return Err(PanoError::InvalidDimensions(format!(
            "{h}x{w} input too small for a {k}x{k} kernel with padding {p}"
        )));
    }
    let (oh, ow) = (h + 2 * p + 1 - k, w + 2 * p + 1 - k);
    let mut out = vec![0.0; layer.out_channels * oh * ow];
    for (o, dst) in out.chunks_exact_mut(oh * ow).enumerate() {
        if let Some(b) = &layer.bias {
            dst.fill(b[o]);
        }
        for i in 0..layer.in_channels {
            let src = x.plane(i);
            for ky in 0..k {
                for kx in 0..k {
                    let wv = layer.weight(o, i, ky, kx);
                    if wv == 0.0 {
                        continue;
                    }
                    // output rows/cols whose tap (ky, kx) lands inside the input
                    let y_lo = p.saturating_sub(ky);
                    let y_hi = (h + p).saturating_sub(ky).min(oh);
                    let x_lo = p.saturating_sub(kx);
                    let x_hi = (w + p).saturating_sub(kx).min(ow);
                    for oy in y_lo..y_hi {
                        let sy = oy + ky - p;
                        let srow = &src[sy * w..(sy + 1) * w];
                        let drow = &mut dst[oy * ow..(oy + 1) * ow];
                        for ox in x_lo..x_hi {
                            drow[ox] += wv * srow[ox + kx - p];
                        }
                    }
                }
            }
        }
    }
    Ok(FeatureMap::from_parts_unchecked(layer.out_channels, oh, ow, out))
}

pub(crate) fn relu(x: &FeatureMap) -> FeatureMap {
    x.map(|v| v.max(0.0))
}

/// Logistic function, kept strictly inside `(0, 1)` even when saturated.
pub(crate) fn sigmoid(v: f64) -> f64 {
    const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
    (1.0 / (1.0 + (-v).exp())).clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_1x1() {
        let mut layer = ConvLayer::zeros(3, 3, 1, false);
        for c in 0..3 {
            layer.set_weight(c, c, 0, 0, 1.0);
        }
        let x = FeatureMap::from_fn(3, 4, 5, |c, y, x| (c * 20 + y * 5 + x) as f64 - 7.0);
        assert_eq!(conv2d(&x, &layer).unwrap(), x);
    }

    #[test]
    fn ones_kernel_spreads_one_hot() {
        let mut layer = ConvLayer::zeros(1, 1, 3, false);
        layer.weights_mut().fill(1.0);
        let x = FeatureMap::from_fn(1, 5, 5, |_, y, x| if (y, x) == (2, 2) { 1.0 } else { 0.0 });
        let out = conv2d(&x, &layer).unwrap();
        for y in 0..5 {
            for x in 0..5 {
                let inside = (1..=3).contains(&y) && (1..=3).contains(&x);
                assert_eq!(out.get(0, y, x), if inside { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn errors_and_shapes() {
        let layer = ConvLayer::zeros(2, 4, 3, true);
        assert!(matches!(
            conv2d(&FeatureMap::zeros(3, 4, 4), &layer),
            Err(PanoError::ChannelMismatch { expected: 2, got: 3 })
        ));
        assert_eq!(conv2d(&FeatureMap::zeros(2, 4, 6), &layer).unwrap().shape(), (4, 4, 6));
        let valid = ConvLayer::new(1, 1, 3, 0, vec![1.0; 9], None).unwrap();
        assert_eq!(conv2d(&FeatureMap::zeros(1, 4, 6), &valid).unwrap().shape(), (1, 2, 4));
        assert!(conv2d(&FeatureMap::zeros(1, 2, 6), &valid).is_err());
        assert!(ConvLayer::new(1, 1, 3, 1, vec![1.0; 8], None).is_err());
        assert!(ConvLayer::new(1, 2, 1, 0, vec![1.0; 2], Some(vec![0.0])).is_err());
    }
}
