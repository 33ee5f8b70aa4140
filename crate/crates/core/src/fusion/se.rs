use rand::Rng;

use crate::error::{PanoError, Result};
use crate::feature::FeatureMap;

use super::conv::sigmoid;

/// Bottleneck width divisor of the squeeze-and-excitation block.
pub const SE_REDUCTION: usize = 16;

/// Squeeze-and-excitation channel attention: global average pool, a
/// `C -> C/16` dense layer with ReLU, a `C/16 -> C` dense layer with a
/// sigmoid, then per-channel rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct SEBlock {
    channels: usize,
    hidden: usize,
    /// `hidden x channels`
    pub squeeze_w: Vec<f64>,
    pub squeeze_b: Vec<f64>,
    /// `channels x hidden`
    pub excite_w: Vec<f64>,
    pub excite_b: Vec<f64>,
}

impl SEBlock {
    pub fn zeros(channels: usize) -> Result<Self> {
        Self::zeros_with_reduction(channels, SE_REDUCTION)
    }

    /// Zero block with a non-default bottleneck divisor.
    pub fn zeros_with_reduction(channels: usize, reduction: usize) -> Result<Self> {
        if channels == 0 || reduction == 0 || !channels.is_multiple_of(reduction) || channels < reduction {
            return Err(PanoError::InvalidParameter(format!(
                "SE channels must be a positive multiple of {reduction}, got {channels}"
            )));
        }
        let hidden = channels / reduction;
        Ok(Self {
            channels,
            hidden,
            squeeze_w: vec![0.0; hidden * channels],
            squeeze_b: vec![0.0; hidden],
            excite_w: vec![0.0; channels * hidden],
            excite_b: vec![0.0; channels],
        })
    }

    pub fn random(channels: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut se = Self::zeros(channels)?;
        let hidden = se.hidden();
        let b1 = 1.0 / (channels as f64).sqrt();
        let b2 = 1.0 / (hidden as f64).sqrt();
        for v in se.squeeze_w.iter_mut().chain(se.squeeze_b.iter_mut()) {
            *v = rng.gen_range(-b1..b1);
        }
        for v in se.excite_w.iter_mut().chain(se.excite_b.iter_mut()) {
            *v = rng.gen_range(-b2..b2);
        }
        Ok(se)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn weight_count(&self) -> usize {
        self.squeeze_w.len() + self.excite_w.len()
    }

    pub fn bias_count(&self) -> usize {
        self.squeeze_b.len() + self.excite_b.len()
    }

    /// Per-channel gates in `(0, 1)`.
    pub fn gates(&self, x: &FeatureMap) -> Result<Vec<f64>> {
        if x.channels() != self.channels {
            return Err(PanoError::ChannelMismatch {
                expected: self.channels,
                got: x.channels(),
            });
        }
        let n = (x.height() * x.width()) as f64;
        let pooled: Vec<f64> = (0..self.channels)
            .map(|c| x.plane(c).iter().sum::<f64>() / n)
            .collect();
        let hidden: Vec<f64> = self
            .squeeze_w
            .chunks_exact(self.channels)
            .zip(&self.squeeze_b)
            .map(|(row, b)| (b + dot(row, &pooled)).max(0.0))
            .collect();
        Ok(self
            .excite_w
            .chunks_exact(self.hidden())
            .zip(&self.excite_b)
            .map(|(row, b)| sigmoid(b + dot(row, &hidden)))
            .collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn scale_channels(x: &FeatureMap, gates: &[f64]) -> FeatureMap {
    let plane = x.height() * x.width();
    let mut out = x.clone();
    for (chunk, g) in out.data_mut().chunks_exact_mut(plane).zip(gates) {
        for v in chunk {
            *v *= g;
        }
    }
    out
}

pub fn se_forward(x: &FeatureMap, se: &SEBlock) -> Result<FeatureMap> {
    let gates = se.gates(x)?;
    Ok(scale_channels(x, &gates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_block_halves_input() {
        let se = SEBlock::zeros(32).unwrap();
        let x = FeatureMap::from_fn(32, 3, 4, |c, y, x| (c + y * x) as f64 - 5.0);
        let out = se_forward(&x, &se).unwrap();
        assert_eq!(out, x.map(|v| v / 2.0));
    }

    #[test]
    fn gates_stay_open_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let se = SEBlock::random(16, &mut rng).unwrap();
        let x = FeatureMap::from_fn(16, 2, 2, |c, y, x| (c as f64 - 8.0) * (1.0 + y as f64 + x as f64));
        for g in se.gates(&x).unwrap() {
            assert!(g > 0.0 && g < 1.0);
        }
    }

    #[test]
    fn gate_matches_scalar_hand_computation() {
        // 2 channels, reduction 2 -> one hidden unit
        let mut se = SEBlock::zeros_with_reduction(2, 2).unwrap();
        se.squeeze_w.copy_from_slice(&[0.5, -0.25]);
        se.squeeze_b[0] = 0.1;
        se.excite_w.copy_from_slice(&[2.0, -1.0]);
        se.excite_b.copy_from_slice(&[0.0, 0.3]);
        let x = FeatureMap::new(2, 1, 1, vec![1.0, 2.0]).unwrap();
        // hidden = relu(0.5*1 - 0.25*2 + 0.1) = 0.1
        let g = se.gates(&x).unwrap();
        let want0 = 1.0 / (1.0 + (-0.2f64).exp());
        let want1 = 1.0 / (1.0 + (-(0.3f64 - 0.1)).exp());
        assert!((g[0] - want0).abs() < 1e-9);
        assert!((g[1] - want1).abs() < 1e-9);
        let out = se_forward(&x, &se).unwrap();
        assert!((out.data()[1] - 2.0 * want1).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_channels() {
        assert!(SEBlock::zeros(24).is_err());
        let se = SEBlock::zeros(16).unwrap();
        assert!(se_forward(&FeatureMap::zeros(32, 1, 1), &se).is_err());
    }
}
