//! Forward passes of the equirectangular/cubemap feature fusion modules.
//!
//! All three modules take an ERP feature map and a cubemap feature map that
//! has already been resampled to ERP (both `C x H x W`) and return a fused
//! `C x H x W` map:
//!
//! - **Concat**: channel concatenation followed by a bias-free 1x1 conv `2C -> C`.
//! - **BiProj**: a sigmoid mask computed from both branches gates the
//!   encoded cubemap branch, which is added to the ERP branch.
//! - **CEE**: a residual block refines the cubemap branch, the refined
//!   concatenation is recalibrated by a squeeze-and-excitation block, and a
//!   1x1 conv reduces it back to `C` channels.

mod conv;
mod se;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use conv::{conv2d, ConvLayer};
pub use se::{se_forward, SEBlock, SE_REDUCTION};

use crate::error::{dims_err, PanoError, Result};
use crate::feature::{CubeFeatureMap, FeatureMap};
use crate::resample::{apply_c2e, C2EGrid, C2eBoundary};
use conv::{relu, sigmoid};
use se::scale_channels;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionVariant {
    Concat,
    BiProj,
    Cee,
}

impl FusionVariant {
    pub const ALL: [FusionVariant; 3] = [FusionVariant::Concat, FusionVariant::BiProj, FusionVariant::Cee];

    pub fn name(self) -> &'static str {
        match self {
            FusionVariant::Concat => "concat",
            FusionVariant::BiProj => "biproj",
            FusionVariant::Cee => "cee",
        }
    }
}

impl fmt::Display for FusionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionVariant {
    type Err = PanoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "concat" => Ok(FusionVariant::Concat),
            "biproj" | "bi-projection" => Ok(FusionVariant::BiProj),
            "cee" => Ok(FusionVariant::Cee),
            other => Err(PanoError::InvalidParameter(format!("unknown fusion module '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcatParams {
    /// 1x1, `2C -> C`, no bias.
    pub reduce: ConvLayer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiProjParams {
    /// 3x3, `C -> C`.
    pub equi_encoder: ConvLayer,
    /// 3x3, `C -> C`.
    pub c2e_encoder: ConvLayer,
    /// 1x1, `2C -> 1`.
    pub mask: ConvLayer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CeeParams {
    /// 1x1, `2C -> C`.
    pub squeeze: ConvLayer,
    /// 3x3, `C -> C`.
    pub residual: ConvLayer,
    /// Over `2C` channels.
    pub se: SEBlock,
    /// 1x1, `2C -> C`.
    pub fuse: ConvLayer,
}

/// Weight and bias totals of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamCount {
    pub weights: usize,
    pub biases: usize,
}

impl ParamCount {
    pub fn total(&self) -> usize {
        self.weights + self.biases
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FusionParams {
    Concat(ConcatParams),
    BiProj(BiProjParams),
    Cee(CeeParams),
}

fn check_channels(variant: FusionVariant, channels: usize) -> Result<()> {
    if channels == 0 {
        return Err(PanoError::InvalidParameter("channel count must be positive".into()));
    }
    if variant == FusionVariant::Cee && !channels.is_multiple_of(8) {
        return Err(PanoError::InvalidParameter(format!(
            "CEE needs C divisible by 8 (SE over 2C with reduction {SE_REDUCTION}), got {channels}"
        )));
    }
    Ok(())
}

impl FusionParams {
    /// All-zero parameters for `channels` feature channels.
    pub fn zeros(variant: FusionVariant, channels: usize) -> Result<Self> {
        check_channels(variant, channels)?;
        let c = channels;
        Ok(match variant {
            FusionVariant::Concat => FusionParams::Concat(ConcatParams {
                reduce: ConvLayer::zeros(2 * c, c, 1, false),
            }),
            FusionVariant::BiProj => FusionParams::BiProj(BiProjParams {
                equi_encoder: ConvLayer::zeros(c, c, 3, true),
                c2e_encoder: ConvLayer::zeros(c, c, 3, true),
                mask: ConvLayer::zeros(2 * c, 1, 1, true),
            }),
            FusionVariant::Cee => FusionParams::Cee(CeeParams {
                squeeze: ConvLayer::zeros(2 * c, c, 1, true),
                residual: ConvLayer::zeros(c, c, 3, true),
                se: SEBlock::zeros(2 * c)?,
                fuse: ConvLayer::zeros(2 * c, c, 1, true),
            }),
        })
    }

    /// Parameters drawn uniformly in `±1/sqrt(fan_in)` from a seeded generator.
    pub fn random(variant: FusionVariant, channels: usize, seed: u64) -> Result<Self> {
        check_channels(variant, channels)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = channels;
        Ok(match variant {
            FusionVariant::Concat => FusionParams::Concat(ConcatParams {
                reduce: ConvLayer::random(2 * c, c, 1, false, &mut rng),
            }),
            FusionVariant::BiProj => FusionParams::BiProj(BiProjParams {
                equi_encoder: ConvLayer::random(c, c, 3, true, &mut rng),
                c2e_encoder: ConvLayer::random(c, c, 3, true, &mut rng),
                mask: ConvLayer::random(2 * c, 1, 1, true, &mut rng),
            }),
            FusionVariant::Cee => FusionParams::Cee(CeeParams {
                squeeze: ConvLayer::random(2 * c, c, 1, true, &mut rng),
                residual: ConvLayer::random(c, c, 3, true, &mut rng),
                se: SEBlock::random(2 * c, &mut rng)?,
                fuse: ConvLayer::random(2 * c, c, 1, true, &mut rng),
            }),
        })
    }

    pub fn variant(&self) -> FusionVariant {
        match self {
            FusionParams::Concat(_) => FusionVariant::Concat,
            FusionParams::BiProj(_) => FusionVariant::BiProj,
            FusionParams::Cee(_) => FusionVariant::Cee,
        }
    }

    /// Feature channel count `C` the parameters operate on.
    pub fn channels(&self) -> usize {
        match self {
            FusionParams::Concat(p) => p.reduce.out_channels(),
            FusionParams::BiProj(p) => p.equi_encoder.in_channels(),
            FusionParams::Cee(p) => p.fuse.out_channels(),
        }
    }

    pub fn param_count(&self) -> ParamCount {
        let layers: Vec<&ConvLayer> = match self {
            FusionParams::Concat(p) => vec![&p.reduce],
            FusionParams::BiProj(p) => vec![&p.equi_encoder, &p.c2e_encoder, &p.mask],
            FusionParams::Cee(p) => vec![&p.squeeze, &p.residual, &p.fuse],
        };
        let mut count = ParamCount {
            weights: layers.iter().map(|l| l.weight_count()).sum(),
            biases: layers.iter().map(|l| l.bias_count()).sum(),
        };
        if let FusionParams::Cee(p) = self {
            count.weights += p.se.weight_count();
            count.biases += p.se.bias_count();
        }
        count
    }
}

pub fn param_count(params: &FusionParams) -> ParamCount {
    params.param_count()
}

fn check_pair(f_equi: &FeatureMap, f_c2e: &FeatureMap, channels: usize) -> Result<()> {
    if f_equi.shape() != f_c2e.shape() {
        return dims_err(format!(
            "fusion inputs differ in shape: {:?} vs {:?}",
            f_equi.shape(),
            f_c2e.shape()
        ));
    }
    if f_equi.channels() != channels {
        return Err(PanoError::ChannelMismatch {
            expected: channels,
            got: f_equi.channels(),
        });
    }
    Ok(())
}

pub fn concat_fuse(f_equi: &FeatureMap, f_c2e: &FeatureMap, params: &ConcatParams) -> Result<FeatureMap> {
    check_pair(f_equi, f_c2e, params.reduce.out_channels())?;
    conv2d(&f_equi.concat_channels(f_c2e)?, &params.reduce)
}

/// Bi-Projection forward pass; also returns the `1 x H x W` mask.
pub fn biproj_fuse_with_mask(
    f_equi: &FeatureMap,
    f_c2e: &FeatureMap,
    params: &BiProjParams,
) -> Result<(FeatureMap, FeatureMap)> {
    check_pair(f_equi, f_c2e, params.equi_encoder.in_channels())?;
    let enc_equi = relu(&conv2d(f_equi, &params.equi_encoder)?);
    let enc_c2e = relu(&conv2d(f_c2e, &params.c2e_encoder)?);
    let mask = conv2d(&enc_equi.concat_channels(&enc_c2e)?, &params.mask)?.map(sigmoid);
    let plane = f_equi.height() * f_equi.width();
    let mut out = f_equi.clone();
    for (dst, src) in out.data_mut().chunks_exact_mut(plane).zip(enc_c2e.data().chunks_exact(plane)) {
        for ((d, s), m) in dst.iter_mut().zip(src).zip(mask.data()) {
            *d += m * s;
        }
    }
    Ok((out, mask))
}

pub fn biproj_fuse(f_equi: &FeatureMap, f_c2e: &FeatureMap, params: &BiProjParams) -> Result<FeatureMap> {
    biproj_fuse_with_mask(f_equi, f_c2e, params).map(|(out, _)| out)
}

/// CEE forward pass; also returns the SE gates over the `2C` channels.
pub fn cee_fuse_with_gates(
    f_equi: &FeatureMap,
    f_c2e: &FeatureMap,
    params: &CeeParams,
) -> Result<(FeatureMap, Vec<f64>)> {
    let c = params.fuse.out_channels();
    check_pair(f_equi, f_c2e, c)?;
    if !c.is_multiple_of(8) {
        return Err(PanoError::InvalidParameter(format!("CEE needs C divisible by 8, got {c}")));
    }
    let cat = f_equi.concat_channels(f_c2e)?;
    let squeezed = relu(&conv2d(&cat, &params.squeeze)?);
    let res = conv2d(&squeezed, &params.residual)?;
    let mut refined = f_c2e.clone();
    for (d, r) in refined.data_mut().iter_mut().zip(res.data()) {
        *d += r;
    }
    let cat2 = f_equi.concat_channels(&refined)?;
    let gates = params.se.gates(&cat2)?;
    let out = conv2d(&scale_channels(&cat2, &gates), &params.fuse)?;
    Ok((out, gates))
}

pub fn cee_fuse(f_equi: &FeatureMap, f_c2e: &FeatureMap, params: &CeeParams) -> Result<FeatureMap> {
    cee_fuse_with_gates(f_equi, f_c2e, params).map(|(out, _)| out)
}

/// Dispatches to the module matching `params`.
pub fn fuse(f_equi: &FeatureMap, f_c2e: &FeatureMap, params: &FusionParams) -> Result<FeatureMap> {
    match params {
        FusionParams::Concat(p) => concat_fuse(f_equi, f_c2e, p),
        FusionParams::BiProj(p) => biproj_fuse(f_equi, f_c2e, p),
        FusionParams::Cee(p) => cee_fuse(f_equi, f_c2e, p),
    }
}

/// One decoder-stage skip fusion: the cubemap features are resampled onto
/// the ERP grid and fused into the ERP features.
pub fn skip_fuse(
    erp_feat: &FeatureMap,
    cube_feat: &CubeFeatureMap,
    grid: &C2EGrid,
    params: &FusionParams,
    boundary: C2eBoundary,
) -> Result<FeatureMap> {
    if erp_feat.height() != grid.height() || erp_feat.width() != grid.width() {
        return dims_err(format!(
            "ERP features {}x{} do not match grid {}x{}",
            erp_feat.height(),
            erp_feat.width(),
            grid.height(),
            grid.width()
        ));
    }
    if cube_feat.channels() != erp_feat.channels() {
        return Err(PanoError::ChannelMismatch {
            expected: erp_feat.channels(),
            got: cube_feat.channels(),
        });
    }
    let f_c2e = apply_c2e(cube_feat, grid, boundary)?;
    fuse(erp_feat, &f_c2e, params)
}
