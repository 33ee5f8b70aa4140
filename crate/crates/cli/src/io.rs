//! Image and depth-map loading and saving.

use std::path::Path;

use anyhow::{bail, Context, Result};
use image::{ImageBuffer, ImageReader, Luma, Rgb};
use pano_core::metrics::DepthMap;
use pano_core::tensor_io::Tensor;
use pano_core::FeatureMap;

/// Loads any PNG as a 3-channel map with values in `[0, 255]`.
pub fn load_rgb(path: &Path) -> Result<FeatureMap> {
    let img = ImageReader::open(path)
        .with_context(|| format!("cannot open {}", path.display()))?
        .with_guessed_format()?
        .decode()
        .with_context(|| format!("cannot decode {}", path.display()))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(FeatureMap::from_fn(3, h, w, |c, y, x| img.get_pixel(x as u32, y as u32)[c] as f64))
}

pub fn save_rgb(map: &FeatureMap, path: &Path) -> Result<()> {
    if map.channels() != 3 {
        bail!("expected 3 channels, got {}", map.channels());
    }
    let img = ImageBuffer::from_fn(map.width() as u32, map.height() as u32, |x, y| {
        let px = |c| map.get(c, y as usize, x as usize).round().clamp(0.0, 255.0) as u8;
        Rgb([px(0), px(1), px(2)])
    });
    img.save(path).with_context(|| format!("cannot write {}", path.display()))
}

/// Reads a depth map in meters. `.pnf` containers hold meters directly
/// (`[H,W]` or `[1,H,W]`); PNG inputs are 16-bit gray scaled by `scale`,
/// with raw 0 marking an invalid pixel.
pub fn load_depth(path: &Path, scale: f64) -> Result<DepthMap> {
    let is_pnf = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pnf"));
    if is_pnf {
        let t = Tensor::load(path).with_context(|| format!("cannot read {}", path.display()))?;
        let (h, w) = match *t.dims() {
            [h, w] | [1, h, w] => (h, w),
            ref d => bail!("{}: expected a [H,W] or [1,H,W] depth tensor, got {d:?}", path.display()),
        };
        return Ok(DepthMap::new(h, w, t.data().iter().map(|&v| v as f64).collect())?);
    }
    let img = ImageReader::open(path)
        .with_context(|| format!("cannot open {}", path.display()))?
        .with_guessed_format()?
        .decode()
        .with_context(|| format!("cannot decode {}", path.display()))?;
    if img.color().channel_count() != 1 {
        bail!("{}: depth PNG must be single-channel, got {:?}", path.display(), img.color());
    }
    let img = img.to_luma16();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values = img.pixels().map(|&Luma([raw])| raw as f64 * scale).collect();
    Ok(DepthMap::new(h, w, values)?)
}
