use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use pano_core::fusion::{biproj_fuse_with_mask, cee_fuse_with_gates, concat_fuse, FusionParams, FusionVariant};
use pano_core::metrics::{compute_metrics, EvalConfig};
use pano_core::padding::{circular_pad, cube_pad, spherical_pad};
use pano_core::resample::{apply_c2e, apply_e2c, build_c2e_grid, build_e2c_grid, C2eBoundary};
use pano_core::tangent::build_tangent_grid;
use pano_core::tensor_io::{c2e_grid_to_tensor, e2c_grid_to_tensor, tangent_grid_to_tensor, Tensor};
use pano_core::{CubeFeatureMap, FaceId, FeatureMap};

use crate::io::{load_depth, load_rgb, save_rgb};
use crate::{Boundary, LogBase, LutKind, Module, PadMode};

fn face_file(face: FaceId) -> String {
    format!("{}.png", face.letter())
}

pub fn e2c(input: &Path, outdir: &Path, face_size: Option<usize>) -> Result<()> {
    let erp = load_rgb(input)?;
    let (h, w) = (erp.height(), erp.width());
    ensure!(w == 2 * h, "{}: expected width = 2 x height, got {w}x{h}", input.display());
    let r = face_size.unwrap_or(h / 2);
    let grid = build_e2c_grid(r, h, w)?;
    let cube = apply_e2c(&erp, &grid)?;
    fs::create_dir_all(outdir).with_context(|| format!("cannot create {}", outdir.display()))?;
    for face in FaceId::ALL {
        save_rgb(&cube.face(face), &outdir.join(face_file(face)))?;
    }
    let manifest = format!(
        "source={}\nheight={h}\nwidth={w}\nface_size={r}\nface_order=B,D,F,L,R,U\n\
         erp_pixel_centre=(i+0.5, j+0.5); column 0 starts at longitude -pi; front face at image centre\n\
         face_axes=u right, v down, viewed from the sphere centre; up/down faces have the front face below/above\n",
        input.display()
    );
    fs::write(outdir.join("manifest.txt"), manifest)?;
    println!("e2c: {w}x{h} -> 6 faces of {r}x{r} in {}", outdir.display());
    Ok(())
}

fn face_paths(args: &[PathBuf]) -> Result<Vec<PathBuf>> {
    match args {
        [dir] if dir.is_dir() => Ok(FaceId::ALL.iter().map(|&f| dir.join(face_file(f))).collect()),
        [one] => bail!("{} is not a directory of faces", one.display()),
        six if six.len() == 6 => Ok(six.to_vec()),
        other => bail!("expected a face directory or six face images, got {} paths", other.len()),
    }
}

pub fn c2e(faces: &[PathBuf], out: &Path, height: Option<usize>, boundary: Boundary) -> Result<()> {
    let maps = face_paths(faces)?.iter().map(|p| load_rgb(p)).collect::<Result<Vec<_>>>()?;
    let r = maps[0].height();
    for (m, f) in maps.iter().zip(FaceId::ALL) {
        ensure!(
            m.height() == r && m.width() == r,
            "face {f} is {}x{}, expected {r}x{r}",
            m.width(),
            m.height()
        );
    }
    let cube = CubeFeatureMap::from_faces(&maps)?;
    let h = height.unwrap_or(2 * r);
    let boundary = match boundary {
        Boundary::Clamp => C2eBoundary::ClampFace,
        Boundary::Padded => C2eBoundary::PaddedFace,
    };
    let start = Instant::now();
    let grid = build_c2e_grid(h, 2 * h, r)?;
    let erp = apply_c2e(&cube, &grid, boundary)?;
    let secs = start.elapsed().as_secs_f64();
    save_rgb(&erp, out)?;
    println!("c2e: 6x{r}x{r} -> {}x{h} ({boundary:?}) in {secs:.4} s", 2 * h);
    Ok(())
}

pub fn eval(pred: &Path, gt: &Path, min_depth: f64, max_depth: f64, crop: usize, log_base: LogBase, scale: f64) -> Result<()> {
    ensure!(scale > 0.0 && scale.is_finite(), "--scale must be positive");
    let pred = load_depth(pred, scale)?;
    let gt = load_depth(gt, scale)?;
    let m = compute_metrics(&pred, &gt, &EvalConfig { min_depth, max_depth, crop })?;
    if m.nonpositive_pred_count > 0 {
        eprintln!(
            "warning: {} valid pixels have nonpositive predictions; left out of the log error and counted as misses",
            m.nonpositive_pred_count
        );
    }
    let (log_label, log_value) = match log_base {
        LogBase::Ten => ("RMSE (log10)", m.rmse_log10),
        LogBase::E => ("RMSE (ln)", m.rmse_ln),
    };
    println!("rows evaluated  {}", m.rows_evaluated);
    println!("valid pixels    {}", m.valid_pixel_count);
    println!("MAE             {:.4}", m.mae);
    println!("AbsRel          {:.4}", m.abs_rel);
    println!("RMSE            {:.4}", m.rmse);
    println!("{log_label:<16}{log_value:.4}");
    println!("delta < 1.25    {:.4}", m.d1);
    println!("delta < 1.25^2  {:.4}", m.d2);
    println!("delta < 1.25^3  {:.4}", m.d3);
    println!("---");
    println!("mae={}", m.mae);
    println!("abs_rel={}", m.abs_rel);
    println!("rmse={}", m.rmse);
    println!("rmse_log={log_value}");
    println!("rmse_log10={}", m.rmse_log10);
    println!("rmse_ln={}", m.rmse_ln);
    println!("d1={}", m.d1);
    println!("d2={}", m.d2);
    println!("d3={}", m.d3);
    println!("valid_pixels={}", m.valid_pixel_count);
    println!("nonpositive_pred={}", m.nonpositive_pred_count);
    println!("rows_evaluated={}", m.rows_evaluated);
    Ok(())
}

pub fn pad(input: &Path, out: &Path, mode: PadMode, p: usize) -> Result<()> {
    let t = Tensor::load(input).with_context(|| format!("cannot read {}", input.display()))?;
    let start = Instant::now();
    let (name, padded) = match mode {
        PadMode::Circular => {
            ensure!(t.dims().len() == 3, "circular padding needs a [C,H,W] tensor, got {:?}", t.dims());
            let erp = FeatureMap::try_from(&t)?;
            ("circular", Tensor::from(&circular_pad(&erp, p)?))
        }
        PadMode::Cube | PadMode::Spherical => {
            ensure!(t.dims().len() == 4, "cube padding needs a [6,C,r,r] tensor, got {:?}", t.dims());
            let cube = CubeFeatureMap::try_from(&t)?;
            if matches!(mode, PadMode::Cube) {
                ("cube", Tensor::from(&cube_pad(&cube, p)?))
            } else {
                ("spherical", Tensor::from(&spherical_pad(&cube, p)?))
            }
        }
    };
    let secs = start.elapsed().as_secs_f64();
    padded.save(out).with_context(|| format!("cannot write {}", out.display()))?;
    println!("pad: {name} p={p} {:?} -> {:?} in {secs:.4} s", t.dims(), padded.dims());
    Ok(())
}

fn checksum(data: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for v in data {
        hasher.update(v.to_le_bytes());
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn range(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub fn fuse_demo(module: Module, channels: usize, height: usize, seed: u64, report: bool) -> Result<()> {
    ensure!(channels > 0 && channels.is_multiple_of(8), "--channels must be a positive multiple of 8, got {channels}");
    ensure!(height >= 2 && height.is_multiple_of(2), "--height must be even and at least 2, got {height}");
    let variant = match module {
        Module::Concat => FusionVariant::Concat,
        Module::Biproj => FusionVariant::BiProj,
        Module::Cee => FusionVariant::Cee,
    };
    let (h, w, r) = (height, 2 * height, height / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let erp = FeatureMap::from_fn(channels, h, w, |_, _, _| rng.gen_range(-1.0..1.0));
    let cube = CubeFeatureMap::from_fn(channels, r, |_, _, _, _| rng.gen_range(-1.0..1.0));
    let params = FusionParams::random(variant, channels, seed)?;
    let count = params.param_count();

    let start = Instant::now();
    let grid = build_c2e_grid(h, w, r)?;
    let f_c2e = apply_c2e(&cube, &grid, C2eBoundary::PaddedFace)?;
    let (out, attention) = match &params {
        FusionParams::Concat(p) => (concat_fuse(&erp, &f_c2e, p)?, None),
        FusionParams::BiProj(p) => {
            let (out, mask) = biproj_fuse_with_mask(&erp, &f_c2e, p)?;
            (out, Some(("mask", range(mask.data()))))
        }
        FusionParams::Cee(p) => {
            let (out, gates) = cee_fuse_with_gates(&erp, &f_c2e, p)?;
            (out, Some(("se_gate", range(&gates))))
        }
    };
    let secs = start.elapsed().as_secs_f64();
    let (lo, hi) = range(out.data());
    let mean = out.data().iter().sum::<f64>() / out.data().len() as f64;
    let sum = checksum(out.data());

    if report {
        println!("{variant} fusion, seed {seed}");
        println!("  ERP features   {channels}x{h}x{w}");
        println!("  cube features  6x{channels}x{r}x{r}");
        println!("  parameters     {} weights + {} biases = {}", count.weights, count.biases, count.total());
        println!("  output range   [{lo:.6}, {hi:.6}], mean {mean:.6}");
        if let Some((name, (a, b))) = attention {
            println!("  {name} range  [{a:.6}, {b:.6}]");
        }
        println!("  elapsed        {secs:.4} s");
        println!("---");
    }
    println!("module={}", variant.name());
    println!("channels={channels}");
    println!("height={h}");
    println!("width={w}");
    println!("face_size={r}");
    println!("seed={seed}");
    println!("weights={}", count.weights);
    println!("biases={}", count.biases);
    println!("total_params={}", count.total());
    println!("out_min={lo}");
    println!("out_max={hi}");
    println!("out_mean={mean}");
    if let Some((name, (a, b))) = attention {
        println!("{name}_min={a}");
        println!("{name}_max={b}");
    }
    println!("checksum={sum}");
    Ok(())
}

pub fn lut(kind: LutKind, height: usize, face_size: Option<usize>, kernel: usize, out: &Path) -> Result<()> {
    let (h, w) = (height, 2 * height);
    let r = face_size.unwrap_or(h / 2);
    let (name, t) = match kind {
        LutKind::C2e => ("c2e", c2e_grid_to_tensor(&build_c2e_grid(h, w, r)?)),
        LutKind::E2c => ("e2c", e2c_grid_to_tensor(&build_e2c_grid(r, h, w)?)),
        LutKind::Tangent => ("tangent", tangent_grid_to_tensor(&build_tangent_grid(h, w, kernel)?)),
    };
    t.save(out).with_context(|| format!("cannot write {}", out.display()))?;
    println!("lut: {name} {:?} -> {}", t.dims(), out.display());
    Ok(())
}
