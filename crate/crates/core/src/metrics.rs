//! Depth evaluation metrics and the BerHu regression loss.

use crate::error::{dims_err, PanoError, Result};

/// Per-pixel depth in meters with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    /// Pixels with a positive finite depth are valid; everything else
    /// (zero, negative, NaN) is marked invalid.
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || values.len() != height * width {
            return dims_err(format!(
                "depth map {height}x{width} with {} values",
                values.len()
            ));
        }
        let valid = values.iter().map(|&v| v > 0.0 && v.is_finite()).collect();
        Ok(Self { height, width, values, valid })
    }

    /// Explicit validity mask; masked-out values are kept but ignored.
    pub fn with_mask(height: usize, width: usize, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let mut d = Self::new(height, width, values)?;
        if mask.len() != d.values.len() {
            return dims_err("mask length differs from value count");
        }
        for (v, m) in d.valid.iter_mut().zip(mask) {
            *v &= m;
        }
        Ok(d)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> DepthMap {
        DepthMap::new(self.height, self.width, self.values.iter().map(|&v| f(v)).collect())
            .expect("same dimensions")
    }

    /// Horizontal circular shift by `shift` columns.
    pub fn yaw_roll(&self, shift: usize) -> DepthMap {
        let w = self.width;
        let s = shift % w;
        let roll = |row: &[f64]| [&row[w - s..], &row[..w - s]].concat();
        let values = self.values.chunks_exact(w).flat_map(roll).collect();
        let valid = self
            .valid
            .chunks_exact(w)
            .flat_map(|row| [&row[w - s..], &row[..w - s]].concat())
            .collect();
        DepthMap { height: self.height, width: w, values, valid }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub min_depth: f64,
    pub max_depth: f64,
    /// Rows dropped from both the top and the bottom.
    pub crop: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { min_depth: 0.1, max_depth: 10.0, crop: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthEvalResult {
    pub mae: f64,
    pub abs_rel: f64,
    pub rmse: f64,
    pub rmse_log10: f64,
    /// Natural-log variant, reported alongside.
    pub rmse_ln: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub valid_pixel_count: usize,
    /// Valid pixels left out of the log metrics because the prediction was not positive.
    pub nonpositive_pred_count: usize,
    pub rows_evaluated: usize,
}

pub fn compute_metrics(pred: &DepthMap, gt: &DepthMap, cfg: &EvalConfig) -> Result<DepthEvalResult> {
    if pred.height != gt.height || pred.width != gt.width {
        return dims_err(format!(
            "prediction {}x{} vs ground truth {}x{}",
            pred.height, pred.width, gt.height, gt.width
        ));
    }
    if cfg.min_depth.partial_cmp(&cfg.max_depth) != Some(std::cmp::Ordering::Less) {
        return Err(PanoError::InvalidParameter(format!(
            "min depth {} must be below max depth {}",
            cfg.min_depth, cfg.max_depth
        )));
    }
    if 2 * cfg.crop >= gt.height {
        return Err(PanoError::InvalidParameter(format!(
            "crop {} leaves no rows of {}",
            cfg.crop, gt.height
        )));
    }
    let w = gt.width;
    let rows = cfg.crop..gt.height - cfg.crop;
    let thresholds = [1.25, 1.25f64.powi(2), 1.25f64.powi(3)];

    let (mut n_log, mut nonpos) = (0usize, 0usize);
    let (mut abs, mut rel, mut sq, mut sq_log10, mut sq_ln) = (vec![], vec![], vec![], vec![], vec![]);
    let mut hits = [0usize; 3];
    for y in rows.clone() {
        for x in 0..w {
            let i = y * w + x;
            let g = gt.values[i];
            if !gt.valid[i] || g < cfg.min_depth || g > cfg.max_depth {
                continue;
            }
            let p = pred.values[i];
            let diff = p - g;
            abs.push(diff.abs());
            rel.push(diff.abs() / g);
            sq.push(diff * diff);
            if p > 0.0 {
                n_log += 1;
                let d10 = p.log10() - g.log10();
                let de = p.ln() - g.ln();
                sq_log10.push(d10 * d10);
                sq_ln.push(de * de);
                let ratio = (p / g).max(g / p);
                for (hit, t) in hits.iter_mut().zip(thresholds) {
                    if ratio < t {
                        *hit += 1;
                    }
                }
            } else {
                nonpos += 1;
            }
        }
    }
    let n = abs.len();
    if n == 0 {
        return Err(PanoError::EmptyEvaluation);
    }
    let nf = n as f64;
    let log_rmse = |s: Vec<f64>| if n_log == 0 { 0.0 } else { (sorted_sum(s) / n_log as f64).sqrt() };
    Ok(DepthEvalResult {
        mae: sorted_sum(abs) / nf,
        abs_rel: sorted_sum(rel) / nf,
        rmse: (sorted_sum(sq) / nf).sqrt(),
        rmse_log10: log_rmse(sq_log10),
        rmse_ln: log_rmse(sq_ln),
        d1: hits[0] as f64 / nf,
        d2: hits[1] as f64 / nf,
        d3: hits[2] as f64 / nf,
        valid_pixel_count: n,
        nonpositive_pred_count: nonpos,
        rows_evaluated: rows.len(),
    })
}

/// Sums in ascending order, so the result depends only on the multiset of
/// terms and not on where the pixels sit in the image.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// Reverse Huber penalty of a single residual with threshold `c`.
pub fn berhu_term(x: f64, c: f64) -> f64 {
    let a = x.abs();
    if c <= 0.0 || a <= c {
        a
    } else {
        (x * x + c * c) / (2.0 * c)
    }
}

/// Mean BerHu over residuals, with `c = 0.2 * max |residual|`.
pub fn berhu_from_residuals(residuals: &[f64]) -> Result<f64> {
    if residuals.is_empty() {
        return Err(PanoError::EmptyEvaluation);
    }
    let c = 0.2 * residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(residuals.iter().map(|&r| berhu_term(r, c)).sum::<f64>() / residuals.len() as f64)
}

/// BerHu loss over pixels valid in the ground truth.
pub fn berhu_loss(pred: &DepthMap, gt: &DepthMap) -> Result<f64> {
    if pred.height != gt.height || pred.width != gt.width {
        return dims_err("prediction and ground truth differ in size");
    }
    let residuals: Vec<f64> = pred
        .values
        .iter()
        .zip(&gt.values)
        .zip(&gt.valid)
        .filter(|(_, &ok)| ok)
        .map(|((p, g), _)| p - g)
        .collect();
    berhu_from_residuals(&residuals)
}
