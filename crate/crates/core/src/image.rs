//! Image preprocessing and augmentation: bilinear resize, min-max and z-score
//! normalization, and the geometric/photometric transforms with their seeded
//! composition.
//!
//! All operations act on rank-3 C×H×W tensors and are pure functions; the
//! per-sample random stream is derived from (seed, sample index) so work can
//! be distributed without changing results.

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Ranges for the augmentation draws. Angles are degrees; scale and contrast
/// are multiplicative factors; brightness is an additive shift.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentConfig {
    pub rotation_max_deg: f64,
    pub flip_probability: f64,
    pub scale_range: (f64, f64),
    pub brightness_shift_range: (f64, f64),
    pub contrast_range: (f64, f64),
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            rotation_max_deg: 15.0,
            flip_probability: 0.5,
            scale_range: (0.9, 1.1),
            brightness_shift_range: (-0.1, 0.1),
            contrast_range: (0.9, 1.1),
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        let ok_range = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !(self.rotation_max_deg >= 0.0 && self.rotation_max_deg.is_finite()) {
            return Err(Error::param("AugmentConfig", "rotation_max_deg must be ≥ 0"));
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return Err(Error::param("AugmentConfig", "flip_probability must be in [0, 1]"));
        }
        if !ok_range(self.scale_range) || self.scale_range.0 <= 0.0 {
            return Err(Error::param("AugmentConfig", "scale_range must satisfy 0 < lo ≤ hi"));
        }
        if !ok_range(self.brightness_shift_range) {
            return Err(Error::param("AugmentConfig", "brightness_shift_range must be ordered"));
        }
        if !ok_range(self.contrast_range) || self.contrast_range.0 <= 0.0 {
            return Err(Error::param("AugmentConfig", "contrast_range must satisfy 0 < lo ≤ hi"));
        }
        Ok(())
    }

    /// Identity configuration: every draw is pinned to the no-op value.
    pub fn identity(seed: u64) -> Self {
        AugmentConfig {
            rotation_max_deg: 0.0,
            flip_probability: 0.0,
            scale_range: (1.0, 1.0),
            brightness_shift_range: (0.0, 0.0),
            contrast_range: (1.0, 1.0),
            seed,
        }
    }
}

/// Per-channel mean and population standard deviation of a dataset.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DatasetStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl DatasetStats {
    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.std.len() || self.mean.is_empty() {
            return Err(Error::param("DatasetStats", "mean/std lengths differ or are empty"));
        }
        if let Some(c) = self.std.iter().position(|&s| !(s > 0.0)) {
            return Err(Error::param("DatasetStats", format!("std must be > 0, channel {c}")));
        }
        Ok(())
    }
}

fn check_chw(img: &Tensor, op: &'static str) -> Result<(usize, usize, usize)> {
    if img.rank() != 3 {
        return Err(Error::shape(op, format!("rank {} tensor, need C×H×W", img.rank())));
    }
    Ok((img.shape()[0], img.shape()[1], img.shape()[2]))
}

/// Bilinear resize with half-pixel-center coordinate mapping. Edge samples
/// clamp, so outputs stay inside [min(img), max(img)].
pub fn resize(img: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor> {
    let (c, h, w) = check_chw(img, "resize")?;
    if out_h == 0 || out_w == 0 {
        return Err(Error::param("resize", format!("zero output extent {out_h}x{out_w}")));
    }
    let scale_y = h as f64 / out_h as f64;
    let scale_x = w as f64 / out_w as f64;
    let mut out = Tensor::zeros(&[c, out_h, out_w]);
    for ci in 0..c {
        for oy in 0..out_h {
            let sy = ((oy as f64 + 0.5) * scale_y - 0.5).clamp(0.0, (h - 1) as f64);
            let y0 = sy.floor() as usize;
            let y1 = (y0 + 1).min(h - 1);
            let fy = sy - y0 as f64;
            for ox in 0..out_w {
                let sx = ((ox as f64 + 0.5) * scale_x - 0.5).clamp(0.0, (w - 1) as f64);
                let x0 = sx.floor() as usize;
                let x1 = (x0 + 1).min(w - 1);
                let fx = sx - x0 as f64;
                let top = img.at(&[ci, y0, x0]) * (1.0 - fx) + img.at(&[ci, y0, x1]) * fx;
                let bot = img.at(&[ci, y1, x0]) * (1.0 - fx) + img.at(&[ci, y1, x1]) * fx;
                *out.at_mut(&[ci, oy, ox]) = top * (1.0 - fy) + bot * fy;
            }
        }
    }
    Ok(out)
}

/// Scale byte-valued reals to [0, 1] by dividing by 255. Inputs outside
/// [0, 255] are the caller's bug; no clamp is applied.
pub fn minmax_normalize(img: &Tensor) -> Tensor {
    img.scaled(1.0 / 255.0)
}

/// Per-channel standardization (x − μ_c) / σ_c.
pub fn zscore(img: &Tensor, stats: &DatasetStats) -> Result<Tensor> {
    let (c, h, w) = check_chw(img, "zscore")?;
    stats.validate()?;
    if stats.mean.len() != c {
        return Err(Error::shape(
            "zscore",
            format!("{c}-channel image vs {}-channel stats", stats.mean.len()),
        ));
    }
    let mut out = img.clone();
    for ci in 0..c {
        let (mu, sigma) = (stats.mean[ci], stats.std[ci]);
        let base = ci * h * w;
        for v in &mut out.data_mut()[base..base + h * w] {
            *v = (*v - mu) / sigma;
        }
    }
    Ok(out)
}

/// Per-channel mean and population standard deviation over all pixels of all
/// images. Two-pass so the z-score contract (mean 0, variance 1 to 1e-9)
/// holds without catastrophic cancellation.
pub fn compute_stats(dataset: &[Tensor]) -> Result<DatasetStats> {
    let first = dataset
        .first()
        .ok_or_else(|| Error::Data("compute_stats on empty dataset".into()))?;
    let (c, _, _) = check_chw(first, "compute_stats")?;

    let mut sums = vec![0.0f64; c];
    let mut counts = vec![0u64; c];
    for img in dataset {
        let (ci, h, w) = check_chw(img, "compute_stats")?;
        if ci != c {
            return Err(Error::shape("compute_stats", format!("mixed channel counts {c} vs {ci}")));
        }
        for ch in 0..c {
            let base = ch * h * w;
            sums[ch] += img.data()[base..base + h * w].iter().sum::<f64>();
            counts[ch] += (h * w) as u64;
        }
    }
    let mean: Vec<f64> = sums.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect();

    let mut sq = vec![0.0f64; c];
    for img in dataset {
        let (_, h, w) = check_chw(img, "compute_stats")?;
        for ch in 0..c {
            let base = ch * h * w;
            let mu = mean[ch];
            sq[ch] += img.data()[base..base + h * w]
                .iter()
                .map(|v| (v - mu) * (v - mu))
                .sum::<f64>();
        }
    }
    let std: Vec<f64> = sq.iter().zip(&counts).map(|(s, &n)| (s / n as f64).sqrt()).collect();
    if let Some(ch) = std.iter().position(|&s| s == 0.0) {
        return Err(Error::Data(format!("zero-variance channel {ch} in dataset statistics")));
    }
    Ok(DatasetStats { mean, std })
}

/// Bilinear sample with zero padding outside the image.
fn sample_zero(img: &Tensor, c: usize, sy: f64, sx: f64) -> f64 {
    let (h, w) = (img.shape()[1] as isize, img.shape()[2] as isize);
    let y0 = sy.floor();
    let x0 = sx.floor();
    let fy = sy - y0;
    let fx = sx - x0;
    let mut acc = 0.0;
    for (dy, wy) in [(0isize, 1.0 - fy), (1, fy)] {
        for (dx, wx) in [(0isize, 1.0 - fx), (1, fx)] {
            let yy = y0 as isize + dy;
            let xx = x0 as isize + dx;
            if yy >= 0 && yy < h && xx >= 0 && xx < w {
                acc += wy * wx * img.at(&[c, yy as usize, xx as usize]);
            }
        }
    }
    acc
}

/// Rotate about the image center by `theta` radians with bilinear sampling;
/// out-of-bounds samples are zero. With row 0 at the top, positive angles
/// turn image content clockwise.
pub fn rotate(img: &Tensor, theta: f64) -> Result<Tensor> {
    let (c, h, w) = check_chw(img, "rotate")?;
    if !theta.is_finite() {
        return Err(Error::param("rotate", "non-finite angle"));
    }
    if theta == 0.0 {
        return Ok(img.clone());
    }
    let (sin, cos) = theta.sin_cos();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let mut out = Tensor::zeros(&[c, h, w]);
    for ci in 0..c {
        for oy in 0..h {
            let dy = oy as f64 - cy;
            for ox in 0..w {
                let dx = ox as f64 - cx;
                // inverse mapping: rotate the output coordinate by −θ
                let sx = cx + cos * dx + sin * dy;
                let sy = cy - sin * dx + cos * dy;
                *out.at_mut(&[ci, oy, ox]) = sample_zero(img, ci, sy, sx);
            }
        }
    }
    Ok(out)
}

/// Reverse column order per row, per channel: x'(i, j) = x(i, W − 1 − j).
pub fn hflip(img: &Tensor) -> Result<Tensor> {
    let (c, h, w) = check_chw(img, "hflip")?;
    let mut out = img.clone();
    for ci in 0..c {
        for y in 0..h {
            for x in 0..w {
                *out.at_mut(&[ci, y, x]) = img.at(&[ci, y, w - 1 - x]);
            }
        }
    }
    Ok(out)
}

/// Flip rows (used by the rotation oracle in tests and previews).
pub fn vflip(img: &Tensor) -> Result<Tensor> {
    let (c, h, w) = check_chw(img, "vflip")?;
    let mut out = img.clone();
    for ci in 0..c {
        for y in 0..h {
            for x in 0..w {
                *out.at_mut(&[ci, y, x]) = img.at(&[ci, h - 1 - y, x]);
            }
        }
    }
    Ok(out)
}

/// Zoom about the image center by factor `s` on an unchanged canvas:
/// x'(i, j) = x(i/s, j/s) in center-relative coordinates. s > 1 zooms in;
/// s < 1 zooms out with zero padding.
pub fn scale(img: &Tensor, s: f64) -> Result<Tensor> {
    let (c, h, w) = check_chw(img, "scale")?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::param("scale", format!("scale factor {s} must be > 0")));
    }
    if s == 1.0 {
        return Ok(img.clone());
    }
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let mut out = Tensor::zeros(&[c, h, w]);
    for ci in 0..c {
        for oy in 0..h {
            let sy = cy + (oy as f64 - cy) / s;
            for ox in 0..w {
                let sx = cx + (ox as f64 - cx) / s;
                *out.at_mut(&[ci, oy, ox]) = sample_zero(img, ci, sy, sx);
            }
        }
    }
    Ok(out)
}

/// Photometric adjustment out = α·in + β with no clamping.
pub fn brightness_contrast(img: &Tensor, alpha: f64, beta: f64) -> Result<Tensor> {
    if !(alpha > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::param("brightness_contrast", format!("alpha {alpha} must be > 0, beta finite")));
    }
    let data = img.iter().map(|v| alpha * v + beta).collect();
    Tensor::new(img.shape(), data)
}

/// The parameters one augmentation call draws, in draw order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentDraw {
    pub theta_deg: f64,
    pub flip: bool,
    pub scale: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Draw the per-sample transform parameters for (cfg.seed, sample_index).
pub fn draw_params(cfg: &AugmentConfig, sample_index: u64) -> AugmentDraw {
    let mut rng = Rng::for_sample(cfg.seed, sample_index);
    let theta_deg = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
    let flip = rng.bernoulli(cfg.flip_probability);
    let scale = rng.uniform(cfg.scale_range.0, cfg.scale_range.1);
    let alpha = rng.uniform(cfg.contrast_range.0, cfg.contrast_range.1);
    let beta = rng.uniform(cfg.brightness_shift_range.0, cfg.brightness_shift_range.1);
    AugmentDraw { theta_deg, flip, scale, alpha, beta }
}

/// Apply one already-drawn parameter set in the fixed composition order:
/// rotate → horizontal flip → scale → brightness/contrast.
pub fn apply_draw(img: &Tensor, draw: &AugmentDraw) -> Result<Tensor> {
    let mut out = rotate(img, draw.theta_deg.to_radians())?;
    if draw.flip {
        out = hflip(&out)?;
    }
    out = scale(&out, draw.scale)?;
    brightness_contrast(&out, draw.alpha, draw.beta)
}

/// Seeded composed augmentation; (cfg.seed, sample_index) fully determines
/// the output.
pub fn augment(img: &Tensor, cfg: &AugmentConfig, sample_index: u64) -> Result<Tensor> {
    cfg.validate()?;
    apply_draw(img, &draw_params(cfg, sample_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn img_1x1xn(values: &[f64]) -> Tensor {
        Tensor::new(&[1, 1, values.len()], values.to_vec()).unwrap()
    }

    #[test]
    fn resize_constant_image_stays_constant() {
        let img = Tensor::fill(&[2, 3, 5], 0.37);
        let out = resize(&img, 7, 2).unwrap();
        for &v in out.iter() {
            assert_abs_diff_eq!(v, 0.37, epsilon = 1e-15);
        }
    }

    #[test]
    fn resize_to_same_extents_is_identity() {
        let img = Tensor::random_uniform(&[1, 4, 6], 3, 0.0, 255.0).unwrap();
        assert_eq!(resize(&img, 4, 6).unwrap(), img);
    }

    #[test]
    fn resize_row_matches_scalar_oracle() {
        let img = img_1x1xn(&[0.0, 1.0]);
        let out = resize(&img, 1, 4).unwrap();
        // Half-pixel rule: src_x = (ox + 0.5)·(2/4) − 0.5 = ox/2 − 0.25,
        // clamped to [0, 1]. Expected: [0, 0.25, 0.75, 1].
        let expect = [0.0, 0.25, 0.75, 1.0];
        for (got, want) in out.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        // Monotone non-decreasing from 0-ish to 1-ish.
        for pair in out.data().windows(2) {
            assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn resize_respects_input_range() {
        let img = Tensor::random_uniform(&[1, 5, 5], 11, -2.0, 3.0).unwrap();
        let (lo, hi) = img.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        for (oh, ow) in [(2, 9), (11, 3), (5, 5)] {
            let out = resize(&img, oh, ow).unwrap();
            for &v in out.iter() {
                assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn minmax_boundaries() {
        let img = img_1x1xn(&[255.0, 0.0, 51.0]);
        let out = minmax_normalize(&img);
        assert_eq!(out.data()[0], 1.0);
        assert_eq!(out.data()[1], 0.0);
        assert_abs_diff_eq!(out.data()[2], 0.2, epsilon = 1e-15);
    }

    #[test]
    fn zscore_identity_and_zero_cases() {
        let img = Tensor::random_uniform(&[2, 2, 2], 1, 0.0, 1.0).unwrap();
        let identity = DatasetStats { mean: vec![0.0, 0.0], std: vec![1.0, 1.0] };
        assert_eq!(zscore(&img, &identity).unwrap(), img);

        let constant = Tensor::fill(&[2, 2, 2], 0.4);
        let stats = DatasetStats { mean: vec![0.4, 0.4], std: vec![0.3, 0.7] };
        assert!(zscore(&constant, &stats).unwrap().iter().all(|&v| v == 0.0));

        let bad = DatasetStats { mean: vec![0.0, 0.0], std: vec![1.0, 0.0] };
        assert!(zscore(&img, &bad).is_err());
    }

    #[test]
    fn stats_of_binary_channel() {
        // Channel values {0, 1} in equal number → μ = 0.5, σ = 0.5.
        let a = img_1x1xn(&[0.0, 1.0, 0.0, 1.0]);
        let stats = compute_stats(&[a]).unwrap();
        assert_abs_diff_eq!(stats.mean[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(stats.std[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn stats_degenerate_and_shuffle_invariance() {
        assert!(compute_stats(&[]).is_err());
        assert!(compute_stats(&[Tensor::fill(&[1, 2, 2], 3.0)]).is_err());

        let imgs: Vec<Tensor> = (0..6)
            .map(|i| Tensor::random_uniform(&[2, 3, 3], i, 0.0, 1.0).unwrap())
            .collect();
        let mut shuffled = imgs.clone();
        shuffled.reverse();
        assert_eq!(compute_stats(&imgs).unwrap(), compute_stats(&shuffled).unwrap());
    }

    #[test]
    fn zscore_after_stats_normalizes_dataset() {
        let imgs: Vec<Tensor> = (0..5)
            .map(|i| Tensor::random_uniform(&[3, 4, 4], 100 + i, 0.0, 1.0).unwrap())
            .collect();
        let stats = compute_stats(&imgs).unwrap();
        let normalized: Vec<Tensor> = imgs.iter().map(|im| zscore(im, &stats).unwrap()).collect();
        let count = (5 * 4 * 4) as f64;
        for ch in 0..3 {
            let mut sum = 0.0;
            let mut sq = 0.0;
            for im in &normalized {
                for y in 0..4 {
                    for x in 0..4 {
                        let v = im.at(&[ch, y, x]);
                        sum += v;
                        sq += v * v;
                    }
                }
            }
            let mean = sum / count;
            let var = sq / count - mean * mean;
            assert!(mean.abs() < 1e-9, "channel {ch} mean {mean}");
            assert!((var - 1.0).abs() < 1e-9, "channel {ch} var {var}");
        }
    }

    #[test]
    fn rotate_zero_is_identity() {
        let img = Tensor::random_uniform(&[1, 3, 4], 5, 0.0, 1.0).unwrap();
        assert_eq!(rotate(&img, 0.0).unwrap(), img);
    }

    #[test]
    fn rotate_half_turn_equals_double_flip() {
        let img = Tensor::random_uniform(&[2, 6, 6], 8, 0.0, 1.0).unwrap();
        let rotated = rotate(&img, std::f64::consts::PI).unwrap();
        let flipped = vflip(&hflip(&img).unwrap()).unwrap();
        for (a, b) in rotated.iter().zip(flipped.iter()) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn rotate_quarter_turn_moves_known_pixel() {
        let mut img = Tensor::zeros(&[1, 5, 5]);
        *img.at_mut(&[0, 1, 2]) = 1.0; // directly above center
        let out = rotate(&img, std::f64::consts::FRAC_PI_2).unwrap();
        // Inverse mapping sends output (2, 3) back to the bright source pixel.
        assert!((out.at(&[0, 2, 3]) - 1.0).abs() < 1e-9);
        let total: f64 = out.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotate_stays_in_value_range_with_zero_fill() {
        let img = Tensor::random_uniform(&[1, 5, 5], 21, 0.1, 1.0).unwrap();
        let out = rotate(&img, 0.7).unwrap();
        let hi = img.iter().fold(f64::MIN, |m, &v| m.max(v));
        for &v in out.iter() {
            assert!(v >= -1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn hflip_involution_and_width_one() {
        let img = Tensor::random_uniform(&[2, 3, 4], 2, 0.0, 1.0).unwrap();
        assert_eq!(hflip(&hflip(&img).unwrap()).unwrap(), img);

        let column = Tensor::random_uniform(&[1, 3, 1], 2, 0.0, 1.0).unwrap();
        assert_eq!(hflip(&column).unwrap(), column);

        let row = img_1x1xn(&[1.0, 2.0, 3.0]);
        assert_eq!(hflip(&row).unwrap().data(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn scale_identity_and_constant() {
        let img = Tensor::random_uniform(&[1, 4, 4], 13, 0.0, 1.0).unwrap();
        assert_eq!(scale(&img, 1.0).unwrap(), img);

        let constant = Tensor::fill(&[1, 5, 5], 0.6);
        let zoomed = scale(&constant, 2.0).unwrap();
        // Interior pixels sample fully inside the source.
        for y in 1..4 {
            for x in 1..4 {
                assert_abs_diff_eq!(zoomed.at(&[0, y, x]), 0.6, epsilon = 1e-12);
            }
        }
        assert!(scale(&img, 0.0).is_err());
        assert!(scale(&img, -1.0).is_err());
    }

    #[test]
    fn scale_two_matches_central_upsample_oracle() {
        let img = Tensor::random_uniform(&[1, 4, 4], 17, 0.0, 1.0).unwrap();
        let out = scale(&img, 2.0).unwrap();
        // Scalar oracle: for each output pixel, sample the source at
        // c + (o − c)/2 with plain bilinear taps.
        let c = 1.5;
        for oy in 0..4 {
            for ox in 0..4 {
                let sy = c + (oy as f64 - c) / 2.0;
                let sx = c + (ox as f64 - c) / 2.0;
                let y0 = sy.floor() as usize;
                let x0 = sx.floor() as usize;
                let (fy, fx) = (sy - y0 as f64, sx - x0 as f64);
                let v = img.at(&[0, y0, x0]) * (1.0 - fy) * (1.0 - fx)
                    + img.at(&[0, y0, x0 + 1]) * (1.0 - fy) * fx
                    + img.at(&[0, y0 + 1, x0]) * fy * (1.0 - fx)
                    + img.at(&[0, y0 + 1, x0 + 1]) * fy * fx;
                assert_abs_diff_eq!(out.at(&[0, oy, ox]), v, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn brightness_contrast_evaluations() {
        let img = img_1x1xn(&[0.5]);
        assert_eq!(brightness_contrast(&img, 1.0, 0.0).unwrap(), img);
        assert_abs_diff_eq!(
            brightness_contrast(&img, 1.0, 0.2).unwrap().data()[0],
            0.7,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            brightness_contrast(&img, 2.0, 0.0).unwrap().data()[0],
            1.0,
            epsilon = 1e-15
        );
        assert!(brightness_contrast(&img, 0.0, 0.0).is_err());
    }

    #[test]
    fn augment_identity_config_is_exact_identity() {
        let img = Tensor::random_uniform(&[3, 5, 5], 23, 0.0, 1.0).unwrap();
        let out = augment(&img, &AugmentConfig::identity(99), 7).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn augment_is_deterministic_per_seed_and_index() {
        let img = Tensor::random_uniform(&[1, 6, 6], 31, 0.0, 1.0).unwrap();
        let cfg = AugmentConfig { seed: 5, ..AugmentConfig::default() };
        let a = augment(&img, &cfg, 3).unwrap();
        let b = augment(&img, &cfg, 3).unwrap();
        assert_eq!(a, b);
        let other = augment(&img, &cfg, 4).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn augment_matches_manual_composition() {
        let img = Tensor::random_uniform(&[1, 6, 6], 37, 0.0, 1.0).unwrap();
        let cfg = AugmentConfig { seed: 12, ..AugmentConfig::default() };
        let auto = augment(&img, &cfg, 2).unwrap();

        let d = draw_params(&cfg, 2);
        let mut manual = rotate(&img, d.theta_deg.to_radians()).unwrap();
        if d.flip {
            manual = hflip(&manual).unwrap();
        }
        manual = scale(&manual, d.scale).unwrap();
        manual = brightness_contrast(&manual, d.alpha, d.beta).unwrap();
        assert_eq!(auto, manual);
    }
}
