//! Synthetic fronto-parallel scenes with known constant disparity.
//!
//! View `(s, t)` at pixel `(x, y)` samples the texture at
//! `(x + m - (ŝ - s)·d*, y + m - (t̂ - t)·d*)`, where `m` is a margin that
//! keeps every sample inside the texture. The reference view is therefore
//! the texture cropped by `m` on each side, and projecting a reference pixel
//! with disparity `d*` lands exactly on the matching pixel in every view.

use std::f64::consts::TAU;
use std::path::Path;

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::disparity::DisparityMap;
use crate::error::{Error, Result};
use crate::lightfield::{bilinear, LightField};
use crate::loader::write_lightfield;
use crate::pfm::write_pfm;

pub const GROUND_TRUTH_NAME: &str = "gt_disp_lowres.pfm";
/// Disparity range written to synthetic scene configs unless overridden.
pub const DEFAULT_RANGE: (f64, f64) = (-5.0, 5.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub disparity: f64,
    pub s_count: usize,
    pub t_count: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub d_min: f64,
    pub d_max: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            disparity: 0.0,
            s_count: 5,
            t_count: 5,
            noise_sigma: 0.0,
            seed: 0,
            d_min: DEFAULT_RANGE.0,
            d_max: DEFAULT_RANGE.1,
        }
    }
}

/// Margin needed so that every view samples inside the texture.
pub fn margin(disparity: f64, s_count: usize, t_count: usize) -> usize {
    let extent = [(s_count - 1) / 2, s_count / 2, (t_count - 1) / 2, t_count / 2]
        .into_iter()
        .max()
        .unwrap_or(0);
    (disparity.abs() * extent as f64).ceil() as usize
}

/// Renders the light field and its constant ground truth.
pub fn synthesize(texture: &RgbImage, p: &SynthParams) -> Result<(LightField, DisparityMap)> {
    if p.s_count == 0 || p.t_count == 0 {
        return Err(Error::InvalidInput("angular dims must be positive".into()));
    }
    if !p.disparity.is_finite() || !(p.noise_sigma >= 0.0) {
        return Err(Error::InvalidInput("disparity and noise must be finite, noise nonnegative".into()));
    }
    let (tw, th) = (texture.width() as usize, texture.height() as usize);
    let m = margin(p.disparity, p.s_count, p.t_count);
    if tw <= 2 * m || th <= 2 * m {
        return Err(Error::InvalidInput(format!(
            "{tw}x{th} texture is too small for disparity {} with {}x{} views (margin {m})",
            p.disparity, p.s_count, p.t_count
        )));
    }
    let (w, h) = (tw - 2 * m, th - 2 * m);
    let (rs, rt) = ((p.s_count - 1) / 2, (p.t_count - 1) / 2);
    let raw = texture.as_raw();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let noise = (p.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, p.noise_sigma).expect("sigma checked above"));

    let mut views = Vec::with_capacity(p.s_count * p.t_count);
    for t in 0..p.t_count {
        for s in 0..p.s_count {
            let dx = (rs as f64 - s as f64) * p.disparity;
            let dy = (rt as f64 - t as f64) * p.disparity;
            let mut img = RgbImage::new(w as u32, h as u32);
            for y in 0..h {
                for x in 0..w {
                    let u = (x + m) as f64 - dx;
                    let v = (y + m) as f64 - dy;
                    let c = bilinear(raw, tw, th, u, v).expect("margin keeps samples inside");
                    let px = c.map(|c| {
                        let n = noise.as_ref().map_or(0.0, |d| d.sample(&mut rng));
                        (c + n).round().clamp(0.0, 255.0) as u8
                    });
                    img.put_pixel(x as u32, y as u32, Rgb(px));
                }
            }
            views.push(img);
        }
    }
    let lf = LightField::new(views, p.s_count, p.t_count, p.d_min, p.d_max)?;
    Ok((lf, DisparityMap::filled(w, h, p.disparity)))
}

/// Writes views, scene config and ground truth into `dir`.
pub fn write_scene(dir: impl AsRef<Path>, lf: &LightField, gt: &DisparityMap) -> Result<()> {
    let dir = dir.as_ref();
    write_lightfield(dir, lf)?;
    write_pfm(dir.join(GROUND_TRUTH_NAME), gt)
}

/// Smooth random RGB texture: a sum of plane waves per channel.
///
/// Amplitudes are scaled so the luma gradient stays below 40 levels per
/// pixel, under the default Sobel edge threshold.
pub fn procedural_texture(width: u32, height: u32, seed: u64) -> RgbImage {
    const WAVES: usize = 12;
    const MAX_SLOPE: f64 = 40.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channels: Vec<Vec<(f64, f64, f64, f64)>> = (0..3)
        .map(|_| {
            (0..WAVES)
                .map(|_| {
                    let theta = rng.random_range(0.0..TAU);
                    let omega = TAU / rng.random_range(6.0..24.0);
                    let phase = rng.random_range(0.0..TAU);
                    let amp = MAX_SLOPE / (WAVES as f64 * omega);
                    (omega * theta.cos(), omega * theta.sin(), phase, amp)
                })
                .collect()
        })
        .collect();
    RgbImage::from_fn(width, height, |x, y| {
        let (x, y) = (x as f64, y as f64);
        Rgb([0, 1, 2].map(|c| {
            let v: f64 = channels[c]
                .iter()
                .map(|&(kx, ky, ph, a)| a * (kx * x + ky * y + ph).sin())
                .sum();
            (128.0 + v).round().clamp(0.0, 255.0) as u8
        }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init_disparity::sobel_edges;
    use crate::lightfield::ViewCoord;

    fn params(d: f64) -> SynthParams {
        SynthParams {
            disparity: d,
            ..SynthParams::default()
        }
    }

    #[test]
    fn zero_disparity_views_equal_texture() {
        let tex = procedural_texture(20, 16, 3);
        let (lf, gt) = synthesize(&tex, &params(0.0)).unwrap();
        assert!(lf.views().iter().all(|v| *v == tex));
        assert_eq!(gt, DisparityMap::filled(20, 16, 0.0));
    }

    #[test]
    fn integer_shift_matches_projection() {
        let tex = procedural_texture(40, 40, 9);
        let (lf, _) = synthesize(&tex, &params(2.0)).unwrap();
        assert_eq!((lf.width(), lf.height()), (32, 32));
        let center = lf.reference_view();
        let left = lf.view(ViewCoord::new(0, 2));
        // (ŝ - s)·d = 2·2 = 4 px.
        for y in 0..32 {
            for x in 0..28 {
                assert_eq!(center.get_pixel(x, y), left.get_pixel(x + 4, y));
            }
        }
        let top = lf.view(ViewCoord::new(2, 0));
        for y in 0..28 {
            for x in 0..32 {
                assert_eq!(center.get_pixel(x, y), top.get_pixel(x, y + 4));
            }
        }
    }

    #[test]
    fn margins() {
        assert_eq!(margin(2.0, 5, 5), 4);
        assert_eq!(margin(-1.5, 5, 5), 3);
        assert_eq!(margin(1.0, 7, 1), 3);
        assert_eq!(margin(0.0, 9, 9), 0);
        assert!(synthesize(&procedural_texture(8, 8, 0), &params(2.0)).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let tex = procedural_texture(16, 16, 1);
        let p = SynthParams {
            noise_sigma: 2.0,
            seed: 5,
            ..params(1.0)
        };
        let a = synthesize(&tex, &p).unwrap().0;
        let b = synthesize(&tex, &p).unwrap().0;
        assert_eq!(a, b);
        let c = synthesize(&tex, &SynthParams { seed: 6, ..p }).unwrap().0;
        assert_ne!(a, c);
    }

    #[test]
    fn procedural_texture_is_smooth() {
        let tex = procedural_texture(96, 96, 42);
        let edges = sobel_edges(&tex, 96.0);
        assert!(edges.iter().all(|&e| !e));
        let distinct: std::collections::HashSet<_> = tex.pixels().collect();
        assert!(distinct.len() > 1000);
    }
}
