//! Initial disparity from the cross-lying views and the search borders it induces.

use image::RgbImage;

use crate::census::CensusField;
use crate::cost_volume::{cross_view_cost, HypothesisRange};
use crate::disparity::DisparityMap;
use crate::error::{Error, Result};
use crate::lightfield::{HypothesisGrid, LightField};
use crate::sgm::{aggregate_all, wta, SgmParams};

/// Per-pixel hypothesis-index search range `[low, high]`.
///
/// Pixels in `full_range` are searched over every hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderMaps {
    width: usize,
    height: usize,
    count: usize,
    low: Vec<usize>,
    high: Vec<usize>,
    full_range: Vec<bool>,
}

impl BorderMaps {
    /// Borders covering the whole grid at every pixel.
    pub fn full(width: usize, height: usize, count: usize) -> Self {
        Self {
            width,
            height,
            count,
            low: vec![0; width * height],
            high: vec![count - 1; width * height],
            full_range: vec![true; width * height],
        }
    }

    pub fn from_parts(
        width: usize,
        height: usize,
        count: usize,
        low: Vec<usize>,
        high: Vec<usize>,
        full_range: Vec<bool>,
    ) -> Result<Self> {
        let n = width * height;
        if low.len() != n || high.len() != n || full_range.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "border maps must have {n} entries"
            )));
        }
        for i in 0..n {
            if low[i] > high[i] || high[i] >= count {
                return Err(Error::InvalidInput(format!(
                    "border [{}, {}] at pixel {i} invalid for {count} hypotheses",
                    low[i], high[i]
                )));
            }
            if full_range[i] && (low[i] != 0 || high[i] != count - 1) {
                return Err(Error::InvalidInput(format!(
                    "pixel {i} is marked full range but has border [{}, {}]",
                    low[i], high[i]
                )));
            }
        }
        Ok(Self {
            width,
            height,
            count,
            low,
            high,
            full_range,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn low(&self, x: usize, y: usize) -> usize {
        self.low[y * self.width + x]
    }

    pub fn high(&self, x: usize, y: usize) -> usize {
        self.high[y * self.width + x]
    }

    pub fn is_full_range(&self, x: usize, y: usize) -> bool {
        self.full_range[y * self.width + x]
    }

    pub fn range(&self, x: usize, y: usize) -> HypothesisRange {
        let i = y * self.width + x;
        HypothesisRange::new(self.low[i], self.high[i])
    }

    pub fn ranges(&self) -> Vec<HypothesisRange> {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(&lo, &hi)| HypothesisRange::new(lo, hi))
            .collect()
    }

    pub fn full_range_count(&self) -> usize {
        self.full_range.iter().filter(|&&f| f).count()
    }

    pub fn full_range_mask(&self) -> &[bool] {
        &self.full_range
    }

    /// Total number of hypotheses inside the borders.
    pub fn hypothesis_count(&self) -> u64 {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(&lo, &hi)| (hi - lo + 1) as u64)
            .sum()
    }
}

/// One disparity map per cross-lying view, in reference-view coordinates.
pub fn intermediate_maps(
    lf: &LightField,
    cf: &CensusField,
    params: &SgmParams,
    grid: &HypothesisGrid,
) -> Result<Vec<DisparityMap>> {
    if lf.s_count() * lf.t_count() < 2 {
        return Err(Error::InvalidInput(
            "initial disparity needs at least two views".into(),
        ));
    }
    lf.cross_views()
        .into_iter()
        .map(|c| {
            let cv = cross_view_cost(cf, c, lf.reference(), grid)?;
            Ok(wta(&aggregate_all(&cv, params), grid))
        })
        .collect()
}

/// Running fusion: start from the first map; for each later map, pixels that
/// agree within `phi` hypothesis steps take the average of the running value
/// and the new map, pixels that disagree become invalid for good.
pub fn fuse(maps: &[DisparityMap], phi: f64, grid: &HypothesisGrid) -> Result<DisparityMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidInput("fusion needs at least one map".into()))?;
    if maps.iter().any(|m| !m.same_shape(first)) {
        return Err(Error::DimensionMismatch("fused maps differ in size".into()));
    }
    // Compared in index units; the slack keeps an exact multiple of the step
    // on the discard side despite rounding in `d_min + k * step`.
    let step = grid.step();
    let limit = phi - 1e-9;
    let mut out = first.clone();
    for m in &maps[1..] {
        for y in 0..out.height() {
            for x in 0..out.width() {
                let Some(cur) = out.get(x, y) else { continue };
                match m.get(x, y) {
                    Some(d) if (cur - d).abs() / step < limit => out.set(x, y, (cur + d) / 2.0),
                    _ => out.invalidate(x, y),
                }
            }
        }
    }
    Ok(out)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Fills invalid pixels with the median of their valid neighbors when at
/// least `min_support` neighbors inside the `window` are valid. Each pass
/// reads the output of the previous one.
pub fn fill_holes(dm: &DisparityMap, window: usize, passes: usize, min_support: usize) -> Result<DisparityMap> {
    if window.is_multiple_of(2) {
        return Err(Error::Config(format!("hole-fill window must be odd, got {window}")));
    }
    let r = (window / 2) as i64;
    let (w, h) = (dm.width() as i64, dm.height() as i64);
    let mut cur = dm.clone();
    let mut buf = Vec::with_capacity(window * window);
    for _ in 0..passes {
        let src = cur.clone();
        for y in 0..h {
            for x in 0..w {
                if src.is_valid(x as usize, y as usize) {
                    continue;
                }
                buf.clear();
                for ny in (y - r).max(0)..=(y + r).min(h - 1) {
                    for nx in (x - r).max(0)..=(x + r).min(w - 1) {
                        if let Some(v) = src.get(nx as usize, ny as usize) {
                            buf.push(v);
                        }
                    }
                }
                if buf.len() >= min_support.max(1) {
                    cur.set(x as usize, y as usize, median(&mut buf));
                }
            }
        }
    }
    Ok(cur)
}

/// Border maps `[k - lambda, k + lambda]` around the nearest hypothesis `k`
/// of each valid pixel, saturated to the grid. Invalid pixels and pixels on
/// the edge mask are searched over the full range.
pub fn compute_borders(
    dm: &DisparityMap,
    lambda: usize,
    edges: &[bool],
    grid: &HypothesisGrid,
) -> Result<BorderMaps> {
    let (w, h) = (dm.width(), dm.height());
    if edges.len() != w * h {
        return Err(Error::DimensionMismatch(format!(
            "edge mask has {} entries, map has {}",
            edges.len(),
            w * h
        )));
    }
    let n = grid.count();
    let mut b = BorderMaps::full(w, h, n);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if edges[i] {
                continue;
            }
            if let Some(d) = dm.get(x, y) {
                let k = grid.nearest_index(d);
                b.low[i] = k.saturating_sub(lambda);
                b.high[i] = (k + lambda).min(n - 1);
                b.full_range[i] = false;
            }
        }
    }
    Ok(b)
}

/// Grayscale conversion used for edge detection.
pub fn luma(img: &RgbImage) -> Vec<f64> {
    img.pixels()
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

/// Sobel gradient magnitude (divided by 4, edge-clamped) above `threshold`.
pub fn sobel_edges(img: &RgbImage, threshold: f64) -> Vec<bool> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let g = luma(img);
    let at = |x: i64, y: i64| g[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];
    let mut out = vec![false; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out[(y * w + x) as usize] = (gx * gx + gy * gy).sqrt() / 4.0 > threshold;
        }
    }
    out
}
