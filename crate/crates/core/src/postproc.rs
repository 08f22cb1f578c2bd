//! Sub-pixel refinement and median filtering of disparity maps.

use crate::disparity::DisparityMap;
use crate::error::{Error, Result};
use crate::init_disparity::BorderMaps;
use crate::lightfield::HypothesisGrid;
use crate::sgm::AggregatedVolume;

/// Vertex offset, in hypothesis steps, of the parabola through
/// `(-1, prev), (0, center), (1, next)`. `None` for a flat triple.
pub fn parabola_offset(prev: f64, center: f64, next: f64) -> Option<f64> {
    let curvature = prev - 2.0 * center + next;
    if curvature == 0.0 {
        return None;
    }
    Some((prev - next) / (2.0 * curvature))
}

/// Parabolic interpolation of aggregated costs around each WTA hypothesis.
///
/// A pixel is refined only when its hypothesis `k` lies in
/// `[low + 1, high - 1]` and that interval holds at least three hypotheses;
/// every other pixel keeps its value.
pub fn subpixel_refine(
    dm: &DisparityMap,
    av: &AggregatedVolume,
    borders: &BorderMaps,
    grid: &HypothesisGrid,
) -> DisparityMap {
    let mut out = dm.clone();
    for y in 0..dm.height() {
        for x in 0..dm.width() {
            let Some(d) = dm.get(x, y) else { continue };
            let k = grid.nearest_index(d);
            let lo = borders.low(x, y) as i64 + 1;
            let hi = borders.high(x, y) as i64 - 1;
            let ki = k as i64;
            if hi - lo + 1 < 3 || ki < lo || ki > hi {
                continue;
            }
            let (Some(prev), Some(center), Some(next)) =
                (av.get(x, y, k - 1), av.get(x, y, k), av.get(x, y, k + 1))
            else {
                continue;
            };
            if let Some(offset) = parabola_offset(prev, center, next) {
                out.set(x, y, d + offset * grid.step());
            }
        }
    }
    out
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

/// Median over the valid values of each window, truncated at the image
/// border. Invalid pixels stay invalid.
pub fn median_filter(dm: &DisparityMap, window: usize) -> Result<DisparityMap> {
    if window.is_multiple_of(2) {
        return Err(Error::Config(format!("median window must be odd, got {window}")));
    }
    let r = (window / 2) as i64;
    let (w, h) = (dm.width() as i64, dm.height() as i64);
    let mut out = dm.clone();
    let mut buf = Vec::with_capacity(window * window);
    for y in 0..h {
        for x in 0..w {
            if !dm.is_valid(x as usize, y as usize) {
                continue;
            }
            buf.clear();
            for ny in (y - r).max(0)..=(y + r).min(h - 1) {
                for nx in (x - r).max(0)..=(x + r).min(w - 1) {
                    if let Some(v) = dm.get(nx as usize, ny as usize) {
                        buf.push(v);
                    }
                }
            }
            out.set(x as usize, y as usize, median(&mut buf));
        }
    }
    Ok(out)
}
