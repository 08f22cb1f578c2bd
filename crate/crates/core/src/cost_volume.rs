//! Matching-cost volumes over the hypothesis grid.
//!
//! The initial stage compares the reference view with one cross-lying view
//! through Census strings. The final stage compares the reference view with
//! every other view, either by RGB Euclidean distance or by Census distance,
//! and may restrict each pixel to a sub-range of hypotheses.

use rayon::prelude::*;

use crate::census::{rgb_hamming, CensusField};
use crate::error::{Error, Result};
use crate::init_disparity::BorderMaps;
use crate::lightfield::{bilinear, nearest_pixel, project, HypothesisGrid, LightField, ViewCoord};

/// Largest Euclidean distance between two 8-bit RGB values, `255 * sqrt(3)`.
pub const MAX_L2_COST: f64 = 441.672_955_930_063_7;

/// Inclusive hypothesis-index range `[lo, hi]`; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisRange {
    pub lo: usize,
    pub hi: usize,
}

impl HypothesisRange {
    pub const EMPTY: HypothesisRange = HypothesisRange { lo: 1, hi: 0 };

    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    pub fn full(count: usize) -> Self {
        Self { lo: 0, hi: count - 1 }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            self.hi - self.lo + 1
        }
    }

    #[inline]
    pub fn contains(&self, k: usize) -> bool {
        self.lo <= k && k <= self.hi
    }

    pub fn overlaps(&self, other: &HypothesisRange) -> bool {
        !self.is_empty() && !other.is_empty() && self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        if self.is_empty() {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        self.lo..=self.hi
    }
}

/// Per-pixel, per-hypothesis cost with optional per-pixel bounds.
///
/// Entries outside a pixel's bounds are unset; [`CostVolume::get`] returns
/// `None` for them.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVolume {
    width: usize,
    height: usize,
    count: usize,
    costs: Vec<f32>,
    bounds: Option<Vec<HypothesisRange>>,
    sampled_count: u64,
}

impl CostVolume {
    /// Builds a volume by evaluating `cost(x, y, k)` on every in-bounds entry,
    /// rows in parallel.
    pub fn build<F>(
        width: usize,
        height: usize,
        count: usize,
        bounds: Option<Vec<HypothesisRange>>,
        cost: F,
    ) -> Self
    where
        F: Fn(usize, usize, usize) -> f32 + Sync,
    {
        if let Some(b) = &bounds {
            assert_eq!(b.len(), width * height, "bounds must cover every pixel");
            assert!(b.iter().all(|r| r.is_empty() || r.hi < count));
        }
        let mut costs = vec![f32::NAN; width * height * count];
        let sampled_count: u64 = costs
            .par_chunks_mut(width * count)
            .enumerate()
            .map(|(y, row)| {
                let mut n = 0u64;
                for x in 0..width {
                    let range = match &bounds {
                        Some(b) => b[y * width + x],
                        None => HypothesisRange::full(count),
                    };
                    let cell = &mut row[x * count..(x + 1) * count];
                    for k in range.iter() {
                        cell[k] = cost(x, y, k);
                    }
                    n += range.len() as u64;
                }
                n
            })
            .sum();
        Self {
            width,
            height,
            count,
            costs,
            bounds,
            sampled_count,
        }
    }

    /// Wraps a dense set of costs (row-major pixels, hypotheses innermost).
    pub fn from_dense(width: usize, height: usize, count: usize, costs: Vec<f32>) -> Result<Self> {
        Self::from_parts(width, height, count, costs, None)
    }

    /// Wraps dense costs with per-pixel bounds; entries outside the bounds are ignored.
    pub fn from_parts(
        width: usize,
        height: usize,
        count: usize,
        costs: Vec<f32>,
        bounds: Option<Vec<HypothesisRange>>,
    ) -> Result<Self> {
        if costs.len() != width * height * count {
            return Err(Error::DimensionMismatch(format!(
                "{} costs for a {width}x{height}x{count} volume",
                costs.len()
            )));
        }
        if let Some(b) = &bounds {
            if b.len() != width * height {
                return Err(Error::DimensionMismatch(format!(
                    "{} bounds for {} pixels",
                    b.len(),
                    width * height
                )));
            }
            if b.iter().any(|r| !r.is_empty() && r.hi >= count) {
                return Err(Error::InvalidInput("bound exceeds hypothesis count".into()));
            }
        }
        let mut v = Self::build(width, height, count, bounds, |x, y, k| {
            costs[(y * width + x) * count + k]
        });
        if v.costs.iter().any(|c| !c.is_nan() && (*c < 0.0 || !c.is_finite())) {
            return Err(Error::InvalidInput("costs must be finite and nonnegative".into()));
        }
        v.costs.shrink_to_fit();
        Ok(v)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of hypotheses `N_d`.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn bounds(&self) -> Option<&[HypothesisRange]> {
        self.bounds.as_deref()
    }

    #[inline]
    pub fn range(&self, x: usize, y: usize) -> HypothesisRange {
        match &self.bounds {
            Some(b) => b[y * self.width + x],
            None => HypothesisRange::full(self.count),
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, k: usize) -> Option<f32> {
        if !self.range(x, y).contains(k) {
            return None;
        }
        Some(self.costs[(y * self.width + x) * self.count + k])
    }

    /// Cost slice of one pixel over all hypotheses; only entries inside
    /// [`CostVolume::range`] are meaningful.
    #[inline]
    pub(crate) fn cell(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.count;
        &self.costs[i..i + self.count]
    }

    /// Number of `(pixel, hypothesis)` pairs that were evaluated.
    pub fn sampled_count(&self) -> u64 {
        self.sampled_count
    }

    /// Set entries as `(x, y, k, cost)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f32)> + '_ {
        (0..self.height).flat_map(move |y| {
            (0..self.width).flat_map(move |x| {
                self.range(x, y)
                    .iter()
                    .map(move |k| (x, y, k, self.costs[(y * self.width + x) * self.count + k]))
            })
        })
    }

    /// Little-endian dump: `width, height, count` as u32, then every cost as
    /// f32 with unset entries written as NaN.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.costs.len() * 4);
        for v in [self.width, self.height, self.count] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for c in &self.costs {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }
}

fn border_ranges(borders: Option<&BorderMaps>, lf: &LightField, grid: &HypothesisGrid) -> Option<Vec<HypothesisRange>> {
    borders.map(|b| {
        assert_eq!(
            (b.width(), b.height()),
            (lf.width(), lf.height()),
            "borders must match the light field resolution"
        );
        assert_eq!(b.count(), grid.count(), "borders must match the hypothesis grid");
        b.ranges()
    })
}

/// Census cost between the reference view and one cross-lying view.
///
/// Projections use nearest-neighbor sampling; projections that leave the
/// image cost the maximum `3 * |pattern|`.
pub fn cross_view_cost(
    cf: &CensusField,
    cross_view: ViewCoord,
    reference: ViewCoord,
    grid: &HypothesisGrid,
) -> Result<CostVolume> {
    if cross_view == reference {
        return Err(Error::InvalidInput(
            "cross view must differ from the reference view".into(),
        ));
    }
    let (w, h) = (cf.width(), cf.height());
    let max = cf.max_rgb_distance() as f32;
    let disparities: Vec<f64> = (0..grid.count()).map(|k| grid.disparity(k)).collect();
    Ok(CostVolume::build(w, h, grid.count(), None, |x, y, k| {
        let (u, v) = project(x as f64, y as f64, cross_view, disparities[k], reference);
        match nearest_pixel(w, h, u, v) {
            Some((px, py)) => {
                rgb_hamming(&cf.pixel(reference, x, y), &cf.pixel(cross_view, px, py)) as f32
            }
            None => max,
        }
    }))
}

/// All-views Euclidean RGB cost, averaged over views with in-bounds projections.
///
/// Uses bilinear sampling. Pixels where no view projects inside its image
/// get [`MAX_L2_COST`].
pub fn allviews_cost_l2(
    lf: &LightField,
    grid: &HypothesisGrid,
    borders: Option<&BorderMaps>,
) -> CostVolume {
    let (w, h) = (lf.width(), lf.height());
    let reference = lf.reference();
    let ref_raw = lf.reference_view().as_raw();
    let others: Vec<(ViewCoord, &[u8])> = lf
        .coords()
        .filter(|&c| c != reference)
        .map(|c| (c, lf.view(c).as_raw().as_slice()))
        .collect();
    let disparities: Vec<f64> = (0..grid.count()).map(|k| grid.disparity(k)).collect();
    let bounds = border_ranges(borders, lf, grid);
    CostVolume::build(w, h, grid.count(), bounds, |x, y, k| {
        let i = (y * w + x) * 3;
        let r = [ref_raw[i] as f64, ref_raw[i + 1] as f64, ref_raw[i + 2] as f64];
        let mut sum = 0.0f64;
        let mut n = 0u32;
        for &(c, raw) in &others {
            let (u, v) = project(x as f64, y as f64, c, disparities[k], reference);
            if let Some(p) = bilinear(raw, w, h, u, v) {
                let d0 = r[0] - p[0];
                let d1 = r[1] - p[1];
                let d2 = r[2] - p[2];
                sum += (d0 * d0 + d1 * d1 + d2 * d2).sqrt();
                n += 1;
            }
        }
        if n == 0 {
            MAX_L2_COST as f32
        } else {
            (sum / n as f64) as f32
        }
    })
}

/// All-views Census cost, averaged over views with in-bounds projections.
///
/// Uses nearest-neighbor sampling. `cf` must contain every view of `lf`.
pub fn allviews_cost_census(
    lf: &LightField,
    cf: &CensusField,
    grid: &HypothesisGrid,
    borders: Option<&BorderMaps>,
) -> CostVolume {
    let (w, h) = (lf.width(), lf.height());
    let reference = lf.reference();
    let others: Vec<ViewCoord> = lf.coords().filter(|&c| c != reference).collect();
    assert!(
        others.iter().all(|&c| cf.has_view(c)) && cf.has_view(reference),
        "census field must cover every view"
    );
    let max = cf.max_rgb_distance() as f32;
    let disparities: Vec<f64> = (0..grid.count()).map(|k| grid.disparity(k)).collect();
    let bounds = border_ranges(borders, lf, grid);
    CostVolume::build(w, h, grid.count(), bounds, |x, y, k| {
        let r = cf.pixel(reference, x, y);
        let mut sum = 0u32;
        let mut n = 0u32;
        for &c in &others {
            let (u, v) = project(x as f64, y as f64, c, disparities[k], reference);
            if let Some((px, py)) = nearest_pixel(w, h, u, v) {
                sum += rgb_hamming(&r, &cf.pixel(c, px, py));
                n += 1;
            }
        }
        if n == 0 {
            max
        } else {
            (sum as f64 / n as f64) as f32
        }
    })
}
