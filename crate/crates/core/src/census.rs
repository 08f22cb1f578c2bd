//! Sparse-window Census transform over RGB views and Hamming comparison.

use image::RgbImage;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lightfield::{LightField, ViewCoord};

pub const CHANNELS: usize = 3;

/// Ordered pixel offsets `(i, j)` compared against the window center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusPattern {
    offsets: Vec<(i32, i32)>,
}

impl CensusPattern {
    pub fn new(offsets: Vec<(i32, i32)>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::Config("census pattern must be nonempty".into()));
        }
        if offsets.len() > 64 {
            return Err(Error::Config(format!(
                "census pattern has {} offsets, at most 64 fit a bit string",
                offsets.len()
            )));
        }
        for (k, o) in offsets.iter().enumerate() {
            if *o == (0, 0) {
                return Err(Error::Config("census pattern may not contain (0,0)".into()));
            }
            if offsets[..k].contains(o) {
                return Err(Error::Config(format!(
                    "duplicate census offset ({}, {})",
                    o.0, o.1
                )));
            }
        }
        Ok(Self { offsets })
    }

    /// Sparse 7x7 pattern sampling every other row and column: offsets in
    /// `{-3, -1, 1, 3}^2`, 16 bits per channel.
    pub fn sparse_7x7() -> Self {
        const STEPS: [i32; 4] = [-3, -1, 1, 3];
        let offsets = STEPS
            .iter()
            .flat_map(|&j| STEPS.iter().map(move |&i| (i, j)))
            .collect();
        Self { offsets }
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Largest possible RGB Hamming distance, `3 * |offsets|`.
    pub fn max_rgb_distance(&self) -> u32 {
        (CHANNELS * self.offsets.len()) as u32
    }
}

impl Default for CensusPattern {
    fn default() -> Self {
        Self::sparse_7x7()
    }
}

/// Census bit strings for (a subset of) the views of a light field.
///
/// Each transformed view stores `W * H * 3` words, channel-interleaved.
/// Bit `k` is set when the center is strictly brighter than offset `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusField {
    width: usize,
    height: usize,
    s_count: usize,
    bits: usize,
    views: Vec<Option<Vec<u64>>>,
}

impl CensusField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Bit string width per channel.
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn max_rgb_distance(&self) -> u32 {
        (CHANNELS * self.bits) as u32
    }

    pub fn has_view(&self, c: ViewCoord) -> bool {
        self.views
            .get(c.t * self.s_count + c.s)
            .is_some_and(|v| v.is_some())
    }

    /// The three channel strings of pixel `(x, y)` in view `c`.
    ///
    /// Panics if `c` was not transformed.
    #[inline]
    pub fn pixel(&self, c: ViewCoord, x: usize, y: usize) -> [u64; CHANNELS] {
        let view = self.views[c.t * self.s_count + c.s]
            .as_ref()
            .expect("census view was not transformed");
        let i = (y * self.width + x) * CHANNELS;
        [view[i], view[i + 1], view[i + 2]]
    }
}

/// Census transform of a single RGB image, out-of-image offsets clamped to the edge.
pub fn census_image(img: &RgbImage, pattern: &CensusPattern) -> Vec<u64> {
    let w = img.width() as usize;
    let h = img.height() as usize;
    let raw = img.as_raw();
    let mut out = vec![0u64; w * h * CHANNELS];
    out.par_chunks_mut(w * CHANNELS)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..w {
                let center = &raw[(y * w + x) * 3..(y * w + x) * 3 + 3];
                let mut strings = [0u64; CHANNELS];
                for (k, &(i, j)) in pattern.offsets().iter().enumerate() {
                    let nx = (x as i64 + i as i64).clamp(0, w as i64 - 1) as usize;
                    let ny = (y as i64 + j as i64).clamp(0, h as i64 - 1) as usize;
                    let n = (ny * w + nx) * 3;
                    for c in 0..CHANNELS {
                        if center[c] > raw[n + c] {
                            strings[c] |= 1u64 << k;
                        }
                    }
                }
                row[x * CHANNELS..x * CHANNELS + CHANNELS].copy_from_slice(&strings);
            }
        });
    out
}

/// Transforms every view of the light field.
pub fn census_transform(lf: &LightField, pattern: &CensusPattern) -> CensusField {
    let all: Vec<ViewCoord> = lf.coords().collect();
    census_transform_views(lf, pattern, &all)
}

/// Transforms only the listed views; the rest stay untransformed.
pub fn census_transform_views(
    lf: &LightField,
    pattern: &CensusPattern,
    which: &[ViewCoord],
) -> CensusField {
    let mut views: Vec<Option<Vec<u64>>> = vec![None; lf.s_count() * lf.t_count()];
    for &c in which {
        let idx = lf.view_index(c);
        if views[idx].is_none() {
            views[idx] = Some(census_image(lf.view(c), pattern));
        }
    }
    CensusField {
        width: lf.width(),
        height: lf.height(),
        s_count: lf.s_count(),
        bits: pattern.len(),
        views,
    }
}

/// Number of differing bits between two strings of the same width.
#[inline]
pub fn hamming(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

/// Sum of per-channel Hamming distances between two census pixels.
#[inline]
pub fn rgb_hamming(a: &[u64; CHANNELS], b: &[u64; CHANNELS]) -> u32 {
    hamming(a[0], b[0]) + hamming(a[1], b[1]) + hamming(a[2], b[2])
}

pub fn rgb_census_distance(
    cf: &CensusField,
    view_a: ViewCoord,
    pa: (usize, usize),
    view_b: ViewCoord,
    pb: (usize, usize),
) -> u32 {
    rgb_hamming(&cf.pixel(view_a, pa.0, pa.1), &cf.pixel(view_b, pb.0, pb.1))
}
