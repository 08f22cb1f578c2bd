//! Light field container, hypothesis sampling and cross-view projection.

use image::RgbImage;

use crate::error::{Error, Result};

/// Angular coordinate of a view inside the light field grid.
///
/// `s` runs along the horizontal angular axis and `t` along the vertical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ViewCoord {
    pub s: usize,
    pub t: usize,
}

impl ViewCoord {
    pub const fn new(s: usize, t: usize) -> Self {
        Self { s, t }
    }
}

/// A grid of `S x T` RGB views sharing one resolution.
///
/// Views are stored row-major: view `(s, t)` lives at index `t * S + s`.
/// A 3D light field (one row of views) has `T = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LightField {
    views: Vec<RgbImage>,
    s_count: usize,
    t_count: usize,
    width: usize,
    height: usize,
    d_min: f64,
    d_max: f64,
    reference: ViewCoord,
}

impl LightField {
    /// Builds a light field with the reference view at the grid center.
    pub fn new(
        views: Vec<RgbImage>,
        s_count: usize,
        t_count: usize,
        d_min: f64,
        d_max: f64,
    ) -> Result<Self> {
        if s_count == 0 || t_count == 0 {
            return Err(Error::InvalidInput(
                "angular dimensions must be nonzero".into(),
            ));
        }
        if views.len() != s_count * t_count {
            return Err(Error::InvalidInput(format!(
                "expected {} views for a {}x{} grid, got {}",
                s_count * t_count,
                s_count,
                t_count,
                views.len()
            )));
        }
        if !(d_min < d_max) || !d_min.is_finite() || !d_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "disparity range must satisfy d_min < d_max, got [{d_min}, {d_max}]"
            )));
        }
        let (w, h) = views[0].dimensions();
        if w == 0 || h == 0 {
            return Err(Error::InvalidInput("views must be nonempty".into()));
        }
        for (i, v) in views.iter().enumerate() {
            if v.dimensions() != (w, h) {
                return Err(Error::DimensionMismatch(format!(
                    "view {i} is {}x{}, expected {w}x{h}",
                    v.width(),
                    v.height()
                )));
            }
        }
        Ok(Self {
            views,
            s_count,
            t_count,
            width: w as usize,
            height: h as usize,
            d_min,
            d_max,
            reference: ViewCoord::new((s_count - 1) / 2, (t_count - 1) / 2),
        })
    }

    /// Overrides the reference view.
    pub fn with_reference(mut self, reference: ViewCoord) -> Result<Self> {
        if reference.s >= self.s_count || reference.t >= self.t_count {
            return Err(Error::InvalidInput(format!(
                "reference view ({}, {}) outside the {}x{} grid",
                reference.s, reference.t, self.s_count, self.t_count
            )));
        }
        self.reference = reference;
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn s_count(&self) -> usize {
        self.s_count
    }

    pub fn t_count(&self) -> usize {
        self.t_count
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn reference(&self) -> ViewCoord {
        self.reference
    }

    pub fn view_index(&self, c: ViewCoord) -> usize {
        debug_assert!(c.s < self.s_count && c.t < self.t_count);
        c.t * self.s_count + c.s
    }

    pub fn view(&self, c: ViewCoord) -> &RgbImage {
        &self.views[self.view_index(c)]
    }

    pub fn reference_view(&self) -> &RgbImage {
        self.view(self.reference)
    }

    pub fn views(&self) -> &[RgbImage] {
        &self.views
    }

    /// All view coordinates in storage order.
    pub fn coords(&self) -> impl Iterator<Item = ViewCoord> + '_ {
        (0..self.t_count).flat_map(move |t| (0..self.s_count).map(move |s| ViewCoord::new(s, t)))
    }

    /// The cross-lying views `(ŝ,0), (ŝ,t_max), (0,t̂), (s_max,t̂)`, skipping
    /// any that coincide with the reference view and any duplicates.
    pub fn cross_views(&self) -> Vec<ViewCoord> {
        let r = self.reference;
        let candidates = [
            ViewCoord::new(r.s, 0),
            ViewCoord::new(r.s, self.t_count - 1),
            ViewCoord::new(0, r.t),
            ViewCoord::new(self.s_count - 1, r.t),
        ];
        let mut out: Vec<ViewCoord> = Vec::with_capacity(4);
        for c in candidates {
            if c != r && !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }
}

/// Uniformly spaced disparity hypotheses over `[d_min, d_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisGrid {
    d_min: f64,
    d_max: f64,
    count: usize,
}

impl HypothesisGrid {
    pub fn new(d_min: f64, d_max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Config(format!(
                "hypothesis count must be at least 2, got {count}"
            )));
        }
        if !(d_min < d_max) {
            return Err(Error::Config(format!(
                "hypothesis range must satisfy d_min < d_max, got [{d_min}, {d_max}]"
            )));
        }
        Ok(Self {
            d_min,
            d_max,
            count,
        })
    }

    pub fn for_lightfield(lf: &LightField, count: usize) -> Result<Self> {
        Self::new(lf.d_min(), lf.d_max(), count)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn step(&self) -> f64 {
        (self.d_max - self.d_min) / (self.count - 1) as f64
    }

    /// Disparity of hypothesis `k`. The last index maps to `d_max` exactly.
    pub fn disparity(&self, k: usize) -> f64 {
        debug_assert!(k < self.count);
        if k + 1 == self.count {
            self.d_max
        } else {
            self.d_min + k as f64 * self.step()
        }
    }

    /// Fractional hypothesis index of a disparity value.
    pub fn fractional_index(&self, d: f64) -> f64 {
        (d - self.d_min) / self.step()
    }

    /// Nearest hypothesis index, clamped into `[0, count)`.
    pub fn nearest_index(&self, d: f64) -> usize {
        let k = self.fractional_index(d).round();
        k.clamp(0.0, (self.count - 1) as f64) as usize
    }
}

/// Position in view `view` that matches reference pixel `(u, v)` at disparity `d`.
///
/// No clamping is applied; the caller checks bounds.
pub fn project(u: f64, v: f64, view: ViewCoord, d: f64, reference: ViewCoord) -> (f64, f64) {
    let ds = reference.s as f64 - view.s as f64;
    let dt = reference.t as f64 - view.t as f64;
    (u + ds * d, v + dt * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Bilinear,
    Nearest,
}

/// Nearest integer pixel for `(u, v)`, or `None` when it falls outside the image.
#[inline]
pub fn nearest_pixel(width: usize, height: usize, u: f64, v: f64) -> Option<(usize, usize)> {
    let x = u.round();
    let y = v.round();
    if x < 0.0 || y < 0.0 || x > (width - 1) as f64 || y > (height - 1) as f64 {
        return None;
    }
    Some((x as usize, y as usize))
}

/// Samples an RGB view at a fractional position.
///
/// Returns `None` when the sample footprint leaves the image. For bilinear
/// sampling the footprint is the four surrounding pixels, so any coordinate
/// outside `[0, W-1] x [0, H-1]` is out of bounds.
pub fn sample_view(view: &RgbImage, u: f64, v: f64, mode: SampleMode) -> Option<[f64; 3]> {
    let (w, h) = (view.width() as usize, view.height() as usize);
    match mode {
        SampleMode::Nearest => {
            let (x, y) = nearest_pixel(w, h, u, v)?;
            let p = view.get_pixel(x as u32, y as u32).0;
            Some([p[0] as f64, p[1] as f64, p[2] as f64])
        }
        SampleMode::Bilinear => bilinear(view.as_raw(), w, h, u, v),
    }
}

/// Bilinear sample of an interleaved RGB buffer.
#[inline]
pub(crate) fn bilinear(raw: &[u8], w: usize, h: usize, u: f64, v: f64) -> Option<[f64; 3]> {
    if !(u >= 0.0 && v >= 0.0 && u <= (w - 1) as f64 && v <= (h - 1) as f64) {
        return None;
    }
    let x0 = u.floor() as usize;
    let y0 = v.floor() as usize;
    let fx = u - x0 as f64;
    let fy = v - y0 as f64;
    let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
    let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
    let px = |x: usize, y: usize, c: usize| raw[(y * w + x) * 3 + c] as f64;
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let top = px(x0, y0, c) * (1.0 - fx) + px(x1, y0, c) * fx;
        let bottom = px(x0, y1, c) * (1.0 - fx) + px(x1, y1, c) * fx;
        *o = top * (1.0 - fy) + bottom * fy;
    }
    Some(out)
}
