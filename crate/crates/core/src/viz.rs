//! Colormapped PNG rendering of disparity maps.
//!
//! `[d_min, d_max]` maps linearly onto the viridis colormap (piecewise
//! linear through nine reference colors); values outside the range are
//! clamped and invalid pixels are black.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::disparity::DisparityMap;
use crate::error::{Error, Result};

const VIRIDIS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [71.0, 44.0, 122.0],
    [59.0, 81.0, 139.0],
    [44.0, 113.0, 142.0],
    [33.0, 144.0, 141.0],
    [39.0, 173.0, 129.0],
    [92.0, 200.0, 99.0],
    [170.0, 220.0, 50.0],
    [253.0, 231.0, 37.0],
];

/// Viridis color for `t` in `[0, 1]`.
pub fn viridis(t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let i = (t.floor() as usize).min(VIRIDIS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    Rgb([0, 1, 2].map(|c| (a[c] + (b[c] - a[c]) * f).round() as u8))
}

pub fn colorize(dm: &DisparityMap, d_min: f64, d_max: f64) -> RgbImage {
    let span = d_max - d_min;
    RgbImage::from_fn(dm.width() as u32, dm.height() as u32, |x, y| {
        match dm.get(x as usize, y as usize) {
            Some(d) => viridis((d - d_min) / span),
            None => Rgb([0, 0, 0]),
        }
    })
}

pub fn write_png(path: impl AsRef<Path>, dm: &DisparityMap, d_min: f64, d_max: f64) -> Result<()> {
    let path = path.as_ref();
    colorize(dm, d_min, d_max)
        .save(path)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_invalid() {
        assert_eq!(viridis(0.0), Rgb([68, 1, 84]));
        assert_eq!(viridis(1.0), Rgb([253, 231, 37]));
        assert_eq!(viridis(-3.0), viridis(0.0));
        let dm = DisparityMap::from_values(3, 1, vec![-1.0, f64::NAN, 1.0]).unwrap();
        let img = colorize(&dm, -1.0, 1.0);
        assert_eq!(*img.get_pixel(1, 0), Rgb([0, 0, 0]));
        assert_eq!(*img.get_pixel(0, 0), viridis(0.0));
        assert_eq!(*img.get_pixel(2, 0), viridis(1.0));
    }
}
