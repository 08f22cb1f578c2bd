use crate::error::{Error, Result};

/// Dense per-pixel disparity in pixels per unit angular step.
///
/// Invalid pixels hold `NaN`. Equality treats two invalid pixels as equal.
#[derive(Debug, Clone)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl PartialEq for DisparityMap {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a == b || (a.is_nan() && b.is_nan()))
    }
}

impl DisparityMap {
    pub const INVALID: f64 = f64::NAN;

    pub fn new_invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![Self::INVALID; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    /// Wraps row-major values; non-finite entries are treated as invalid.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} map",
                values.len()
            )));
        }
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v } else { Self::INVALID })
            .collect();
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let v = self.values[y * self.width + x];
        (!v.is_nan()).then_some(v)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.values[y * self.width + x] = value;
    }

    #[inline]
    pub fn invalidate(&mut self, x: usize, y: usize) {
        self.values[y * self.width + x] = Self::INVALID;
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        !self.values[y * self.width + x].is_nan()
    }

    /// Raw row-major values, `NaN` for invalid pixels.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|v| !v.is_nan()).count()
    }

    pub fn validity_mask(&self) -> Vec<bool> {
        self.values.iter().map(|v| !v.is_nan()).collect()
    }

    pub fn same_shape(&self, other: &DisparityMap) -> bool {
        self.width == other.width && self.height == other.height
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_pixels_compare_equal() {
        let mut m = DisparityMap::filled(2, 2, 1.0);
        m.invalidate(1, 0);
        assert_eq!(m.get(1, 0), None);
        assert_eq!(m.valid_count(), 3);
        assert_eq!(m, m.clone());
        let mut n = m.clone();
        n.set(1, 0, 1.0);
        assert_ne!(m, n);
    }

    #[test]
    fn from_values_checks_len_and_sanitizes() {
        assert!(DisparityMap::from_values(2, 2, vec![0.0; 3]).is_err());
        let m = DisparityMap::from_values(2, 1, vec![f64::INFINITY, 0.5]).unwrap();
        assert!(!m.is_valid(0, 0));
        assert_eq!(m.get(1, 0), Some(0.5));
    }
}
