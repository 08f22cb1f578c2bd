//! Quality and throughput metrics for disparity maps.

use serde::{Deserialize, Serialize};

use crate::cost_volume::CostVolume;
use crate::disparity::DisparityMap;
use crate::error::{Error, Result};

/// Default BadPix threshold in disparity units.
pub const BADPIX_THRESHOLD: f64 = 0.07;

/// Pixels taking part in an evaluation: valid in the ground truth and, when a
/// margin is set, at least `margin` pixels away from every image border.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalRegion {
    pub margin: usize,
}

impl EvalRegion {
    pub fn with_margin(margin: usize) -> Self {
        Self { margin }
    }

    fn contains(&self, x: usize, y: usize, w: usize, h: usize) -> bool {
        x >= self.margin
            && y >= self.margin
            && x + self.margin < w
            && y + self.margin < h
    }
}

fn check_shape(dm: &DisparityMap, gt: &DisparityMap) -> Result<()> {
    if !dm.same_shape(gt) {
        return Err(Error::DimensionMismatch(format!(
            "disparity is {}x{}, ground truth is {}x{}",
            dm.width(),
            dm.height(),
            gt.width(),
            gt.height()
        )));
    }
    Ok(())
}

/// `(estimate, truth)` for every evaluated pixel; invalid estimates are `None`.
fn evaluated<'a>(
    dm: &'a DisparityMap,
    gt: &'a DisparityMap,
    region: EvalRegion,
) -> impl Iterator<Item = (Option<f64>, f64)> + 'a {
    let (w, h) = (gt.width(), gt.height());
    (0..h).flat_map(move |y| {
        (0..w).filter_map(move |x| {
            if !region.contains(x, y, w, h) {
                return None;
            }
            gt.get(x, y).map(|g| (dm.get(x, y), g))
        })
    })
}

/// Percentage of evaluated pixels whose absolute error exceeds `threshold`.
/// Invalid estimates count as bad.
pub fn badpix(dm: &DisparityMap, gt: &DisparityMap, threshold: f64, region: EvalRegion) -> Result<f64> {
    check_shape(dm, gt)?;
    let (mut bad, mut total) = (0usize, 0usize);
    for (d, g) in evaluated(dm, gt, region) {
        total += 1;
        if d.is_none_or(|d| (d - g).abs() > threshold) {
            bad += 1;
        }
    }
    if total == 0 {
        return Err(Error::InvalidInput("no pixels to evaluate".into()));
    }
    Ok(100.0 * bad as f64 / total as f64)
}

/// Mean squared error over evaluated pixels with a valid estimate, times
/// `scale` (100 for the benchmark convention, 1 for raw MSE).
pub fn mse(dm: &DisparityMap, gt: &DisparityMap, scale: f64, region: EvalRegion) -> Result<f64> {
    check_shape(dm, gt)?;
    let (mut sum, mut n) = (0.0f64, 0usize);
    for (d, g) in evaluated(dm, gt, region) {
        if let Some(d) = d {
            sum += (d - g) * (d - g);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidInput("no pixels to evaluate".into()));
    }
    Ok(scale * sum / n as f64)
}

/// Mean absolute error over evaluated pixels with a valid estimate.
pub fn mean_abs_error(dm: &DisparityMap, gt: &DisparityMap, region: EvalRegion) -> Result<f64> {
    check_shape(dm, gt)?;
    let (mut sum, mut n) = (0.0f64, 0usize);
    for (d, g) in evaluated(dm, gt, region) {
        if let Some(d) = d {
            sum += (d - g).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidInput("no pixels to evaluate".into()));
    }
    Ok(sum / n as f64)
}

/// Correctly estimated pixels per second: `(100 - badpix) / runtime`.
pub fn m_metric(badpix: f64, runtime_seconds: f64) -> Result<f64> {
    if !(runtime_seconds > 0.0) {
        return Err(Error::InvalidInput(format!(
            "runtime must be positive, got {runtime_seconds}"
        )));
    }
    Ok((100.0 - badpix) / runtime_seconds)
}

/// Fraction of the full `W x H x N_d` volume that was actually evaluated.
pub fn sampled_fraction(cv: &CostVolume) -> f64 {
    cv.sampled_count() as f64 / (cv.width() * cv.height() * cv.count()) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub badpix_percent: f64,
    pub badpix_threshold: f64,
    pub mse: f64,
    pub runtime_seconds: f64,
    pub m_metric: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_fraction: Option<f64>,
}

impl EvalReport {
    pub fn compute(
        dm: &DisparityMap,
        gt: &DisparityMap,
        runtime_seconds: f64,
        sampled_fraction: Option<f64>,
        mse_scale: f64,
        region: EvalRegion,
    ) -> Result<Self> {
        let bp = badpix(dm, gt, BADPIX_THRESHOLD, region)?;
        Ok(Self {
            badpix_percent: bp,
            badpix_threshold: BADPIX_THRESHOLD,
            mse: mse(dm, gt, mse_scale, region)?,
            runtime_seconds,
            m_metric: m_metric(bp, runtime_seconds)?,
            sampled_fraction,
        })
    }

    /// Line-oriented `key=value` rendering.
    pub fn to_key_value(&self) -> String {
        let mut s = format!(
            "badpix={:.4}\nbadpix_threshold={}\nmse={:.4}\nruntime_seconds={:.6}\nm_metric={:.4}\n",
            self.badpix_percent, self.badpix_threshold, self.mse, self.runtime_seconds, self.m_metric
        );
        if let Some(f) = self.sampled_fraction {
            s.push_str(&format!("sampled_fraction={f:.6}\n"));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_volume::HypothesisRange;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn map(w: usize, h: usize, v: Vec<f64>) -> DisparityMap {
        DisparityMap::from_values(w, h, v).unwrap()
    }

    #[test]
    fn badpix_fixtures() {
        let gt = map(4, 1, vec![0.0, 1.0, 2.0, 3.0]);
        let all = EvalRegion::default();
        assert_eq!(badpix(&gt, &gt, 0.07, all).unwrap(), 0.0);
        let off = map(4, 1, vec![0.08, 1.08, 2.08, 3.08]);
        assert_eq!(badpix(&off, &gt, 0.07, all).unwrap(), 100.0);
        let half = map(4, 1, vec![1.0, 1.0, 3.0, 3.0]);
        assert_eq!(badpix(&half, &gt, 0.07, all).unwrap(), 50.0);
        let invalid = map(4, 1, vec![f64::NAN, 1.0, 2.0, 3.0]);
        assert_eq!(badpix(&invalid, &gt, 0.07, all).unwrap(), 25.0);
        assert!(badpix(&map(2, 1, vec![0.0; 2]), &gt, 0.07, all).is_err());
    }

    #[test]
    fn badpix_ignores_invalid_truth_and_margin() {
        let gt = map(3, 3, vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, f64::NAN]);
        let dm = map(3, 3, vec![5.0; 9]);
        assert_eq!(badpix(&dm, &gt, 0.07, EvalRegion::with_margin(1)).unwrap(), 100.0);
        let dm = map(3, 3, vec![1.0; 9]);
        assert_eq!(badpix(&dm, &gt, 0.07, EvalRegion::with_margin(1)).unwrap(), 0.0);
        assert_eq!(badpix(&dm, &gt, 0.07, EvalRegion::default()).unwrap(), 100.0 * 7.0 / 8.0);
    }

    #[test]
    fn mse_fixtures() {
        let gt = map(2, 2, vec![0.5; 4]);
        assert_eq!(mse(&gt, &gt, 100.0, EvalRegion::default()).unwrap(), 0.0);
        let off = map(2, 2, vec![0.6; 4]);
        assert!((mse(&off, &gt, 100.0, EvalRegion::default()).unwrap() - 1.0).abs() < 1e-12);
        assert!((mse(&off, &gt, 1.0, EvalRegion::default()).unwrap() - 0.01).abs() < 1e-14);
    }

    #[test]
    fn mse_matches_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<f64> = (0..30).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..30).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut s = 0.0;
        for i in 0..30 {
            s += (a[i] - b[i]).powi(2);
        }
        let got = mse(&map(6, 5, a), &map(6, 5, b), 100.0, EvalRegion::default()).unwrap();
        assert!((got - 100.0 * s / 30.0).abs() < 1e-12);
    }

    #[test]
    fn m_metric_fixtures() {
        assert_eq!(m_metric(20.0, 2.0).unwrap(), 40.0);
        assert_eq!(m_metric(0.0, 1.0).unwrap(), 100.0);
        assert!(m_metric(10.0, 0.0).is_err());
        assert!(m_metric(10.0, -1.0).is_err());
    }

    #[test]
    fn reference_row_formatting() {
        // Benchmark-style row (BadPix 11.92, M 48.33 %/s). The columns are
        // per-scene medians taken independently, so only the rendering is
        // checked here.
        let r = EvalReport {
            badpix_percent: 11.92,
            badpix_threshold: 0.07,
            mse: 3.97,
            runtime_seconds: 10f64.powf(0.25),
            m_metric: 48.33,
            sampled_fraction: None,
        };
        let kv = r.to_key_value();
        assert!(kv.contains("badpix=11.9200"));
        assert!(kv.contains("m_metric=48.3300"));
        assert!(!kv.contains("sampled_fraction"));
        let back: EvalReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn sampled_fraction_fixtures() {
        let full = CostVolume::from_dense(2, 2, 64, vec![0.0; 256]).unwrap();
        assert_eq!(sampled_fraction(&full), 1.0);
        let bounded = CostVolume::from_parts(
            2,
            2,
            64,
            vec![0.0; 256],
            Some(vec![HypothesisRange::new(3, 7); 4]),
        )
        .unwrap();
        assert!((sampled_fraction(&bounded) - 5.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_fraction_matches_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let bounds: Vec<HypothesisRange> = (0..20)
            .map(|_| {
                if rng.random_bool(0.3) {
                    HypothesisRange::full(16)
                } else {
                    let lo = rng.random_range(0..16);
                    HypothesisRange::new(lo, (lo + 4).min(15))
                }
            })
            .collect();
        let mut count = 0usize;
        for b in &bounds {
            for k in 0..16 {
                if b.lo <= k && k <= b.hi {
                    count += 1;
                }
            }
        }
        let cv = CostVolume::from_parts(5, 4, 16, vec![1.0; 320], Some(bounds)).unwrap();
        assert_eq!(sampled_fraction(&cv), count as f64 / 320.0);
    }

    proptest! {
        #[test]
        fn badpix_monotone_in_threshold(seed in 0u64..1000, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = map(5, 5, (0..25).map(|_| rng.random_range(0.0..1.0)).collect());
            let b = map(5, 5, (0..25).map(|_| rng.random_range(0.0..1.0)).collect());
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(badpix(&a, &b, hi, EvalRegion::default()).unwrap()
                <= badpix(&a, &b, lo, EvalRegion::default()).unwrap());
        }

        #[test]
        fn m_metric_decreasing(b in 0.0f64..99.0, r in 0.01f64..100.0, db in 0.01f64..1.0, dr in 0.01f64..10.0) {
            prop_assert!(m_metric(b + db, r).unwrap() < m_metric(b, r).unwrap());
            prop_assert!(m_metric(b, r + dr).unwrap() < m_metric(b, r).unwrap());
        }

        #[test]
        fn metrics_permutation_invariant(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
            let b: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
            let mut perm: Vec<usize> = (0..16).collect();
            for i in (1..16).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let pa: Vec<f64> = perm.iter().map(|&i| a[i]).collect();
            let pb: Vec<f64> = perm.iter().map(|&i| b[i]).collect();
            let all = EvalRegion::default();
            prop_assert_eq!(
                badpix(&map(4, 4, a.clone()), &map(4, 4, b.clone()), 0.2, all).unwrap(),
                badpix(&map(4, 4, pa.clone()), &map(4, 4, pb.clone()), 0.2, all).unwrap()
            );
            let m1 = mse(&map(4, 4, a), &map(4, 4, b), 100.0, all).unwrap();
            let m2 = mse(&map(4, 4, pa), &map(4, 4, pb), 100.0, all).unwrap();
            prop_assert!((m1 - m2).abs() < 1e-12);
        }
    }
}
