//! Semi-global matching over full-range or per-pixel bounded cost volumes.
//!
//! Path costs follow the classic recurrence
//!
//! ```text
//! L_r(p, k) = C(p, k) + min( L_r(p - r, k),
//!                            L_r(p - r, k - 1) + P1,
//!                            L_r(p - r, k + 1) + P1,
//!                            min_t L_r(p - r, t) + P2 )
//! ```
//!
//! where `k` is a hypothesis index. Each path walks the image along `r`; a
//! pixel whose predecessor `p - r` lies outside the image starts a new path.
//! With bounded volumes the recurrence only reads predecessor hypotheses
//! inside the predecessor's range, and a predecessor whose range does not
//! intersect the current one restarts the path.

use rayon::prelude::*;

use crate::cost_volume::{CostVolume, HypothesisRange};
use crate::disparity::DisparityMap;
use crate::error::{Error, Result};
use crate::lightfield::HypothesisGrid;

/// Path direction `(du, dv)` in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction {
    pub du: i32,
    pub dv: i32,
}

impl Direction {
    pub const fn new(du: i32, dv: i32) -> Self {
        Self { du, dv }
    }

    pub fn reversed(self) -> Self {
        Self::new(-self.du, -self.dv)
    }

    /// The four axis-aligned directions.
    pub fn axes() -> Vec<Direction> {
        vec![
            Direction::new(1, 0),
            Direction::new(-1, 0),
            Direction::new(0, 1),
            Direction::new(0, -1),
        ]
    }

    /// Axis-aligned plus diagonal directions.
    pub fn compass() -> Vec<Direction> {
        let mut d = Self::axes();
        d.extend([
            Direction::new(1, 1),
            Direction::new(-1, -1),
            Direction::new(1, -1),
            Direction::new(-1, 1),
        ]);
        d
    }

    /// Compass directions plus the eight knight steps `(±2,±1), (±1,±2)`.
    pub fn sixteen() -> Vec<Direction> {
        let mut d = Self::compass();
        d.extend([
            Direction::new(2, 1),
            Direction::new(-2, -1),
            Direction::new(2, -1),
            Direction::new(-2, 1),
            Direction::new(1, 2),
            Direction::new(-1, -2),
            Direction::new(1, -2),
            Direction::new(-1, 2),
        ]);
        d
    }

    /// Standard direction set by size: 4, 8 or 16.
    pub fn set(n: usize) -> Result<Vec<Direction>> {
        match n {
            4 => Ok(Self::axes()),
            8 => Ok(Self::compass()),
            16 => Ok(Self::sixteen()),
            _ => Err(Error::Config(format!(
                "direction count must be 4, 8 or 16, got {n}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgmParams {
    p1: f64,
    p2: f64,
    directions: Vec<Direction>,
}

impl SgmParams {
    pub fn new(p1: f64, p2: f64, directions: Vec<Direction>) -> Result<Self> {
        if !(0.0 <= p1 && p1 <= p2) || !p2.is_finite() {
            return Err(Error::Config(format!(
                "penalties must satisfy 0 <= P1 <= P2, got P1={p1}, P2={p2}"
            )));
        }
        if directions.is_empty() {
            return Err(Error::Config("at least one SGM direction is required".into()));
        }
        for (i, d) in directions.iter().enumerate() {
            if d.du == 0 && d.dv == 0 {
                return Err(Error::Config("SGM direction (0,0) is not allowed".into()));
            }
            if directions[..i].contains(d) {
                return Err(Error::Config(format!(
                    "duplicate SGM direction ({}, {})",
                    d.du, d.dv
                )));
            }
        }
        Ok(Self { p1, p2, directions })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }
}

/// Aggregated costs with the same shape and bounds as the source volume.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedVolume {
    width: usize,
    height: usize,
    count: usize,
    values: Vec<f64>,
    bounds: Option<Vec<HypothesisRange>>,
}

impl AggregatedVolume {
    fn zeros_like(cv: &CostVolume) -> Self {
        Self {
            width: cv.width(),
            height: cv.height(),
            count: cv.count(),
            values: vec![0.0; cv.width() * cv.height() * cv.count()],
            bounds: cv.bounds().map(|b| b.to_vec()),
        }
    }

    /// Wraps precomputed aggregated costs (row-major pixels, hypotheses innermost).
    pub fn from_parts(
        width: usize,
        height: usize,
        count: usize,
        values: Vec<f64>,
        bounds: Option<Vec<HypothesisRange>>,
    ) -> Result<Self> {
        if values.len() != width * height * count {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height}x{count} volume",
                values.len()
            )));
        }
        if let Some(b) = &bounds {
            if b.len() != width * height || b.iter().any(|r| !r.is_empty() && r.hi >= count) {
                return Err(Error::InvalidInput("bounds do not fit the volume".into()));
            }
        }
        Ok(Self {
            width,
            height,
            count,
            values,
            bounds,
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

    #[inline]
    pub fn range(&self, x: usize, y: usize) -> HypothesisRange {
        match &self.bounds {
            Some(b) => b[y * self.width + x],
            None => HypothesisRange::full(self.count),
        }
    }

    pub fn bounds(&self) -> Option<&[HypothesisRange]> {
        self.bounds.as_deref()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, k: usize) -> Option<f64> {
        self.range(x, y)
            .contains(k)
            .then(|| self.values[(y * self.width + x) * self.count + k])
    }

    /// Index of the minimal entry inside the pixel's range, ties toward the
    /// smallest index. `None` for pixels with an empty range.
    pub fn argmin(&self, x: usize, y: usize) -> Option<usize> {
        let base = (y * self.width + x) * self.count;
        let mut best: Option<(usize, f64)> = None;
        for k in self.range(x, y).iter() {
            let c = self.values[base + k];
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((k, c));
            }
        }
        best.map(|(k, _)| k)
    }
}

/// Pixels visited by one path, in traversal order.
fn paths(width: usize, height: usize, r: Direction) -> Vec<Vec<(usize, usize)>> {
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < width as i64 && y < height as i64;
    let mut out = Vec::new();
    for y in 0..height as i64 {
        for x in 0..width as i64 {
            if inside(x - r.du as i64, y - r.dv as i64) {
                continue;
            }
            let mut path = Vec::new();
            let (mut px, mut py) = (x, y);
            while inside(px, py) {
                path.push((px as usize, py as usize));
                px += r.du as i64;
                py += r.dv as i64;
            }
            out.push(path);
        }
    }
    out
}

/// Runs the recurrence along one path, writing `len * count` path costs.
fn run_path(cv: &CostVolume, path: &[(usize, usize)], p1: f64, p2: f64) -> Vec<f64> {
    let n = cv.count();
    let mut out = vec![f64::NAN; path.len() * n];
    let mut prev_range = HypothesisRange::EMPTY;
    for (i, &(x, y)) in path.iter().enumerate() {
        let range = cv.range(x, y);
        let cost = cv.cell(x, y);
        let (done, rest) = out.split_at_mut(i * n);
        let cur = &mut rest[..n];
        if i == 0 || !range.overlaps(&prev_range) {
            for k in range.iter() {
                cur[k] = cost[k] as f64;
            }
        } else {
            let prev = &done[(i - 1) * n..i * n];
            let mut min_prev = f64::INFINITY;
            for t in prev_range.iter() {
                min_prev = min_prev.min(prev[t]);
            }
            let jump = min_prev + p2;
            for k in range.iter() {
                let mut best = jump;
                if prev_range.contains(k) {
                    best = best.min(prev[k]);
                }
                if k > 0 && prev_range.contains(k - 1) {
                    best = best.min(prev[k - 1] + p1);
                }
                if prev_range.contains(k + 1) {
                    best = best.min(prev[k + 1] + p1);
                }
                cur[k] = cost[k] as f64 + best;
            }
        }
        prev_range = range;
    }
    out
}

/// Adds the path costs of direction `r` into `acc`.
fn accumulate_direction(cv: &CostVolume, r: Direction, p1: f64, p2: f64, acc: &mut AggregatedVolume) {
    let n = cv.count();
    let w = cv.width();
    let paths = paths(cv.width(), cv.height(), r);
    let costs: Vec<Vec<f64>> = paths.par_iter().map(|p| run_path(cv, p, p1, p2)).collect();
    // Every pixel lies on exactly one path per direction.
    for (path, values) in paths.iter().zip(costs) {
        for (i, &(x, y)) in path.iter().enumerate() {
            let base = (y * w + x) * n;
            for k in cv.range(x, y).iter() {
                acc.values[base + k] += values[i * n + k];
            }
        }
    }
}

/// Path costs `L_r` for a single direction.
pub fn aggregate_direction(cv: &CostVolume, r: Direction, params: &SgmParams) -> AggregatedVolume {
    debug_assert!(params.directions().contains(&r));
    let mut acc = AggregatedVolume::zeros_like(cv);
    accumulate_direction(cv, r, params.p1, params.p2, &mut acc);
    acc
}

/// Sum of path costs over every direction in `params`.
pub fn aggregate_all(cv: &CostVolume, params: &SgmParams) -> AggregatedVolume {
    let mut acc = AggregatedVolume::zeros_like(cv);
    for &r in params.directions() {
        accumulate_direction(cv, r, params.p1, params.p2, &mut acc);
    }
    acc
}

/// Winner-takes-all per pixel. Pixels with no set hypotheses are invalid.
pub fn wta(av: &AggregatedVolume, grid: &HypothesisGrid) -> DisparityMap {
    assert_eq!(av.count(), grid.count(), "volume and grid disagree on N_d");
    let mut dm = DisparityMap::new_invalid(av.width(), av.height());
    for y in 0..av.height() {
        for x in 0..av.width() {
            if let Some(k) = av.argmin(x, y) {
                dm.set(x, y, grid.disparity(k));
            }
        }
    }
    dm
}


#[cfg(test)]
mod tests {
    use super::oracle::PathOracle;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn volume(w: usize, h: usize, n: usize, rows: &[&[f32]]) -> CostVolume {
        let costs: Vec<f32> = rows.iter().flat_map(|r| r.iter().cloned()).collect();
        CostVolume::from_dense(w, h, n, costs).unwrap()
    }

    fn random_volume(rng: &mut ChaCha8Rng, w: usize, h: usize, n: usize, bounded: bool) -> CostVolume {
        let costs: Vec<f32> = (0..w * h * n).map(|_| rng.random_range(0..50) as f32).collect();
        let bounds = bounded.then(|| {
            (0..w * h)
                .map(|_| {
                    let lo = rng.random_range(0..n);
                    HypothesisRange::new(lo, rng.random_range(lo..n))
                })
                .collect()
        });
        CostVolume::from_parts(w, h, n, costs, bounds).unwrap()
    }

    #[test]
    fn base_case_is_raw_cost() {
        let cv = volume(3, 1, 2, &[&[4.0, 7.0], &[1.0, 1.0], &[2.0, 0.0]]);
        let p = SgmParams::new(1.0, 2.0, vec![Direction::new(1, 0)]).unwrap();
        let l = aggregate_direction(&cv, Direction::new(1, 0), &p);
        assert_eq!(l.get(0, 0, 0), Some(4.0));
        assert_eq!(l.get(0, 0, 1), Some(7.0));
    }

    #[test]
    fn hand_recursion_three_pixels() {
        let cv = volume(3, 1, 2, &[&[0.0, 9.0], &[9.0, 0.0], &[0.0, 9.0]]);
        let r = Direction::new(1, 0);
        let p = SgmParams::new(1.0, 2.0, vec![r]).unwrap();
        let l = aggregate_direction(&cv, r, &p);
        assert_eq!(l.get(1, 0, 0), Some(9.0));
        assert_eq!(l.get(1, 0, 1), Some(1.0));
        assert_eq!(l.get(2, 0, 0), Some(2.0));
        assert_eq!(l.get(2, 0, 1), Some(10.0));
        let mut o = PathOracle::new(&cv, r, 1.0, 2.0);
        assert_eq!(o.value(2, 0, 0), Some(2.0));
        assert_eq!(o.value(2, 0, 1), Some(10.0));
    }

    #[test]
    fn constant_volume_accumulates_path_length() {
        let (w, n, c) = (7usize, 4usize, 3.0f32);
        let cv = CostVolume::from_dense(w, 1, n, vec![c; w * n]).unwrap();
        let r = Direction::new(1, 0);
        let p = SgmParams::new(5.0, 9.0, vec![r]).unwrap();
        let l = aggregate_direction(&cv, r, &p);
        for x in 0..w {
            let m = (0..n).map(|k| l.get(x, 0, k).unwrap()).fold(f64::INFINITY, f64::min);
            assert_eq!(m, (x + 1) as f64 * c as f64);
        }
    }

    #[test]
    fn single_direction_sum_equals_path_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cv = random_volume(&mut rng, 6, 5, 4, false);
        let r = Direction::new(-1, 2);
        let p = SgmParams::new(3.0, 8.0, vec![r]).unwrap();
        assert_eq!(aggregate_all(&cv, &p), aggregate_direction(&cv, r, &p));
    }

    #[test]
    fn mirror_symmetric_volume_gives_symmetric_aggregate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (w, h, n) = (6usize, 4usize, 3usize);
        let mut costs = vec![0f32; w * h * n];
        for y in 0..h {
            for x in 0..w.div_ceil(2) {
                for k in 0..n {
                    let c = rng.random_range(0..20) as f32;
                    costs[(y * w + x) * n + k] = c;
                    costs[(y * w + (w - 1 - x)) * n + k] = c;
                }
            }
        }
        let cv = CostVolume::from_dense(w, h, n, costs).unwrap();
        let p = SgmParams::new(2.0, 5.0, vec![Direction::new(1, 0), Direction::new(-1, 0)]).unwrap();
        let a = aggregate_all(&cv, &p);
        for y in 0..h {
            for x in 0..w {
                for k in 0..n {
                    assert_eq!(a.get(x, y, k), a.get(w - 1 - x, y, k));
                }
            }
        }
    }

    #[test]
    fn matches_oracle_on_random_volume_all_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cv = random_volume(&mut rng, 8, 8, 5, false);
        let p = SgmParams::new(4.0, 11.0, Direction::compass()).unwrap();
        let total = aggregate_all(&cv, &p);
        let mut expected = vec![0.0f64; 8 * 8 * 5];
        for &r in p.directions() {
            let mut o = PathOracle::new(&cv, r, 4.0, 11.0);
            for y in 0..8 {
                for x in 0..8 {
                    for k in 0..5 {
                        expected[(y * 8 + x) * 5 + k] += o.value(x, y, k).unwrap();
                    }
                }
            }
        }
        for y in 0..8 {
            for x in 0..8 {
                for k in 0..5 {
                    assert_eq!(total.get(x, y, k), Some(expected[(y * 8 + x) * 5 + k]));
                }
            }
        }
    }

    #[test]
    fn bounded_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let cv = random_volume(&mut rng, 7, 6, 6, true);
            for r in Direction::sixteen() {
                let p = SgmParams::new(2.0, 7.0, vec![r]).unwrap();
                let l = aggregate_direction(&cv, r, &p);
                let mut o = PathOracle::new(&cv, r, 2.0, 7.0);
                for y in 0..6 {
                    for x in 0..7 {
                        for k in 0..6 {
                            assert_eq!(l.get(x, y, k), o.value(x, y, k));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn disjoint_predecessor_restarts_path() {
        let costs = vec![1.0f32, 1.0, 5.0, 5.0, 7.0, 7.0, 3.0, 2.0];
        let bounds = vec![HypothesisRange::new(0, 1), HypothesisRange::new(2, 3)];
        let cv = CostVolume::from_parts(2, 1, 4, costs, Some(bounds)).unwrap();
        let r = Direction::new(1, 0);
        let p = SgmParams::new(1.0, 2.0, vec![r]).unwrap();
        let l = aggregate_direction(&cv, r, &p);
        assert_eq!(l.get(1, 0, 2), Some(3.0));
        assert_eq!(l.get(1, 0, 3), Some(2.0));
        assert_eq!(l.get(1, 0, 0), None);
    }

    #[test]
    fn wta_fixtures() {
        let g = HypothesisGrid::new(0.0, 2.0, 3).unwrap();
        let p = SgmParams::new(0.0, 0.0, vec![Direction::new(1, 0)]).unwrap();
        let a = aggregate_all(&volume(1, 1, 3, &[&[5.0, 2.0, 7.0]]), &p);
        assert_eq!(wta(&a, &g).get(0, 0), Some(1.0));
        let b = aggregate_all(&volume(1, 1, 3, &[&[3.0, 3.0, 9.0]]), &p);
        assert_eq!(wta(&b, &g).get(0, 0), Some(0.0));
    }

    #[test]
    fn wta_empty_range_is_invalid() {
        let cv = CostVolume::from_parts(
            2,
            1,
            3,
            vec![0.0; 6],
            Some(vec![HypothesisRange::EMPTY, HypothesisRange::new(1, 2)]),
        )
        .unwrap();
        let p = SgmParams::new(1.0, 2.0, vec![Direction::new(1, 0)]).unwrap();
        let dm = wta(&aggregate_all(&cv, &p), &HypothesisGrid::new(0.0, 2.0, 3).unwrap());
        assert!(!dm.is_valid(0, 0));
        assert_eq!(dm.get(1, 0), Some(1.0));
    }

    #[test]
    fn wta_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cv = random_volume(&mut rng, 9, 7, 6, true);
        let p = SgmParams::new(3.0, 6.0, Direction::compass()).unwrap();
        let a = aggregate_all(&cv, &p);
        let g = HypothesisGrid::new(-1.0, 1.5, 6).unwrap();
        let dm = wta(&a, &g);
        for y in 0..7 {
            for x in 0..9 {
                let mut best = None::<(usize, f64)>;
                for k in 0..6 {
                    if let Some(c) = a.get(x, y, k) {
                        if best.map_or(true, |(_, b)| c < b) {
                            best = Some((k, c));
                        }
                    }
                }
                assert_eq!(dm.get(x, y), best.map(|(k, _)| g.disparity(k)));
            }
        }
    }

    #[test]
    fn zero_penalties_single_direction_keeps_raw_argmin() {
        // Each pixel has a unique raw argmin and the same raw minimum.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (w, n) = (10usize, 5usize);
        let mut costs = vec![0f32; w * n];
        let mut argmins = vec![0usize; w];
        for x in 0..w {
            let a = rng.random_range(0..n);
            argmins[x] = a;
            for k in 0..n {
                costs[x * n + k] = if k == a { 2.0 } else { rng.random_range(3..30) as f32 };
            }
        }
        let cv = CostVolume::from_dense(w, 1, n, costs).unwrap();
        let g = HypothesisGrid::new(0.0, 4.0, 5).unwrap();
        let p = SgmParams::new(0.0, 0.0, vec![Direction::new(1, 0)]).unwrap();
        let dm = wta(&aggregate_all(&cv, &p), &g);
        for x in 0..w {
            assert_eq!(dm.get(x, 0), Some(g.disparity(argmins[x])));
        }
    }

    #[test]
    fn params_validation() {
        assert!(SgmParams::new(3.0, 2.0, Direction::axes()).is_err());
        assert!(SgmParams::new(-1.0, 2.0, Direction::axes()).is_err());
        assert!(SgmParams::new(1.0, 2.0, vec![]).is_err());
        assert!(SgmParams::new(1.0, 2.0, vec![Direction::new(0, 0)]).is_err());
        assert!(SgmParams::new(1.0, 2.0, vec![Direction::new(1, 0), Direction::new(1, 0)]).is_err());
        assert_eq!(Direction::sixteen().len(), 16);
        assert!(SgmParams::new(21.0, 45.0, Direction::sixteen()).is_ok());
        assert!(Direction::set(5).is_err());
    }

    proptest! {
        #[test]
        fn direction_order_independent(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cv = random_volume(&mut rng, 6, 5, 4, seed % 2 == 0);
            let mut dirs = Direction::sixteen();
            let a = aggregate_all(&cv, &SgmParams::new(2.0, 9.0, dirs.clone()).unwrap());
            dirs.reverse();
            dirs.swap(0, 7);
            let b = aggregate_all(&cv, &SgmParams::new(2.0, 9.0, dirs).unwrap());
            prop_assert_eq!(a, b.clone());
        }

        #[test]
        fn constant_offset_shifts_full_rows(seed in 0u64..500, c in 1u32..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (w, h, n) = (6usize, 3usize, 4usize);
            let base = random_volume(&mut rng, w, h, n, false);
            let shifted_costs: Vec<f32> = base.entries().map(|(_, _, _, v)| v + c as f32).collect();
            let shifted = CostVolume::from_dense(w, h, n, shifted_costs).unwrap();
            let r = Direction::new(1, 0);
            let p = SgmParams::new(2.0, 5.0, vec![r]).unwrap();
            let la = aggregate_direction(&base, r, &p);
            let lb = aggregate_direction(&shifted, r, &p);
            let g = HypothesisGrid::new(0.0, 3.0, n).unwrap();
            for y in 0..h {
                for x in 0..w {
                    for k in 0..n {
                        let delta = lb.get(x, y, k).unwrap() - la.get(x, y, k).unwrap();
                        prop_assert_eq!(delta, ((x + 1) as u32 * c) as f64);
                    }
                }
            }
            prop_assert_eq!(wta(&la, &g), wta(&lb, &g));
        }
    }
}
