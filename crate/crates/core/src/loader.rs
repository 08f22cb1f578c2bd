//! Light field directories on disk.
//!
//! A scene directory holds numbered PNG views (`input_Cam000.png`, ... in the
//! benchmark convention, but any `<prefix><number>.png` works) in row-major
//! angular order, plus a plain-text scene config. Recognized config keys
//! (sections in `[brackets]` and `#`/`;` comments are ignored, `=` or `:`
//! separate keys from values):
//!
//! - disparity range: `disp_min`/`disp_max` (also `d_min`, `dmin`, `min_disp`, ...)
//! - angular dims: `num_cams_x`/`num_cams_y` (also `angular_s`/`angular_t`, `views_x`/`views_y`)

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use image::RgbImage;

use crate::error::{Error, Result};
use crate::lightfield::LightField;

pub const CONFIG_NAME: &str = "parameters.cfg";
pub const GROUND_TRUTH_NAMES: [&str; 3] = ["gt_disp_lowres.pfm", "gt_disp.pfm", "gt_disp_highres.pfm"];

/// How view indices map onto the angular grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Row-major `S x T` grid; dims from the config or a square grid.
    Benchmark,
    /// A single row of views (`T = 1`).
    Row,
}

impl std::str::FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "benchmark" | "grid" => Ok(Layout::Benchmark),
            "row" => Ok(Layout::Row),
            other => Err(Error::Config(format!("unknown layout {other:?}"))),
        }
    }
}

/// Parsed scene configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneConfig {
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub s_count: Option<usize>,
    pub t_count: Option<usize>,
}

const D_MIN_KEYS: [&str; 5] = ["disp_min", "d_min", "dmin", "min_disp", "disparity_min"];
const D_MAX_KEYS: [&str; 5] = ["disp_max", "d_max", "dmax", "max_disp", "disparity_max"];
const S_KEYS: [&str; 4] = ["num_cams_x", "angular_s", "views_x", "s_count"];
const T_KEYS: [&str; 4] = ["num_cams_y", "angular_t", "views_y", "t_count"];

impl SceneConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: HashMap<String, String> = HashMap::new();
        for line in text.lines() {
            let line = line.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('[') {
                continue;
            }
            let Some((k, v)) = line.split_once(['=', ':']) else {
                continue;
            };
            map.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        fn lookup<T: std::str::FromStr>(map: &HashMap<String, String>, keys: &[&str]) -> Result<Option<T>> {
            for k in keys {
                if let Some(v) = map.get(*k) {
                    return v
                        .parse()
                        .map(Some)
                        .map_err(|_| Error::InvalidInput(format!("unparseable {k} = {v:?}")));
                }
            }
            Ok(None)
        }
        Ok(Self {
            d_min: lookup(&map, &D_MIN_KEYS)?,
            d_max: lookup(&map, &D_MAX_KEYS)?,
            s_count: lookup(&map, &S_KEYS)?,
            t_count: lookup(&map, &T_KEYS)?,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("[meta]\n");
        if let Some(v) = self.d_min {
            s.push_str(&format!("disp_min = {v}\n"));
        }
        if let Some(v) = self.d_max {
            s.push_str(&format!("disp_max = {v}\n"));
        }
        if let Some(v) = self.s_count {
            s.push_str(&format!("num_cams_x = {v}\n"));
        }
        if let Some(v) = self.t_count {
            s.push_str(&format!("num_cams_y = {v}\n"));
        }
        s
    }
}

fn find_config(dir: &Path) -> Result<PathBuf> {
    for name in [CONFIG_NAME, "config.cfg", "config.txt"] {
        let p = dir.join(name);
        if p.is_file() {
            return Ok(p);
        }
    }
    let cfgs: Vec<PathBuf> = read_dir(dir)?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "cfg"))
        .collect();
    match cfgs.as_slice() {
        [one] => Ok(one.clone()),
        [] => Err(Error::InvalidInput(format!("no scene config in {}", dir.display()))),
        _ => Err(Error::InvalidInput(format!(
            "several .cfg files in {}, expected {CONFIG_NAME}",
            dir.display()
        ))),
    }
}

fn read_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

/// Splits `input_Cam012` into `("input_Cam", 12)`.
fn split_index(stem: &str) -> Option<(&str, usize)> {
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return None;
    }
    let (prefix, num) = stem.split_at(stem.len() - digits);
    num.parse().ok().map(|n| (prefix, n))
}

/// Numbered PNG views, grouped by the most common filename prefix.
fn find_views(dir: &Path) -> Result<BTreeMap<usize, PathBuf>> {
    let mut groups: HashMap<String, BTreeMap<usize, PathBuf>> = HashMap::new();
    for p in read_dir(dir)? {
        if !p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
            continue;
        }
        let Some(stem) = p.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if let Some((prefix, n)) = split_index(stem) {
            groups.entry(prefix.to_string()).or_default().insert(n, p.clone());
        }
    }
    groups
        .into_values()
        .max_by_key(|g| g.len())
        .ok_or_else(|| Error::InvalidInput(format!("no numbered PNG views in {}", dir.display())))
}

fn load_png(path: &Path) -> Result<RgbImage> {
    image::open(path)
        .map(|i| i.to_rgb8())
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn load_lightfield(dir: impl AsRef<Path>, layout: Layout) -> Result<LightField> {
    let dir = dir.as_ref();
    let cfg_path = find_config(dir)?;
    let text = fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?;
    let cfg = SceneConfig::parse(&text)?;
    let (d_min, d_max) = match (cfg.d_min, cfg.d_max) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidInput(format!(
                "{} lacks disp_min/disp_max",
                cfg_path.display()
            )))
        }
    };
    let views = find_views(dir)?;
    let highest = *views.keys().next_back().expect("nonempty");
    let (s, t) = match (layout, cfg.s_count, cfg.t_count) {
        (Layout::Row, Some(s), _) => (s, 1),
        (Layout::Row, None, _) => (highest + 1, 1),
        (Layout::Benchmark, Some(s), Some(t)) => (s, t),
        (Layout::Benchmark, Some(s), None) => (s, (highest + 1).div_ceil(s)),
        (Layout::Benchmark, None, Some(t)) => ((highest + 1).div_ceil(t), t),
        (Layout::Benchmark, None, None) => {
            let n = highest + 1;
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(Error::InvalidInput(format!(
                    "{n} views do not form a square grid; set num_cams_x/num_cams_y"
                )));
            }
            (side, side)
        }
    };
    let mut images = Vec::with_capacity(s * t);
    for i in 0..s * t {
        let path = views.get(&i).ok_or_else(|| Error::MissingView {
            dir: dir.to_path_buf(),
            index: i,
        })?;
        images.push(load_png(path)?);
    }
    LightField::new(images, s, t, d_min, d_max)
}

/// Writes views as `input_CamNNN.png` and the scene config as `parameters.cfg`.
pub fn write_lightfield(dir: impl AsRef<Path>, lf: &LightField) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, view) in lf.views().iter().enumerate() {
        let path = dir.join(format!("input_Cam{i:03}.png"));
        view.save(&path).map_err(|source| Error::Image {
            path: path.clone(),
            source,
        })?;
    }
    let cfg = SceneConfig {
        d_min: Some(lf.d_min()),
        d_max: Some(lf.d_max()),
        s_count: Some(lf.s_count()),
        t_count: Some(lf.t_count()),
    };
    let path = dir.join(CONFIG_NAME);
    fs::write(&path, cfg.to_text()).map_err(|e| Error::io(&path, e))
}

/// Ground-truth disparity file in a scene directory, if one exists.
pub fn find_ground_truth(dir: impl AsRef<Path>) -> Option<PathBuf> {
    GROUND_TRUTH_NAMES
        .iter()
        .map(|n| dir.as_ref().join(n))
        .find(|p| p.is_file())
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn field(s: usize, t: usize) -> LightField {
        let views = (0..s * t)
            .map(|i| RgbImage::from_fn(5, 4, |x, y| Rgb([(i * 3) as u8, (x * 40) as u8, (y * 50) as u8])))
            .collect();
        LightField::new(views, s, t, -1.5, 2.25).unwrap()
    }

    #[test]
    fn benchmark_config_parse() {
        let text = "[intrinsics]\nfocal_length_mm = 100\n\n[meta]\ndisp_min = -1.5\ndisp_max = 2.25 ; note\nnum_cams_x = 9\nnum_cams_y = 9\n";
        let c = SceneConfig::parse(text).unwrap();
        assert_eq!(c.d_min, Some(-1.5));
        assert_eq!(c.d_max, Some(2.25));
        assert_eq!((c.s_count, c.t_count), (Some(9), Some(9)));
        assert!(SceneConfig::parse("disp_min = x").is_err());
    }

    #[test]
    fn round_trip_9x9() {
        let dir = tempfile::tempdir().unwrap();
        let lf = field(9, 9);
        write_lightfield(dir.path(), &lf).unwrap();
        let back = load_lightfield(dir.path(), Layout::Benchmark).unwrap();
        assert_eq!(back, lf);
        assert_eq!((back.s_count(), back.t_count()), (9, 9));
    }

    #[test]
    fn square_grid_without_dims() {
        let dir = tempfile::tempdir().unwrap();
        let lf = field(9, 9);
        write_lightfield(dir.path(), &lf).unwrap();
        fs::write(dir.path().join(CONFIG_NAME), "disp_min=-1.5\ndisp_max=2.25\n").unwrap();
        assert_eq!(load_lightfield(dir.path(), Layout::Benchmark).unwrap(), lf);
    }

    #[test]
    fn row_layout() {
        let dir = tempfile::tempdir().unwrap();
        let lf = field(7, 1);
        write_lightfield(dir.path(), &lf).unwrap();
        fs::write(dir.path().join(CONFIG_NAME), "disp_min=-1.5\ndisp_max=2.25\n").unwrap();
        let back = load_lightfield(dir.path(), Layout::Row).unwrap();
        assert_eq!((back.s_count(), back.t_count()), (7, 1));
        assert_eq!(back, lf);
    }

    #[test]
    fn missing_view_named() {
        let dir = tempfile::tempdir().unwrap();
        write_lightfield(dir.path(), &field(9, 9)).unwrap();
        fs::remove_file(dir.path().join("input_Cam037.png")).unwrap();
        match load_lightfield(dir.path(), Layout::Benchmark) {
            Err(Error::MissingView { index, .. }) => assert_eq!(index, 37),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_sizes_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_lightfield(dir.path(), &field(3, 3)).unwrap();
        RgbImage::new(6, 4).save(dir.path().join("input_Cam004.png")).unwrap();
        assert!(matches!(
            load_lightfield(dir.path(), Layout::Benchmark),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn config_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_lightfield(dir.path(), &field(3, 3)).unwrap();
        fs::write(dir.path().join(CONFIG_NAME), "num_cams_x = 3\n").unwrap();
        assert!(load_lightfield(dir.path(), Layout::Benchmark).is_err());
        fs::remove_file(dir.path().join(CONFIG_NAME)).unwrap();
        assert!(load_lightfield(dir.path(), Layout::Benchmark).is_err());
    }

    #[test]
    fn split_index_cases() {
        assert_eq!(split_index("input_Cam012"), Some(("input_Cam", 12)));
        assert_eq!(split_index("7"), Some(("", 7)));
        assert_eq!(split_index("valid_mask"), None);
    }
}
