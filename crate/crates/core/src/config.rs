//! Pipeline configuration and its plain-text `key = value` form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::census::CensusPattern;
use crate::error::{Error, Result};
use crate::sgm::{Direction, SgmParams};

/// Matching cost used for the all-views stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinalMetric {
    L2,
    Census,
}

impl FromStr for FinalMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(FinalMetric::L2),
            "census" => Ok(FinalMetric::Census),
            other => Err(Error::Config(format!(
                "final metric must be l2 or census, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for FinalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FinalMetric::L2 => "l2",
            FinalMetric::Census => "census",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub num_hypotheses: usize,
    pub p1_init: f64,
    pub p2_init: f64,
    pub p1_final: f64,
    pub p2_final: f64,
    pub directions: usize,
    pub census_pattern: CensusPattern,
    /// Fusion confidence threshold, in hypothesis steps.
    pub phi: f64,
    /// Border half-width, in hypothesis steps.
    pub lambda: usize,
    pub median_window: usize,
    pub fill_window: usize,
    pub fill_passes: usize,
    pub fill_min_support: usize,
    /// Threshold on the Sobel magnitude divided by 4 (0-255 scale).
    pub sobel_threshold: f64,
    pub final_metric: FinalMetric,
    pub bounding: bool,
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            num_hypotheses: 64,
            p1_init: 21.0,
            p2_init: 45.0,
            p1_final: 17.0,
            p2_final: 35.0,
            directions: 16,
            census_pattern: CensusPattern::default(),
            phi: 3.0,
            lambda: 2,
            median_window: 3,
            fill_window: 3,
            fill_passes: 2,
            fill_min_support: 3,
            sobel_threshold: 96.0,
            final_metric: FinalMetric::L2,
            bounding: true,
            workers: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean {value:?} for {key}"))),
    }
}

/// Parses `i,j;i,j;...` into a census pattern.
pub fn parse_pattern(value: &str) -> Result<CensusPattern> {
    let mut offsets = Vec::new();
    for pair in value.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (i, j) = pair
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("census offset {pair:?} is not i,j")))?;
        offsets.push((parse("census_pattern", i)?, parse("census_pattern", j)?));
    }
    CensusPattern::new(offsets)
}

pub fn format_pattern(p: &CensusPattern) -> String {
    p.offsets()
        .iter()
        .map(|(i, j)| format!("{i},{j}"))
        .collect::<Vec<_>>()
        .join(";")
}

impl PipelineConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "num_hypotheses" => self.num_hypotheses = parse(key, value)?,
            "p1_init" => self.p1_init = parse(key, value)?,
            "p2_init" => self.p2_init = parse(key, value)?,
            "p1_final" => self.p1_final = parse(key, value)?,
            "p2_final" => self.p2_final = parse(key, value)?,
            "directions" => self.directions = parse(key, value)?,
            "census_pattern" => self.census_pattern = parse_pattern(value)?,
            "phi" => self.phi = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "median_window" => self.median_window = parse(key, value)?,
            "fill_window" => self.fill_window = parse(key, value)?,
            "fill_passes" => self.fill_passes = parse(key, value)?,
            "fill_min_support" => self.fill_min_support = parse(key, value)?,
            "sobel_threshold" => self.sobel_threshold = parse(key, value)?,
            "final_metric" => self.final_metric = value.parse()?,
            "bounding" => self.bounding = parse_bool(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        format!(
            "num_hypotheses = {}\np1_init = {}\np2_init = {}\np1_final = {}\np2_final = {}\n\
             directions = {}\ncensus_pattern = {}\nphi = {}\nlambda = {}\nmedian_window = {}\n\
             fill_window = {}\nfill_passes = {}\nfill_min_support = {}\nsobel_threshold = {}\n\
             final_metric = {}\nbounding = {}\nworkers = {}\n",
            self.num_hypotheses,
            self.p1_init,
            self.p2_init,
            self.p1_final,
            self.p2_final,
            self.directions,
            format_pattern(&self.census_pattern),
            self.phi,
            self.lambda,
            self.median_window,
            self.fill_window,
            self.fill_passes,
            self.fill_min_support,
            self.sobel_threshold,
            self.final_metric,
            if self.bounding { "on" } else { "off" },
            self.workers,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_hypotheses < 2 {
            return Err(Error::Config("num_hypotheses must be at least 2".into()));
        }
        self.init_params()?;
        self.final_params()?;
        if self.median_window.is_multiple_of(2) || self.fill_window.is_multiple_of(2) {
            return Err(Error::Config("filter windows must be odd".into()));
        }
        if !(1..=2).contains(&self.fill_passes) {
            return Err(Error::Config("fill_passes must be 1 or 2".into()));
        }
        if !(self.phi > 0.0) {
            return Err(Error::Config("phi must be positive".into()));
        }
        if self.sobel_threshold.is_nan() || self.sobel_threshold < 0.0 {
            return Err(Error::Config("sobel_threshold must be nonnegative".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn init_params(&self) -> Result<SgmParams> {
        SgmParams::new(self.p1_init, self.p2_init, Direction::set(self.directions)?)
    }

    pub fn final_params(&self) -> Result<SgmParams> {
        SgmParams::new(self.p1_final, self.p2_final, Direction::set(self.directions)?)
    }
}
