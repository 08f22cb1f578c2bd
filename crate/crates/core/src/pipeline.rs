//! End-to-end disparity estimation.
//!
//! census → intermediate maps → fuse → fill → borders → all-views cost →
//! bounded SGM → WTA → subpixel → median. With bounding off the initial
//! stage is skipped and the all-views SGM runs over the full range.

use std::time::Instant;

use crate::census::{census_transform, census_transform_views};
use crate::config::{FinalMetric, PipelineConfig};
use crate::cost_volume::{allviews_cost_census, allviews_cost_l2};
use crate::disparity::DisparityMap;
use crate::error::{Error, Result};
use crate::eval::sampled_fraction;
use crate::init_disparity::{
    compute_borders, fill_holes, fuse, intermediate_maps, sobel_edges, BorderMaps,
};
use crate::lightfield::{HypothesisGrid, LightField, ViewCoord};
use crate::postproc::{median_filter, subpixel_refine};
use crate::sgm::{aggregate_all, wta};

/// Intermediate products of the initial-disparity stage.
#[derive(Debug, Clone)]
pub struct InitialStage {
    pub intermediate: Vec<DisparityMap>,
    pub fused: DisparityMap,
    pub filled: DisparityMap,
    pub edges: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub grid: HypothesisGrid,
    /// Present when bounding is on.
    pub initial: Option<InitialStage>,
    pub borders: BorderMaps,
    /// Integer WTA result of the all-views stage.
    pub wta: DisparityMap,
    pub refined: DisparityMap,
    /// Median-filtered output.
    pub disparity: DisparityMap,
    pub sampled_fraction: f64,
    /// Wall time of the compute pipeline, I/O excluded.
    pub runtime_seconds: f64,
}

pub fn estimate(lf: &LightField, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    pool.install(|| run(lf, cfg))
}

fn run(lf: &LightField, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let start = Instant::now();
    let grid = HypothesisGrid::for_lightfield(lf, cfg.num_hypotheses)?;
    let (w, h) = (lf.width(), lf.height());

    let needed: Vec<ViewCoord> = match (cfg.final_metric, cfg.bounding) {
        (FinalMetric::Census, _) => lf.coords().collect(),
        (FinalMetric::L2, true) => std::iter::once(lf.reference()).chain(lf.cross_views()).collect(),
        (FinalMetric::L2, false) => Vec::new(),
    };
    let cf = if needed.len() == lf.s_count() * lf.t_count() {
        census_transform(lf, &cfg.census_pattern)
    } else {
        census_transform_views(lf, &cfg.census_pattern, &needed)
    };

    let (initial, borders) = if cfg.bounding {
        let intermediate = intermediate_maps(lf, &cf, &cfg.init_params()?, &grid)?;
        let fused = fuse(&intermediate, cfg.phi, &grid)?;
        let filled = fill_holes(&fused, cfg.fill_window, cfg.fill_passes, cfg.fill_min_support)?;
        let edges = sobel_edges(lf.reference_view(), cfg.sobel_threshold);
        let borders = compute_borders(&filled, cfg.lambda, &edges, &grid)?;
        let stage = InitialStage {
            intermediate,
            fused,
            filled,
            edges,
        };
        (Some(stage), borders)
    } else {
        (None, BorderMaps::full(w, h, grid.count()))
    };

    let bounds = cfg.bounding.then_some(&borders);
    let cv = match cfg.final_metric {
        FinalMetric::L2 => allviews_cost_l2(lf, &grid, bounds),
        FinalMetric::Census => allviews_cost_census(lf, &cf, &grid, bounds),
    };
    let fraction = sampled_fraction(&cv);
    let av = aggregate_all(&cv, &cfg.final_params()?);
    drop(cv);
    let wta_map = wta(&av, &grid);
    let refined = subpixel_refine(&wta_map, &av, &borders, &grid);
    let disparity = median_filter(&refined, cfg.median_window)?;

    Ok(PipelineOutput {
        grid,
        initial,
        borders,
        wta: wta_map,
        refined,
        disparity,
        sampled_fraction: fraction,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
