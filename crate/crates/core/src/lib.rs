//! Light field disparity estimation with bounded semi-global matching.
//!
//! A coarse disparity map is computed by matching the reference view
//! against the four cross-lying views with a census cost and SGM. It is
//! turned into per-pixel hypothesis bounds, and an all-views cost is then
//! aggregated only inside those bounds.

pub mod census;
pub mod config;
pub mod cost_volume;
pub mod disparity;
pub mod error;
pub mod eval;
pub mod init_disparity;
pub mod lightfield;
pub mod loader;
pub mod pfm;
pub mod pipeline;
pub mod postproc;
pub mod sgm;
pub mod synth;
pub mod viz;

pub use census::{CensusField, CensusPattern};
pub use config::{FinalMetric, PipelineConfig};
pub use cost_volume::{CostVolume, HypothesisRange};
pub use disparity::DisparityMap;
pub use error::{Error, Result};
pub use eval::{EvalRegion, EvalReport};
pub use init_disparity::BorderMaps;
pub use lightfield::{HypothesisGrid, LightField, ViewCoord};
pub use loader::{load_lightfield, Layout};
pub use pipeline::{estimate, PipelineOutput};
pub use sgm::{AggregatedVolume, Direction, SgmParams};
