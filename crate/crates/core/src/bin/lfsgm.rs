use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use lfsgm::config::{parse_pattern, FinalMetric, PipelineConfig};
use lfsgm::eval::{EvalRegion, EvalReport};
use lfsgm::loader::{find_ground_truth, load_lightfield, Layout};
use lfsgm::pfm::{read_pfm, write_pfm};
use lfsgm::synth::{procedural_texture, synthesize, write_scene, SynthParams, DEFAULT_RANGE};
use lfsgm::viz::write_png;
use lfsgm::{estimate, Error};

const EXIT_INPUT: u8 = 3;
const EXIT_CONFIG: u8 = 4;
const EXIT_RUNTIME: u8 = 5;

#[derive(Parser)]
#[command(name = "lfsgm", version, about = "Light field disparity estimation with bounded SGM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a disparity map for a light field directory.
    Estimate(EstimateArgs),
    /// Compare a disparity map against ground truth.
    Eval(EvalArgs),
    /// Render a synthetic constant-disparity scene.
    Synth(SynthArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Scene directory with numbered PNG views and a scene config.
    input: PathBuf,
    /// Output PFM path.
    #[arg(short, long)]
    output: PathBuf,
    /// Colormapped PNG visualization.
    #[arg(long)]
    png: Option<PathBuf>,
    /// Pipeline config file (key = value).
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "benchmark")]
    layout: Layout,
    /// Directory for intermediate maps (PFM).
    #[arg(long)]
    debug_dir: Option<PathBuf>,
    /// Evaluate against this ground truth, or the scene's own if `auto`.
    #[arg(long)]
    gt: Option<String>,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    overrides: ConfigFlags,
}

/// Overrides for individual config fields (applied after the config file).
#[derive(Args, Default)]
struct ConfigFlags {
    #[arg(long)]
    num_hypotheses: Option<usize>,
    #[arg(long)]
    p1_init: Option<f64>,
    #[arg(long)]
    p2_init: Option<f64>,
    #[arg(long)]
    p1_final: Option<f64>,
    #[arg(long)]
    p2_final: Option<f64>,
    /// 4, 8 or 16.
    #[arg(long)]
    directions: Option<usize>,
    /// Offsets as `i,j;i,j;...`.
    #[arg(long, allow_hyphen_values = true)]
    census_pattern: Option<String>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    median_window: Option<usize>,
    #[arg(long)]
    fill_window: Option<usize>,
    #[arg(long)]
    fill_passes: Option<usize>,
    #[arg(long)]
    fill_min_support: Option<usize>,
    #[arg(long)]
    sobel_threshold: Option<f64>,
    /// l2 or census.
    #[arg(long)]
    final_metric: Option<String>,
    /// on or off.
    #[arg(long)]
    bounding: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
}

impl ConfigFlags {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<(), Error> {
        macro_rules! copy {
            ($($f:ident),*) => {$( if let Some(v) = self.$f { cfg.$f = v; } )*};
        }
        copy!(
            num_hypotheses, p1_init, p2_init, p1_final, p2_final, directions, phi, lambda,
            median_window, fill_window, fill_passes, fill_min_support, sobel_threshold, workers
        );
        if let Some(p) = &self.census_pattern {
            cfg.census_pattern = parse_pattern(p)?;
        }
        if let Some(m) = &self.final_metric {
            cfg.final_metric = m.parse::<FinalMetric>()?;
        }
        if let Some(b) = &self.bounding {
            cfg.set("bounding", b)?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct EvalArgs {
    disparity: PathBuf,
    ground_truth: PathBuf,
    /// Compute runtime in seconds, used for the M metric.
    #[arg(long)]
    runtime: f64,
    #[arg(long)]
    sampled_fraction: Option<f64>,
    /// Report MSE without the x100 scale.
    #[arg(long)]
    raw_mse: bool,
    /// Exclude this many pixels at each image border.
    #[arg(long, default_value_t = 0)]
    margin: usize,
    #[arg(long)]
    json: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output scene directory.
    output: PathBuf,
    /// Texture image; a procedural texture is used when absent.
    #[arg(long)]
    texture: Option<PathBuf>,
    /// Side length of the procedural texture.
    #[arg(long, default_value_t = 96)]
    texture_size: u32,
    #[arg(long, default_value_t = 0)]
    texture_seed: u64,
    #[arg(short, long, allow_hyphen_values = true)]
    disparity: f64,
    #[arg(long, default_value_t = 5)]
    s: usize,
    #[arg(long, default_value_t = 5)]
    t: usize,
    /// Standard deviation of additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_RANGE.0)]
    d_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_RANGE.1)]
    d_max: f64,
}

enum Failure {
    Input(Error),
    Config(Error),
    Runtime(Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn error(&self) -> &Error {
        match self {
            Failure::Input(e) | Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

/// Config errors keep their code wherever they surface.
fn input(e: Error) -> Failure {
    if e.is_config() { Failure::Config(e) } else { Failure::Input(e) }
}

fn runtime(e: Error) -> Failure {
    if e.is_config() { Failure::Config(e) } else { Failure::Runtime(e) }
}

fn config(e: Error) -> Failure {
    Failure::Config(e)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| {
        Failure::Runtime(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn cmd_estimate(a: EstimateArgs) -> Result<(), Failure> {
    let total = Instant::now();
    let mut cfg = match &a.config {
        Some(p) => PipelineConfig::from_file(p).map_err(config)?,
        None => PipelineConfig::default(),
    };
    a.overrides.apply(&mut cfg).map_err(config)?;
    cfg.validate().map_err(config)?;

    let lf = load_lightfield(&a.input, a.layout).map_err(input)?;
    let gt = match a.gt.as_deref() {
        None => None,
        Some("auto") => {
            let p = find_ground_truth(&a.input).ok_or_else(|| {
                Failure::Input(Error::InvalidInput(format!(
                    "no ground truth in {}",
                    a.input.display()
                )))
            })?;
            Some(read_pfm(p).map_err(input)?)
        }
        Some(p) => Some(read_pfm(p).map_err(input)?),
    };

    let out = estimate(&lf, &cfg).map_err(runtime)?;

    write_pfm(&a.output, &out.disparity).map_err(runtime)?;
    if let Some(p) = &a.png {
        write_png(p, &out.disparity, lf.d_min(), lf.d_max()).map_err(runtime)?;
    }
    if let Some(dir) = &a.debug_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(Error::Io { path: dir.clone(), source: e }))?;
        if let Some(init) = &out.initial {
            for (i, m) in init.intermediate.iter().enumerate() {
                write_pfm(dir.join(format!("intermediate_{i}.pfm")), m).map_err(runtime)?;
            }
            write_pfm(dir.join("fused.pfm"), &init.fused).map_err(runtime)?;
            write_pfm(dir.join("filled.pfm"), &init.filled).map_err(runtime)?;
        }
        write_pfm(dir.join("wta.pfm"), &out.wta).map_err(runtime)?;
        write_pfm(dir.join("refined.pfm"), &out.refined).map_err(runtime)?;
    }

    let mut text = match &gt {
        Some(gt) => {
            let r = EvalReport::compute(
                &out.disparity,
                gt,
                out.runtime_seconds,
                Some(out.sampled_fraction),
                100.0,
                EvalRegion::default(),
            )
            .map_err(input)?;
            if a.json { r.to_json() + "\n" } else { r.to_key_value() }
        }
        None if a.json => format!(
            "{{\n  \"runtime_seconds\": {},\n  \"sampled_fraction\": {}\n}}\n",
            out.runtime_seconds, out.sampled_fraction
        ),
        None => format!(
            "runtime_seconds={:.6}\nsampled_fraction={:.6}\n",
            out.runtime_seconds, out.sampled_fraction
        ),
    };
    if !a.json {
        text.push_str(&format!("total_seconds={:.6}\n", total.elapsed().as_secs_f64()));
    }
    print!("{text}");
    if let Some(p) = &a.report {
        write_text(p, &text)?;
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let dm = read_pfm(&a.disparity).map_err(input)?;
    let gt = read_pfm(&a.ground_truth).map_err(input)?;
    let scale = if a.raw_mse { 1.0 } else { 100.0 };
    let r = EvalReport::compute(
        &dm,
        &gt,
        a.runtime,
        a.sampled_fraction,
        scale,
        EvalRegion::with_margin(a.margin),
    )
    .map_err(input)?;
    let text = if a.json { r.to_json() + "\n" } else { r.to_key_value() };
    print!("{text}");
    if let Some(p) = &a.output {
        write_text(p, &text)?;
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<(), Failure> {
    let texture = match &a.texture {
        Some(p) => image::open(p)
            .map_err(|source| Failure::Input(Error::Image { path: p.clone(), source }))?
            .to_rgb8(),
        None => procedural_texture(a.texture_size, a.texture_size, a.texture_seed),
    };
    let p = SynthParams {
        disparity: a.disparity,
        s_count: a.s,
        t_count: a.t,
        noise_sigma: a.noise,
        seed: a.seed,
        d_min: a.d_min,
        d_max: a.d_max,
    };
    let (lf, gt) = synthesize(&texture, &p).map_err(input)?;
    write_scene(&a.output, &lf, &gt).map_err(runtime)?;
    println!(
        "wrote {}x{} views of {}x{} to {}",
        a.s,
        a.t,
        lf.width(),
        lf.height(),
        a.output.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error());
            ExitCode::from(f.code())
        }
    }
}
