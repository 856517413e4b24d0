//! `erpkit` command-line front end as a library, so the commands can be
//! driven in-process.

mod commands;
mod eval;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "ERPKIT_OUTPUT_ROOT";

#[derive(Debug, Parser)]
#[command(
    name = "erpkit",
    version,
    about = "Equirectangular video geometry toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render an oracle clip (frames, depth, tracks, poses) from a scene.
    Synth(SynthArgs),
    /// Cut pinhole views out of a panorama or panoramic video.
    Crop(CropArgs),
    /// Project pinhole views back onto a panorama canvas.
    Composite(CompositeArgs),
    /// Score a predicted depth video against ground truth.
    Loss(LossArgs),
    /// Finite-difference check of the loss gradients on a random oracle clip.
    Gradcheck(GradcheckArgs),
    /// Estimate per-frame camera poses from tracks and depth.
    Egomotion(EgomotionArgs),
    /// Evaluate a manifest of clips; resumable.
    Eval(EvalArgs),
    /// Lift one panorama frame and its depth to a PLY point cloud.
    Lift(LiftArgs),
    /// Render a PLY point cloud along a camera path.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct View {
    /// Horizontal field of view in degrees.
    #[arg(long, default_value_t = 90.0)]
    pub fov: f64,
    /// Degrees, positive turns right.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub yaw: f64,
    /// Degrees, positive looks up.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub pitch: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene JSON; the built-in room when omitted.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Texture jitter seed (overrides the scene's).
    #[arg(long)]
    pub seed: u64,
    /// Defaults to 93 unless the scene sets it.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Defaults to 512 unless the scene sets it.
    #[arg(long)]
    pub height: Option<usize>,
    /// Defaults to 1024 unless the scene sets it.
    #[arg(long)]
    pub width: Option<usize>,
    /// Defaults to 16 unless the scene sets it.
    #[arg(long)]
    pub fps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CropArgs {
    /// Panorama PNG or video directory.
    #[arg(long)]
    pub input: PathBuf,
    /// PNG path for a single image, directory for a video.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub view: View,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 512)]
    pub height: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fill {
    Constant,
    Noise,
}

#[derive(Debug, Args)]
pub struct CompositeArgs {
    /// Pinhole PNG or video directory.
    #[arg(long)]
    pub input: PathBuf,
    /// PNG path for a single image, directory for a video.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the coverage mask (PNG or directory).
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
    #[command(flatten)]
    pub view: View,
    #[arg(long, default_value_t = 1024)]
    pub erp_width: usize,
    #[arg(long, default_value_t = 512)]
    pub erp_height: usize,
    #[arg(long, value_enum, default_value_t = Fill::Constant)]
    pub fill: Fill,
    /// Constant fill value in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    pub fill_value: f32,
    #[arg(long, default_value_t = 1.0)]
    pub noise_scale: f32,
    #[arg(long, required_if_eq("fill", "noise"))]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(long)]
    pub pred_depth: PathBuf,
    #[arg(long)]
    pub gt_depth: PathBuf,
    #[arg(long)]
    pub tracks: PathBuf,
    #[arg(long)]
    pub poses: PathBuf,
    /// Noise level of the training sample.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = erpkit::losses::DEFAULT_SIGMA_MAX)]
    pub sigma_max: f64,
    #[arg(long, default_value_t = 0.3)]
    pub lambda_d: f64,
    #[arg(long, default_value_t = 0.06)]
    pub lambda_tau: f64,
    #[arg(long, default_value_t = 1000)]
    pub warmup: u64,
    /// Training iteration (for the warm-up ramp).
    #[arg(long, default_value_t = 1000)]
    pub iter: u64,
    #[arg(long, default_value_t = 0.0)]
    pub l_visual: f64,
    #[arg(long, default_value_t = erpkit::losses::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = erpkit::losses::DEFAULT_BETA)]
    pub beta: f64,
    /// Reference states from the tracks' own world positions instead of
    /// lifting them through the ground-truth depth.
    #[arg(long)]
    pub use_track_xyz: bool,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub pixels: usize,
    #[arg(long, default_value_t = 32)]
    pub height: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 6)]
    pub frames: usize,
    /// Difference step for the depth loss (normalized depth).
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    /// Difference step for the track loss (meters).
    #[arg(long, default_value_t = 1e-3)]
    pub track_step: f64,
    /// Exit 1 when the max relative error reaches this.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct RansacArgs {
    #[arg(long, default_value_t = 256)]
    pub iterations: usize,
    /// Absolute inlier threshold in meters (overrides the relative one).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Inlier threshold as a fraction of the median point distance.
    #[arg(long, default_value_t = 0.02)]
    pub relative_threshold: f64,
    #[arg(long, default_value_t = 6)]
    pub min_inliers: usize,
}

#[derive(Debug, Args)]
pub struct EgomotionArgs {
    #[arg(long)]
    pub tracks: PathBuf,
    #[arg(long)]
    pub depth: PathBuf,
    /// Poses JSON to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub ransac: RansacArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FidModeArg {
    PerFrame,
    ClipMean,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seeds pose estimation for clips without poses.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = erpkit::metrics::DEFAULT_T_EVAL)]
    pub t_eval: usize,
    #[arg(long, value_enum, default_value_t = FidModeArg::PerFrame)]
    pub fid_mode: FidModeArg,
    #[command(flatten)]
    pub ransac: RansacArgs,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    /// Panorama PNG, or a video directory together with --frame-index.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub depth: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub frame_index: usize,
    /// Poses JSON; the identity pose when omitted.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    /// Multiplies the stored depth (for normalized depth files).
    #[arg(long, default_value_t = 1.0)]
    pub depth_scale: f64,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Snap near-coplanar points onto fitted planes.
    #[arg(long, requires = "seed")]
    pub planar: bool,
    /// Snap distance in meters; 1% of the bounding-box diagonal by default.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub k_planes: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// PLY file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathPreset {
    Orbit,
    Walk,
    Fly,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub ply: PathBuf,
    #[arg(long, value_enum, default_value_t = PathPreset::Orbit)]
    pub path: PathPreset,
    #[arg(long, default_value_t = 16)]
    pub frames: usize,
    /// Orbit radius in meters.
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Forward distance per frame in meters (walk, fly).
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Upward distance per frame in meters (fly).
    #[arg(long, default_value_t = 0.02)]
    pub rise: f64,
    /// Total yaw sweep in degrees (fly).
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    pub sweep: f64,
    /// Poses JSON holding the anchor pose; the identity when omitted.
    #[arg(long)]
    pub anchor_poses: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub anchor_index: usize,
    #[command(flatten)]
    pub view: View,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 512)]
    pub height: usize,
    #[arg(long, default_value_t = 1)]
    pub splat_radius: usize,
    /// Output directory for PNG frames, depth and poses.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input data or arguments.
    Invalid(String),
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<erpkit::Error> for CliError {
    fn from(e: erpkit::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `explicit`, else `$ERPKIT_OUTPUT_ROOT/<name>`.
pub fn output_path(explicit: &Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.clone());
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => Ok(PathBuf::from(root).join(name)),
        _ => Err(CliError::Invalid(format!(
            "--out is required when {OUTPUT_ROOT_ENV} is not set"
        ))),
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 on invalid input, 2 on IO failure.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a, stdout),
        Command::Crop(a) => commands::crop(a, stdout),
        Command::Composite(a) => commands::composite(a, stdout),
        Command::Loss(a) => commands::loss(a, stdout),
        Command::Gradcheck(a) => commands::gradcheck(a, stdout),
        Command::Egomotion(a) => commands::egomotion(a, stdout),
        Command::Eval(a) => eval::run(a, stdout),
        Command::Lift(a) => commands::lift(a, stdout),
        Command::Render(a) => commands::render(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Invalid(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            1
        }
        Err(CliError::Io(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            2
        }
    }
}
