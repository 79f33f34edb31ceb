//! Command-line front end for the vessel segmentation pipeline.
//!
//! Subcommands cover the full workflow: `segment` runs the pipeline on
//! a NIfTI volume, `enhance` exports a single-scale vesselness map,
//! `phantom` synthesizes a test volume with ground truth, `ablate` runs
//! every pipeline variant for comparison, `eval` scores a mask against
//! a reference, and `info` inspects a file without writing anything.
//!
//! Exit codes: 0 on success, 1 on runtime failures (I/O, malformed
//! files, empty inputs), 2 on usage errors (bad flags or parameter
//! values out of range).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

/// Print a line to stdout, exiting quietly when the reader has closed
/// the pipe (`vesseg info volume | head` must not panic).
macro_rules! say {
    ($($arg:tt)*) => {{
        let mut out = std::io::stdout().lock();
        if writeln!(out, $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

use vesseg::phantom::{self, generate_phantom, PhantomSpec};
use vesseg::pipeline::{segment_detailed, AblationVariant, PipelineConfig, SegmentationRun};
use vesseg::volume::{read_header, read_nifti, write_mask, write_nifti};
use vesseg::{BinaryMask, Connectivity, Error, Result, Volume3D};

#[derive(Parser)]
#[command(
    name = "vesseg",
    version,
    about = "Dual-scale Hessian vessel segmentation for TOF MR angiography"
)]
struct Cli {
    /// Size of the worker thread pool (default: one per CPU core).
    /// Results are identical at any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment vessels in a NIfTI volume and write the binary mask.
    Segment(SegmentArgs),
    /// Write the vesselness map of a single enhancement scale.
    Enhance(EnhanceArgs),
    /// Generate a synthetic tube phantom with ground truth.
    Phantom(PhantomArgs),
    /// Run every pipeline variant and write one mask per variant.
    Ablate(AblateArgs),
    /// Score a predicted mask against a reference mask.
    Eval(EvalArgs),
    /// Print header and intensity statistics of a NIfTI file.
    Info(InfoArgs),
}

/// Pipeline options shared by the computing subcommands. Precedence:
/// built-in defaults, then the config file, then explicit flags.
#[derive(Args)]
struct ConfigArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, env = "VESSEG_CONFIG")]
    config: Option<PathBuf>,

    /// Thin-vessel enhancement scale in mm [default: 0.47].
    #[arg(long)]
    sigma_low: Option<f64>,

    /// Thick-vessel enhancement scale in mm [default: 0.94].
    #[arg(long)]
    sigma_high: Option<f64>,

    /// Thin-scale hysteresis fractions as "low,high"
    /// [default: 0.57,0.67].
    #[arg(long, value_parser = parse_fraction_pair)]
    frac_low: Option<(f64, f64)>,

    /// Thick-scale hysteresis fractions as "low,high"
    /// [default: 0.39,0.49].
    #[arg(long, value_parser = parse_fraction_pair)]
    frac_high: Option<(f64, f64)>,

    /// Drop components smaller than this volume in mm³ [default: 10].
    #[arg(long)]
    min_component_mm3: Option<f64>,

    /// Percentile of positive scores anchoring the thresholds
    /// [default: 99.9].
    #[arg(long)]
    percentile: Option<f64>,

    /// Voxel neighborhood: 6, 18 or 26 [default: 26].
    #[arg(long)]
    connectivity: Option<u8>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.sigma_low {
            cfg.sigma_low_mm = v;
        }
        if let Some(v) = self.sigma_high {
            cfg.sigma_high_mm = v;
        }
        if let Some(v) = self.frac_low {
            cfg.frac_low_scale = v;
        }
        if let Some(v) = self.frac_high {
            cfg.frac_high_scale = v;
        }
        if let Some(v) = self.min_component_mm3 {
            cfg.min_component_mm3 = v;
        }
        if let Some(v) = self.percentile {
            cfg.percentile = v;
        }
        if let Some(n) = self.connectivity {
            cfg.connectivity = Connectivity::from_count(n)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_fraction_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got {s:?}"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("not a number: {:?}", parts[0]))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("not a number: {:?}", parts[1]))?;
    Ok((lo, hi))
}

#[derive(Args)]
struct SegmentArgs {
    /// Input volume (.nii or .nii.gz).
    input: PathBuf,

    /// Output mask path.
    #[arg(short, long)]
    output: PathBuf,

    #[command(flatten)]
    config: ConfigArgs,

    /// Directory for per-scale vesselness maps and branch masks.
    #[arg(long)]
    save_intermediates: Option<PathBuf>,

    /// Reference mask; when given, overlap metrics are printed.
    #[arg(long)]
    ground_truth: Option<PathBuf>,
}

#[derive(Args)]
struct EnhanceArgs {
    /// Input volume (.nii or .nii.gz).
    input: PathBuf,

    /// Output vesselness map path.
    #[arg(short, long)]
    output: PathBuf,

    /// Enhancement scale in mm.
    #[arg(long)]
    sigma: f64,

    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct PhantomArgs {
    /// Output prefix; files are written as <prefix>_volume.nii.gz,
    /// <prefix>_gt.nii.gz and <prefix>_gt_tube<N>.nii.gz.
    #[arg(long)]
    out_prefix: PathBuf,

    /// Phantom description (JSON). Defaults to the built-in reference
    /// phantom.
    #[arg(long)]
    spec: Option<PathBuf>,

    /// Override the noise seed of the spec.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the noise sigma of the spec.
    #[arg(long)]
    noise: Option<f64>,

    /// Also write the effective spec as JSON to this path.
    #[arg(long)]
    emit_spec: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    /// Input volume (.nii or .nii.gz).
    input: PathBuf,

    /// Directory receiving one mask per variant (created if missing).
    #[arg(long)]
    out_dir: PathBuf,

    #[command(flatten)]
    config: ConfigArgs,

    /// Reference mask; when given, a <variant>_report.txt with overlap
    /// metrics is written next to each mask.
    #[arg(long)]
    ground_truth: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted mask (.nii or .nii.gz).
    pred: PathBuf,

    /// Reference mask.
    truth: PathBuf,

    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InfoArgs {
    /// NIfTI file to inspect.
    input: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(std::io::stderr(), "vesseg: {err}");
            match err {
                Error::Parameter(_) => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<()> {
    match cli.threads {
        Some(0) => Err(Error::Parameter("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Parameter(format!("cannot build thread pool: {e}")))?;
            pool.install(|| dispatch(cli.command))
        }
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Segment(args) => run_segment(args),
        Command::Enhance(args) => run_enhance(args),
        Command::Phantom(args) => run_phantom(args),
        Command::Ablate(args) => run_ablate(args),
        Command::Eval(args) => run_eval(args),
        Command::Info(args) => run_info(args),
    }
}

/// Read a NIfTI file as a binary mask (any nonzero voxel is foreground).
fn read_mask(path: &Path) -> Result<BinaryMask> {
    let vol = read_nifti(path)?;
    let data = vol.data().iter().map(|v| *v != 0.0).collect();
    BinaryMask::with_orientation(vol.dims(), vol.spacing(), vol.orientation(), data)
}

fn print_geometry(vol: &Volume3D) {
    let [nx, ny, nz] = vol.dims();
    let [sx, sy, sz] = vol.spacing();
    say!("dims = {nx} x {ny} x {nz}");
    // NIfTI stores spacing as f32; print at that precision so values
    // read back from disk don't show cast artifacts.
    say!(
        "spacing_mm = {} x {} x {}",
        sx as f32, sy as f32, sz as f32
    );
}

fn print_run_summary(run: &SegmentationRun) {
    for (n, branch) in run.branches.iter().enumerate() {
        let tag = format!("scale_{}", n + 1);
        say!("{tag}_mm = {}", branch.scale_mm);
        match &branch.thresholds {
            Some(pair) => {
                say!(
                    "{tag}_threshold_low = {:.6} (fraction {})",
                    pair.low, pair.low_frac
                );
                say!(
                    "{tag}_threshold_high = {:.6} (fraction {})",
                    pair.high, pair.high_frac
                );
            }
            None => say!("{tag}_thresholds = none (no positive vesselness)"),
        }
        say!("{tag}_mask_voxels = {}", branch.mask.count());
    }
    say!("union_voxels = {}", run.union_mask.count());
    say!("components_before_filter = {}", run.components_before);
    say!("components_after_filter = {}", run.components_after);
    say!("mask_voxels = {}", run.mask.count());
    say!(
        "mask_mm3 = {:.3}",
        run.mask.count() as f64 * run.mask.voxel_volume()
    );
}

fn run_segment(args: SegmentArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let vol = read_nifti(&args.input)?;
    say!("input = {}", args.input.display());
    print_geometry(&vol);

    let run = segment_detailed(&vol, &cfg, AblationVariant::Full)?;
    print_run_summary(&run);

    if let Some(dir) = &args.save_intermediates {
        std::fs::create_dir_all(dir)?;
        for (n, branch) in run.branches.iter().enumerate() {
            let map_path = dir.join(format!("vesselness_scale_{}.nii.gz", n + 1));
            write_nifti(&map_path, &branch.vesselness.volume)?;
            let mask_path = dir.join(format!("mask_scale_{}.nii.gz", n + 1));
            write_mask(&mask_path, &branch.mask)?;
        }
        write_mask(&dir.join("union.nii.gz"), &run.union_mask)?;
        say!("intermediates = {}", dir.display());
    }

    write_mask(&args.output, &run.mask)?;
    say!("output = {}", args.output.display());

    if let Some(gt_path) = &args.ground_truth {
        let gt = read_mask(gt_path)?;
        let report = phantom::evaluate(&run.mask, &gt, &[])?;
        say!("{}", report.to_text().trim_end());
    }
    Ok(())
}

fn run_enhance(args: EnhanceArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let vol = read_nifti(&args.input)?;
    let map = vesseg::filters::vessel_enhance(&vol, args.sigma, &cfg.sato)?;
    let positive = map.volume.data().iter().filter(|v| **v > 0.0).count();
    let max = map.volume.data().iter().cloned().fold(0.0f64, f64::max);
    say!("input = {}", args.input.display());
    print_geometry(&vol);
    say!("sigma_mm = {}", map.scale_mm);
    say!("score_max = {max:.6}");
    say!(
        "score_positive_fraction = {:.6}",
        positive as f64 / map.volume.num_voxels() as f64
    );
    write_nifti(&args.output, &map.volume)?;
    say!("output = {}", args.output.display());
    Ok(())
}

fn load_spec(path: &Path) -> Result<PhantomSpec> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parameter(format!("phantom spec {}: {e}", path.display())))
}

fn run_phantom(args: PhantomArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(path) => load_spec(path)?,
        None => phantom::reference_spec(),
    };
    if let Some(seed) = args.seed {
        spec.rng_seed = seed;
    }
    if let Some(noise) = args.noise {
        spec.noise_sigma = noise;
    }

    let result = generate_phantom(&spec)?;
    if let Some(parent) = args.out_prefix.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let prefix = args.out_prefix.display();

    let volume_path = PathBuf::from(format!("{prefix}_volume.nii.gz"));
    write_nifti(&volume_path, &result.volume)?;
    let gt_path = PathBuf::from(format!("{prefix}_gt.nii.gz"));
    write_mask(&gt_path, &result.ground_truth)?;
    for (n, tube) in result.tubes.iter().enumerate() {
        let tube_path = PathBuf::from(format!("{prefix}_gt_tube{}.nii.gz", n + 1));
        write_mask(&tube_path, &tube.mask)?;
    }
    if let Some(spec_path) = &args.emit_spec {
        let text = serde_json::to_string_pretty(&spec)
            .map_err(|e| Error::Parameter(format!("cannot serialize spec: {e}")))?;
        std::fs::write(spec_path, text)?;
    }

    print_geometry(&result.volume);
    say!("tubes = {}", result.tubes.len());
    say!("noise_stream = {}", result.noise_stream);
    say!("gt_voxels = {}", result.ground_truth.count());
    say!(
        "gt_mm3 = {:.3}",
        result.ground_truth.count() as f64 * result.ground_truth.voxel_volume()
    );
    say!("volume = {}", volume_path.display());
    say!("ground_truth = {}", gt_path.display());
    Ok(())
}

fn run_ablate(args: AblateArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let vol = read_nifti(&args.input)?;
    let gt = match &args.ground_truth {
        Some(path) => Some(read_mask(path)?),
        None => None,
    };
    std::fs::create_dir_all(&args.out_dir)?;

    say!("input = {}", args.input.display());
    print_geometry(&vol);
    for variant in AblationVariant::all() {
        let run = segment_detailed(&vol, &cfg, variant)?;
        let mask_path = args.out_dir.join(format!("{variant}.nii.gz"));
        write_mask(&mask_path, &run.mask)?;
        say!(
            "{variant}: mask_voxels = {}, components = {}, file = {}",
            run.mask.count(),
            run.components_after,
            mask_path.display()
        );
        if let Some(gt) = &gt {
            let report = phantom::evaluate(&run.mask, gt, &[])?;
            let report_path = args.out_dir.join(format!("{variant}_report.txt"));
            std::fs::write(&report_path, report.to_text())?;
            say!("{variant}: dice = {:.6}", report.dice);
        }
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let pred = read_mask(&args.pred)?;
    let truth = read_mask(&args.truth)?;
    let report = phantom::evaluate(&pred, &truth, &[])?;
    let text = report.to_text();
    say!("{}", text.trim_end());
    if let Some(out) = &args.out {
        std::fs::write(out, &text)?;
    }
    Ok(())
}

fn run_info(args: InfoArgs) -> Result<()> {
    let header = read_header(&args.input)?;
    say!("file = {}", args.input.display());
    say!(
        "dims = {} x {} x {}",
        header.dims[0], header.dims[1], header.dims[2]
    );
    say!(
        "spacing_mm = {} x {} x {}",
        header.spacing[0] as f32, header.spacing[1] as f32, header.spacing[2] as f32
    );
    say!(
        "datatype = {} ({})",
        header.datatype_code, header.datatype_name
    );

    let vol = read_nifti(&args.input)?;
    let data = vol.data();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for v in data {
        min = min.min(*v);
        max = max.max(*v);
        sum += *v;
    }
    say!("intensity_min = {min:.6}");
    say!("intensity_max = {max:.6}");
    say!("intensity_mean = {:.6}", sum / data.len() as f64);
    let positive = data.iter().filter(|v| **v > 0.0).count();
    say!("positive_voxels = {positive}");
    if positive > 0 {
        for p in [50.0, 90.0, 99.0, 99.9] {
            let value = vol.percentile(p, true)?;
            say!("positive_p{p} = {value:.6}");
        }
    }
    Ok(())
}
