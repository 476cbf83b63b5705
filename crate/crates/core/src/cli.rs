//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cips::CipsParams;
use crate::colorspace::render_rgb;
use crate::error::{Error, Result};
use crate::keyvalue::KeyValues;
use crate::phantom::{generate, PhantomData, PhantomSpec};
use crate::pipeline::{preprocess_stack, stack_to_cips, volume_to_cips};
use crate::sheet::{contact_sheet, default_columns};
use crate::stack_io::{self, load_stack, load_volume4d, write_rgb};
use crate::volume_render::{mip_axis, mip_oblique, rotation_sequence, Axis, RotationAxis, ViewSpec};

#[derive(Debug, Parser)]
#[command(name = "cips", version, about = "Color intensity projections of grayscale time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse a frame stack into one RGB image.
    Cips(CipsCmd),
    /// Render one image per hue period plus a labelled contact sheet.
    Sweep(SweepCmd),
    /// Maximum-brightness projection of a 4D volume.
    Mip(MipCmd),
    /// Write a synthetic phantom and its ground-truth arrival map.
    Phantom(PhantomCmd),
    /// Print geometry and intensity range of a stack or volume.
    Info(InfoCmd),
}

#[derive(Debug, Clone, Args)]
pub struct PrepArgs {
    /// Subtract every sample from the global maximum first.
    #[arg(long)]
    pub invert: bool,
    /// Temporal interpolation factor (1 = none).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub interp_factor: u32,
    /// Saturation gain, clamped at 1 after scaling.
    #[arg(long, default_value_t = 1.0)]
    pub sat_gain: f64,
}

#[derive(Debug, Clone, Args)]
pub struct HueArgs {
    /// Frames per hue cycle.
    #[arg(long, conflicts_with = "no_cycle")]
    pub period: Option<f64>,
    /// Span the hue wheel once over the whole (interpolated) stack. Default
    /// when no period is given.
    #[arg(long)]
    pub no_cycle: bool,
}

#[derive(Debug, Args)]
pub struct CipsCmd {
    /// Frame directory or manifest file.
    pub input: PathBuf,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub hue: HueArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    pub input: PathBuf,
    #[command(flatten)]
    pub prep: PrepArgs,
    /// Comma-separated hue periods, e.g. 11,22,44,99.
    #[arg(long, value_parser = parse_periods)]
    pub periods: Periods,
    /// Contact-sheet columns; defaults to ceil(sqrt(number of periods)).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RotateArg {
    Yaw,
    Pitch,
}

#[derive(Debug, Args)]
pub struct MipCmd {
    /// 4D volume header.
    pub header: PathBuf,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub hue: HueArgs,
    /// Axis-aligned projection instead of an oblique view.
    #[arg(long, value_enum, conflicts_with_all = ["yaw", "pitch", "frames"])]
    pub axis: Option<AxisArg>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub yaw: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub pitch: f64,
    /// Ray sample spacing in voxels.
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    /// Emit a rotation sequence of this many frames into --out (a directory).
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long, value_enum, default_value_t = RotateArg::Yaw)]
    pub rotate_about: RotateArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PhantomCmd {
    /// Phantom spec in `key = value` form.
    pub spec: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct InfoCmd {
    /// Frame directory, manifest, or 4D header.
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Periods(pub Vec<f64>);

fn parse_periods(raw: &str) -> std::result::Result<Periods, String> {
    let periods = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<f64>() {
            Ok(p) if p.is_finite() && p > 0.0 => Ok(p),
            _ => Err(format!("`{s}` is not a positive period")),
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if periods.is_empty() {
        return Err("at least one period is required".into());
    }
    Ok(Periods(periods))
}

fn params(prep: &PrepArgs, hue: &HueArgs) -> CipsParams {
    let defaults = CipsParams::default();
    CipsParams {
        period: hue.period.unwrap_or(defaults.period),
        cycling: hue.period.is_some() && !hue.no_cycle,
        saturation_gain: prep.sat_gain,
        invert: prep.invert,
        interp_factor: prep.interp_factor as usize,
    }
}

fn describe(params: &CipsParams, frames_in: usize) -> String {
    let frames_out = (frames_in - 1) * params.interp_factor + 1;
    let period = params.effective_period(frames_out);
    format!(
        "invert={} interp_factor={} cycling={} period={} sat_gain={} frames_in={} frames_out={}",
        params.invert, params.interp_factor, params.cycling, period, params.saturation_gain, frames_in, frames_out
    )
}

fn period_name(period: f64) -> String {
    format!("period_{period}.png")
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_cips(cmd: &CipsCmd) -> Result<()> {
    let params = params(&cmd.prep, &cmd.hue);
    params.validate()?;
    let stack = load_stack(&cmd.input)?;
    eprintln!(
        "cips: input={} {} out={}",
        cmd.input.display(),
        describe(&params, stack.frame_count()),
        cmd.out.display()
    );
    let image = stack_to_cips(&stack, &params)?;
    write_rgb(&render_rgb(&image), &cmd.out)
}

fn cmd_sweep(cmd: &SweepCmd) -> Result<()> {
    let base = params(&cmd.prep, &HueArgs { period: None, no_cycle: true });
    base.validate()?;
    let stack = load_stack(&cmd.input)?;
    // interpolation and inversion are shared by every period
    let prepared = preprocess_stack(&stack, &base)?;
    let prep_only = CipsParams {
        invert: false,
        interp_factor: 1,
        ..base
    };
    create_dir(&cmd.out_dir)?;
    let mut tiles = Vec::with_capacity(cmd.periods.0.len());
    for &period in &cmd.periods.0 {
        let out = cmd.out_dir.join(period_name(period));
        let reported = CipsParams { period, cycling: true, ..base };
        eprintln!(
            "sweep: input={} {} out={}",
            cmd.input.display(),
            describe(&reported, stack.frame_count()),
            out.display()
        );
        let rgb = render_rgb(&stack_to_cips(&prepared, &CipsParams { period, cycling: true, ..prep_only })?);
        write_rgb(&rgb, &out)?;
        tiles.push((format!("p={period}"), rgb));
    }
    let columns = cmd.grid.unwrap_or_else(|| default_columns(tiles.len()));
    let sheet = contact_sheet(&tiles, columns)?;
    write_rgb(&sheet, &cmd.out_dir.join("contact_sheet.png"))
}

fn cmd_mip(cmd: &MipCmd) -> Result<()> {
    let params = params(&cmd.prep, &cmd.hue);
    params.validate()?;
    let volume = load_volume4d(&cmd.header)?;
    let view = ViewSpec {
        yaw: cmd.yaw,
        pitch: cmd.pitch,
        sample_step: cmd.step,
        output: None,
    };
    eprintln!(
        "mip: input={} {} axis={:?} yaw={} pitch={} step={} frames={:?} rotate_about={:?} out={}",
        cmd.header.display(),
        describe(&params, volume.nt()),
        cmd.axis,
        view.yaw,
        view.pitch,
        view.sample_step,
        cmd.frames,
        cmd.rotate_about,
        cmd.out.display()
    );
    let cips = volume_to_cips(&volume, &params)?;
    if let Some(n) = cmd.frames {
        let axis = match cmd.rotate_about {
            RotateArg::Yaw => RotationAxis::Yaw,
            RotateArg::Pitch => RotationAxis::Pitch,
        };
        let frames = rotation_sequence(&cips, n, axis, &view)?;
        create_dir(&cmd.out)?;
        for (i, frame) in frames.iter().enumerate() {
            write_rgb(frame, &cmd.out.join(format!("frame_{i:04}.png")))?;
        }
        return Ok(());
    }
    let image = match cmd.axis {
        Some(a) => mip_axis(
            &cips,
            match a {
                AxisArg::X => Axis::X,
                AxisArg::Y => Axis::Y,
                AxisArg::Z => Axis::Z,
            },
        ),
        None => mip_oblique(&cips, &view)?,
    };
    write_rgb(&render_rgb(&image), &cmd.out)
}

fn cmd_phantom(cmd: &PhantomCmd) -> Result<()> {
    let text = fs::read_to_string(&cmd.spec).map_err(|e| Error::io(&cmd.spec, e))?;
    let spec = PhantomSpec::parse(&text)?;
    let phantom = generate(&spec)?;
    create_dir(&cmd.out_dir)?;
    match &phantom.data {
        PhantomData::Stack(stack) => {
            stack_io::write_stack(stack, &cmd.out_dir)?;
        }
        PhantomData::Volume(volume) => {
            stack_io::write_volume4d(volume, &cmd.out_dir.join("phantom.hdr"))?;
        }
    }
    phantom.arrivals.write(&cmd.out_dir.join("arrival.csv"))?;
    eprintln!(
        "phantom: spec={} frames={} vessel_pixels={} out_dir={}",
        cmd.spec.display(),
        spec.n_frames,
        phantom.arrivals.vessel_pixels(),
        cmd.out_dir.display()
    );
    Ok(())
}

fn is_volume_header(path: &Path) -> bool {
    path.is_file()
        && fs::read_to_string(path)
            .ok()
            .and_then(|t| KeyValues::parse(&t).ok())
            .is_some_and(|kv| kv.contains("dtype") && kv.contains("nt"))
}

fn cmd_info(cmd: &InfoCmd) -> Result<()> {
    if is_volume_header(&cmd.input) {
        let v = load_volume4d(&cmd.input)?;
        let [sx, sy, sz] = v.spacing();
        println!("kind: volume");
        println!("geometry: {} x {} x {}", v.nx(), v.ny(), v.nz());
        println!("spacing: {sx} x {sy} x {sz}");
        println!("frames: {}", v.nt());
        println!("min: {}", v.global_min());
        println!("max: {}", v.global_max());
    } else {
        let s = load_stack(&cmd.input)?;
        println!("kind: stack");
        println!("geometry: {} x {}", s.width(), s.height());
        println!("frames: {}", s.frame_count());
        println!("bit_depth: {}", s.source_bit_depth());
        println!("min: {}", s.global_min());
        println!("max: {}", s.global_max());
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Cips(c) => cmd_cips(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Mip(c) => cmd_mip(c),
        Command::Phantom(c) => cmd_phantom(c),
        Command::Info(c) => cmd_info(c),
    }
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main_from_env() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
