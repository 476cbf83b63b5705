//! Color intensity projections (CIPs).
//!
//! A temporal stack of grayscale frames is fused into one colour image:
//! the time of each pixel's maximum becomes hue (optionally cycling the hue
//! wheel several times over the stack), its relative temporal variation
//! becomes saturation, and its maximum becomes brightness. 3D CIPs volumes
//! are rendered to 2D by projecting, along parallel rays, the voxel of
//! greatest brightness together with its hue and saturation.
//!
//! ```no_run
//! use std::path::Path;
//! use cips::{colorspace::render_rgb, pipeline::stack_to_cips, stack_io, CipsParams};
//!
//! let stack = stack_io::load_stack(Path::new("frames/"))?;
//! let params = CipsParams { invert: true, interp_factor: 4, ..CipsParams::cycling(22.0) };
//! let image = render_rgb(&stack_to_cips(&stack, &params)?);
//! stack_io::write_rgb(&image, Path::new("cips.png"))?;
//! # Ok::<(), cips::Error>(())
//! ```

pub mod cips;
pub mod cli;
pub mod colorspace;
mod error;
pub mod keyvalue;
pub mod phantom;
pub mod pipeline;
pub mod preprocess;
pub mod sheet;
pub mod stack_io;
pub mod volume_render;

pub use crate::cips::{CipsImage, CipsParams, CipsVolume, PixelStats};
pub use crate::colorspace::HsbTriple;
pub use crate::error::{Error, Result};
pub use crate::stack_io::{FrameStack, RgbImage, Volume4D};
