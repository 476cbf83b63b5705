//! End-to-end composition: optional inversion, temporal interpolation,
//! CIPs mapping and saturation gain.

use crate::cips::{amplify_saturation, amplify_volume_saturation, compute_cips, compute_cips_volume};
use crate::cips::{CipsImage, CipsParams, CipsVolume};
use crate::error::Result;
use crate::preprocess::{interpolate_stack, interpolate_volume, invert_stack, invert_volume, InterpolationSpec};
use crate::stack_io::{FrameStack, Volume4D};

pub fn preprocess_stack(stack: &FrameStack, params: &CipsParams) -> Result<FrameStack> {
    params.validate()?;
    let spec = InterpolationSpec::new(params.interp_factor)?;
    match (params.invert, spec.factor()) {
        (false, 1) => Ok(stack.clone()),
        (true, 1) => Ok(invert_stack(stack)),
        (false, _) => interpolate_stack(stack, spec),
        (true, _) => interpolate_stack(&invert_stack(stack), spec),
    }
}

pub fn preprocess_volume(volume: &Volume4D, params: &CipsParams) -> Result<Volume4D> {
    params.validate()?;
    let spec = InterpolationSpec::new(params.interp_factor)?;
    let inverted;
    let source = if params.invert {
        inverted = invert_volume(volume);
        &inverted
    } else {
        volume
    };
    interpolate_volume(source, spec)
}

pub fn stack_to_cips(stack: &FrameStack, params: &CipsParams) -> Result<CipsImage> {
    let prepared = preprocess_stack(stack, params)?;
    amplify_saturation(compute_cips(&prepared, params)?, params.saturation_gain)
}

pub fn volume_to_cips(volume: &Volume4D, params: &CipsParams) -> Result<CipsVolume> {
    let prepared = preprocess_volume(volume, params)?;
    amplify_volume_saturation(compute_cips_volume(&prepared, params)?, params.saturation_gain)
}
