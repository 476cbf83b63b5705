//! Brightness inversion and temporal interpolation of frame stacks and 4D
//! volumes. Both act per sample along the time axis only.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stack_io::{FrameStack, Volume4D};

/// Temporal interpolation density: `factor - 1` frames are inserted between
/// every pair of consecutive input frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpolationSpec {
    factor: usize,
}

impl InterpolationSpec {
    pub fn new(factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidParameter("interpolation factor must be >= 1".into()));
        }
        Ok(InterpolationSpec { factor })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    /// Frame count after interpolating `n` frames.
    pub fn output_frames(&self, n: usize) -> usize {
        if n == 0 {
            0
        } else {
            (n - 1) * self.factor + 1
        }
    }
}

impl Default for InterpolationSpec {
    fn default() -> Self {
        InterpolationSpec { factor: 1 }
    }
}

fn invert_samples(data: &[f64]) -> Vec<f64> {
    let peak = data.iter().copied().fold(0.0, f64::max);
    data.par_iter().map(|&v| peak - v).collect()
}

fn interpolate_samples(data: &[f64], frame_len: usize, spec: InterpolationSpec) -> Result<Vec<f64>> {
    let k = spec.factor;
    let n = data.len() / frame_len;
    if k == 1 {
        return Ok(data.to_vec());
    }
    if n < 2 {
        return Err(Error::CannotInterpolateSingleFrame);
    }
    let out_frames = spec.output_frames(n);
    let mut out = vec![0.0; out_frames * frame_len];
    out.par_chunks_mut(frame_len)
        .enumerate()
        .for_each(|(index, frame)| {
            let (j, m) = (index / k, index % k);
            let lo = &data[j * frame_len..(j + 1) * frame_len];
            if m == 0 {
                frame.copy_from_slice(lo);
                return;
            }
            let hi = &data[(j + 1) * frame_len..(j + 2) * frame_len];
            let w = m as f64 / k as f64;
            for ((o, &a), &b) in frame.iter_mut().zip(lo).zip(hi) {
                // clamped so rounding never leaves the endpoint range
                *o = ((1.0 - w) * a + w * b).clamp(a.min(b), a.max(b));
            }
        });
    Ok(out)
}

/// Replaces every sample `v` with `G - v`, `G` being the maximum over all frames.
pub fn invert_stack(stack: &FrameStack) -> FrameStack {
    FrameStack::from_raw(
        stack.width(),
        stack.height(),
        stack.frame_count(),
        invert_samples(stack.data()),
    )
    .expect("inversion preserves geometry and range")
    .with_bit_depth(stack.source_bit_depth())
}

/// Linear interpolation in time; input frame `j` lands at output index `j * k`.
pub fn interpolate_stack(stack: &FrameStack, spec: InterpolationSpec) -> Result<FrameStack> {
    let data = interpolate_samples(stack.data(), stack.frame_len(), spec)?;
    Ok(FrameStack::from_raw(
        stack.width(),
        stack.height(),
        spec.output_frames(stack.frame_count()),
        data,
    )?
    .with_bit_depth(stack.source_bit_depth()))
}

pub fn invert_volume(volume: &Volume4D) -> Volume4D {
    Volume4D::from_raw(
        volume.nx(),
        volume.ny(),
        volume.nz(),
        volume.nt(),
        invert_samples(volume.data()),
    )
    .expect("inversion preserves geometry and range")
    .with_spacing(volume.spacing())
}

pub fn interpolate_volume(volume: &Volume4D, spec: InterpolationSpec) -> Result<Volume4D> {
    let data = interpolate_samples(volume.data(), volume.timepoint_len(), spec)?;
    Ok(Volume4D::from_raw(
        volume.nx(),
        volume.ny(),
        volume.nz(),
        spec.output_frames(volume.nt()),
        data,
    )?
    .with_spacing(volume.spacing()))
}
