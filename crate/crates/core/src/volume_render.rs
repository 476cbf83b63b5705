//! Brightness-driven maximum intensity projection of CIPs volumes.
//!
//! Each parallel ray keeps the sample of greatest brightness and carries that
//! voxel's hue and saturation with it. Ties go to the sample nearest the
//! viewer, i.e. the first one met along the ray direction.
//!
//! Orientation: with yaw = pitch = 0 the viewer looks along +z, image columns
//! follow +x and rows follow +y. Yaw turns the view about the y axis (yaw 90
//! looks along +x), pitch then tilts it about the x axis (pitch 90 looks
//! along +y). The axis-aligned projections use the same orientations:
//!
//! | axis | output     | column `u`       | row `v`          |
//! |------|------------|------------------|------------------|
//! | z    | `nx × ny`  | `x = u`          | `y = v`          |
//! | x    | `nz × ny`  | `z = nz - 1 - u` | `y = v`          |
//! | y    | `nx × nz`  | `x = u`          | `z = nz - 1 - v` |

use rayon::prelude::*;

use crate::cips::{CipsImage, CipsVolume};
use crate::colorspace::render_rgb;
use crate::error::{Error, Result};
use crate::stack_io::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationAxis {
    Yaw,
    Pitch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewSpec {
    /// Degrees about the y axis.
    pub yaw: f64,
    /// Degrees about the x axis, applied after yaw.
    pub pitch: f64,
    /// Distance between brightness samples along a ray, in voxels.
    pub sample_step: f64,
    /// Output `(width, height)`; `None` fits the projected bounding box.
    pub output: Option<(usize, usize)>,
}

impl Default for ViewSpec {
    fn default() -> Self {
        ViewSpec {
            yaw: 0.0,
            pitch: 0.0,
            sample_step: 0.5,
            output: None,
        }
    }
}

fn image_from(width: usize, height: usize, px: Vec<(f64, f64, f64)>) -> Result<CipsImage> {
    let mut b = Vec::with_capacity(px.len());
    let mut h = Vec::with_capacity(px.len());
    let mut s = Vec::with_capacity(px.len());
    for (pb, ph, ps) in px {
        b.push(pb);
        h.push(ph);
        s.push(ps);
    }
    CipsImage::from_planes(width, height, b, h, s)
}

/// Axis-aligned projection; see the module docs for output orientation.
pub fn mip_axis(volume: &CipsVolume, axis: Axis) -> CipsImage {
    let (nx, ny, nz) = (volume.nx(), volume.ny(), volume.nz());
    let (width, height, depth) = match axis {
        Axis::Z => (nx, ny, nz),
        Axis::X => (nz, ny, nx),
        Axis::Y => (nx, nz, ny),
    };
    let bright = volume.brightness();
    let px: Vec<(f64, f64, f64)> = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let (u, v) = (i % width, i / width);
            let voxel = |k: usize| match axis {
                Axis::Z => volume.index(u, v, k),
                Axis::X => volume.index(k, v, nz - 1 - u),
                Axis::Y => volume.index(u, k, nz - 1 - v),
            };
            let mut best = voxel(0);
            for k in 1..depth {
                let idx = voxel(k);
                if bright[idx] > bright[best] {
                    best = idx;
                }
            }
            (bright[best], volume.hue()[best], volume.saturation()[best])
        })
        .collect();
    image_from(width, height, px).expect("projection keeps voxel values")
}

/// `(sin, cos)` of an angle in degrees, exact at quarter turns.
fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        r.to_radians().sin_cos()
    }
}

type Vec3 = [f64; 3];

/// Image-plane axes and ray direction for a view.
fn view_basis(yaw: f64, pitch: f64) -> [Vec3; 3] {
    let (sy, cy) = sin_cos_deg(yaw);
    let (sp, cp) = sin_cos_deg(pitch);
    let rotate = |[a, b, c]: Vec3| -> Vec3 {
        let (a, b, c) = (a * cy + c * sy, b, -a * sy + c * cy);
        [a, b * cp + c * sp, -b * sp + c * cp]
    };
    [rotate([1.0, 0.0, 0.0]), rotate([0.0, 1.0, 0.0]), rotate([0.0, 0.0, 1.0])]
}

fn extent(axis: Vec3, dims: [usize; 3]) -> f64 {
    axis.iter()
        .zip(dims)
        .map(|(a, n)| a.abs() * n as f64)
        .sum()
}

/// Clamped-at-zero voxel lookup for trilinear sampling.
#[inline]
fn brightness_at(volume: &CipsVolume, x: isize, y: isize, z: isize) -> f64 {
    let (nx, ny, nz) = (volume.nx() as isize, volume.ny() as isize, volume.nz() as isize);
    if x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz {
        0.0
    } else {
        volume.brightness()[volume.index(x as usize, y as usize, z as usize)]
    }
}

/// Trilinear brightness; samples outside the volume read 0. The result is
/// clamped to the corner range so it never exceeds the voxels it blends.
fn sample_brightness(volume: &CipsVolume, p: Vec3) -> f64 {
    let dims = [volume.nx(), volume.ny(), volume.nz()];
    if p.iter().zip(dims).any(|(&c, n)| c <= -1.0 || c >= n as f64) {
        return 0.0;
    }
    let base = p.map(f64::floor);
    let frac = [p[0] - base[0], p[1] - base[1], p[2] - base[2]];
    let [x0, y0, z0] = base.map(|c| c as isize);
    if frac == [0.0; 3] {
        return brightness_at(volume, x0, y0, z0);
    }
    let mut acc = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for corner in 0..8 {
        let (dx, dy, dz) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
        let v = brightness_at(volume, x0 + dx, y0 + dy, z0 + dz);
        let w = |d: isize, f: f64| if d == 1 { f } else { 1.0 - f };
        let weight = w(dx, frac[0]) * w(dy, frac[1]) * w(dz, frac[2]);
        if weight > 0.0 {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        acc += weight * v;
    }
    acc.clamp(lo, hi)
}

/// Nearest voxel to `p`, if it lies inside the volume.
fn nearest_voxel(volume: &CipsVolume, p: Vec3) -> Option<[usize; 3]> {
    let dims = [volume.nx(), volume.ny(), volume.nz()];
    let mut out = [0usize; 3];
    for ((o, &c), n) in out.iter_mut().zip(&p).zip(dims) {
        let r = c.round();
        if r < 0.0 || r >= n as f64 {
            return None;
        }
        *o = r as usize;
    }
    Some(out)
}

fn clamped_voxel(volume: &CipsVolume, p: Vec3) -> [usize; 3] {
    let dims = [volume.nx(), volume.ny(), volume.nz()];
    let mut out = [0usize; 3];
    for ((o, &c), n) in out.iter_mut().zip(&p).zip(dims) {
        *o = c.round().clamp(0.0, (n - 1) as f64) as usize;
    }
    out
}

/// Default output geometry for a view: the projected bounding box.
pub fn default_viewport(volume: &CipsVolume, yaw: f64, pitch: f64) -> (usize, usize) {
    let dims = [volume.nx(), volume.ny(), volume.nz()];
    let [eu, ev, _] = view_basis(yaw, pitch);
    let fit = |a: Vec3| (extent(a, dims).round() as usize).max(1);
    (fit(eu), fit(ev))
}

/// Projection along rays rotated by `view.yaw` then `view.pitch` about the
/// volume centre. Brightness is sampled trilinearly every `sample_step`
/// voxels; hue and saturation come from the voxel nearest the winning
/// sample and are never interpolated.
pub fn mip_oblique(volume: &CipsVolume, view: &ViewSpec) -> Result<CipsImage> {
    if !(view.yaw.is_finite() && view.pitch.is_finite()) {
        return Err(Error::InvalidParameter("view angles must be finite".into()));
    }
    if !(view.sample_step.is_finite() && view.sample_step > 0.0) {
        return Err(Error::InvalidParameter("sample step must be positive".into()));
    }
    let (width, height) = view
        .output
        .unwrap_or_else(|| default_viewport(volume, view.yaw, view.pitch));
    if width == 0 || height == 0 {
        return Err(Error::EmptyViewport);
    }

    let dims = [volume.nx(), volume.ny(), volume.nz()];
    let [eu, ev, dir] = view_basis(view.yaw, view.pitch);
    let centre = dims.map(|n| (n as f64 - 1.0) / 2.0);
    let depth = extent(dir, dims).max(1.0);
    let t0 = -(depth - 1.0) / 2.0;
    let samples = ((depth - 1.0) / view.sample_step).floor() as usize + 1;
    let (cu, cv) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);

    let px: Vec<(f64, f64, f64)> = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let ou = (i % width) as f64 - cu;
            let ov = (i / width) as f64 - cv;
            let origin: Vec3 = std::array::from_fn(|a| centre[a] + ou * eu[a] + ov * ev[a]);
            let mut best: Option<(f64, Vec3)> = None;
            for k in 0..samples {
                let t = t0 + k as f64 * view.sample_step;
                let p: Vec3 = std::array::from_fn(|a| origin[a] + t * dir[a]);
                let b = sample_brightness(volume, p);
                if best.map_or(true, |(bb, _)| b > bb) {
                    best = Some((b, p));
                }
            }
            let (b, p) = best.expect("at least one sample per ray");
            let voxel = if b > 0.0 {
                Some(clamped_voxel(volume, p))
            } else {
                nearest_voxel(volume, p)
            };
            match voxel {
                Some([x, y, z]) => {
                    let idx = volume.index(x, y, z);
                    (b, volume.hue()[idx], volume.saturation()[idx])
                }
                None => (0.0, 0.0, 0.0),
            }
        })
        .collect();
    image_from(width, height, px)
}

/// Output size that contains the volume for every angle of a rotation
/// about `axis`, keeping the parity of the unrotated size so that pixel
/// centres stay on voxel centres at 0°.
pub fn rotation_extent(volume: &CipsVolume, axis: RotationAxis) -> (usize, usize) {
    let fit = |a: usize, b: usize| {
        let mut n = (a as f64).hypot(b as f64).ceil() as usize;
        if (n - a) % 2 == 1 {
            n += 1;
        }
        n
    };
    match axis {
        RotationAxis::Yaw => (fit(volume.nx(), volume.nz()), volume.ny()),
        RotationAxis::Pitch => (volume.nx(), fit(volume.ny(), volume.nz())),
    }
}

/// Frame `i` is the oblique projection turned by `360 * i / n_frames` degrees
/// about `axis`, on top of the angles in `base`.
pub fn rotation_sequence(
    volume: &CipsVolume,
    n_frames: usize,
    axis: RotationAxis,
    base: &ViewSpec,
) -> Result<Vec<RgbImage>> {
    if n_frames == 0 {
        return Err(Error::InvalidParameter("rotation needs at least one frame".into()));
    }
    let output = base.output.or(Some(rotation_extent(volume, axis)));
    (0..n_frames)
        .map(|i| {
            let angle = 360.0 * i as f64 / n_frames as f64;
            let mut view = ViewSpec { output, ..*base };
            match axis {
                RotationAxis::Yaw => view.yaw += angle,
                RotationAxis::Pitch => view.pitch += angle,
            }
            mip_oblique(volume, &view).map(|img| render_rgb(&img))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn volume(nx: usize, ny: usize, nz: usize, b: Vec<f64>, h: Vec<f64>) -> CipsVolume {
        let s = b.iter().map(|&v| if v > 0.0 { 0.5 } else { 0.0 }).collect();
        CipsVolume::from_planes(nx, ny, nz, b, h, s).unwrap()
    }

    #[test]
    fn brighter_slice_wins_with_its_triple() {
        let v = volume(1, 1, 2, vec![0.2, 0.9], vec![0.1, 0.6]);
        let img = mip_axis(&v, Axis::Z);
        assert_eq!(img.get(0, 0).b, 0.9);
        assert_eq!(img.get(0, 0).h, 0.6);
    }

    #[test]
    fn tie_goes_to_nearest_slice() {
        let v = volume(1, 1, 2, vec![0.5, 0.5], vec![0.1, 0.6]);
        assert_eq!(mip_axis(&v, Axis::Z).get(0, 0).h, 0.1);
        let img = mip_oblique(&v, &ViewSpec::default()).unwrap();
        assert_eq!(img.get(0, 0).h, 0.1);
    }

    #[test]
    fn single_slice_is_identity() {
        let b: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
        let h: Vec<f64> = (0..6).map(|i| i as f64 / 7.0).collect();
        let v = volume(3, 2, 1, b, h);
        assert_eq!(mip_axis(&v, Axis::Z), v.slice(0));
    }

    #[test]
    fn axis_orientations() {
        // one bright voxel at (x=1, y=0, z=0) in a 2x1x3 volume
        let mut b = vec![0.0; 6];
        b[v_index(2, 1, 1, 0, 0)] = 1.0;
        let v = volume(2, 1, 3, b, vec![0.0; 6]);
        let x = mip_axis(&v, Axis::X);
        assert_eq!((x.width(), x.height()), (3, 1));
        assert_eq!(x.brightness(), &[0.0, 0.0, 1.0]); // z = nz-1-u
        let y = mip_axis(&v, Axis::Y);
        assert_eq!((y.width(), y.height()), (2, 3));
        assert_eq!(y.get(1, 2).b, 1.0);
    }

    fn v_index(nx: usize, ny: usize, x: usize, y: usize, z: usize) -> usize {
        (z * ny + y) * nx + x
    }

    #[test]
    fn quarter_turns_match_axis_projections() {
        let (nx, ny, nz) = (4, 3, 5);
        let n = nx * ny * nz;
        let b: Vec<f64> = (0..n).map(|i| ((i * 37) % 17) as f64 / 16.0).collect();
        let h: Vec<f64> = (0..n).map(|i| ((i * 11) % 13) as f64 / 13.0).collect();
        let v = volume(nx, ny, nz, b, h);
        let yaw90 = mip_oblique(&v, &ViewSpec { yaw: 90.0, ..Default::default() }).unwrap();
        assert_eq!(yaw90, mip_axis(&v, Axis::X));
        let pitch90 = mip_oblique(&v, &ViewSpec { pitch: 90.0, ..Default::default() }).unwrap();
        assert_eq!(pitch90, mip_axis(&v, Axis::Y));
        let full = mip_oblique(&v, &ViewSpec { yaw: 360.0, ..Default::default() }).unwrap();
        assert_eq!(full, mip_oblique(&v, &ViewSpec::default()).unwrap());
    }

    #[test]
    fn uniform_volume_projects_uniformly() {
        let n = 5 * 5 * 5;
        let h: Vec<f64> = (0..n).map(|i| (i % 5) as f64 / 5.0).collect();
        let v = volume(5, 5, 5, vec![0.7; n], h);
        let img = mip_oblique(&v, &ViewSpec::default()).unwrap();
        assert!(img.brightness().iter().all(|&b| b == 0.7));
        // first sample wins every tie, so hue is the z = 0 slice
        assert_eq!(img.hue(), v.slice(0).hue());
    }

    #[test]
    fn outside_rays_are_black() {
        let v = volume(2, 2, 2, vec![1.0; 8], vec![0.3; 8]);
        let img = mip_oblique(&v, &ViewSpec { output: Some((8, 8)), ..Default::default() }).unwrap();
        let corner = img.get(0, 0);
        assert_eq!((corner.b, corner.h, corner.s), (0.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_viewport_and_step() {
        let v = volume(1, 1, 1, vec![1.0], vec![0.0]);
        let err = mip_oblique(&v, &ViewSpec { output: Some((0, 4)), ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::EmptyViewport));
        assert!(mip_oblique(&v, &ViewSpec { sample_step: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn rotation_frames() {
        let n = 3 * 3 * 3;
        let b: Vec<f64> = (0..n).map(|i| ((i * 5) % 7) as f64 / 6.0).collect();
        let v = volume(3, 3, 3, b, vec![0.25; n]);
        let base = ViewSpec::default();
        let one = rotation_sequence(&v, 1, RotationAxis::Yaw, &base).unwrap();
        let view0 = ViewSpec { output: Some(rotation_extent(&v, RotationAxis::Yaw)), ..base };
        assert_eq!(one, vec![render_rgb(&mip_oblique(&v, &view0).unwrap())]);

        let four = rotation_sequence(&v, 4, RotationAxis::Yaw, &base).unwrap();
        assert_eq!(four.len(), 4);
        let view90 = ViewSpec { yaw: 90.0, ..view0 };
        assert_eq!(four[1], render_rgb(&mip_oblique(&v, &view90).unwrap()));
        assert!(rotation_sequence(&v, 0, RotationAxis::Pitch, &base).is_err());
    }

    #[test]
    fn rotation_extent_keeps_parity() {
        let v = volume(4, 2, 3, vec![0.0; 24], vec![0.0; 24]);
        let (w, h) = rotation_extent(&v, RotationAxis::Yaw);
        assert_eq!((w, h), (6, 2)); // hypot(4, 3) = 5, bumped to even
        let (w, h) = rotation_extent(&v, RotationAxis::Pitch);
        assert_eq!((w, h), (4, 4));
    }
}
