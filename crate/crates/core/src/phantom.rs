//! Synthetic time-resolved phantoms with known arrival times.
//!
//! A vessel is a polyline with a radius. Every pixel within the radius has a
//! symmetric triangular pulse centred on frame `round(d / velocity)`, where
//! `d` is the arc length of its closest point on the path. All other pixels
//! hold the background level.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::cips::{hue_from_index, CipsImage, CipsParams, CipsVolume};
use crate::error::{Error, Result};
use crate::keyvalue::KeyValues;
use crate::preprocess::InterpolationSpec;
use crate::stack_io::{FrameStack, Volume4D};

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    /// Number of z slices; `None` generates a 2D stack.
    pub depth: Option<usize>,
    pub n_frames: usize,
    /// Polyline vertices `(x, y, z)` in pixel units; `z` is ignored for 2D.
    pub vessel: Vec<[f64; 3]>,
    pub radius: f64,
    /// Path length travelled per frame.
    pub velocity: f64,
    /// Full base width of the pulse, in frames.
    pub pulse_width: f64,
    pub peak_intensity: f64,
    pub background: f64,
    /// Emit `peak_intensity - value` so contrast is dark on a white field.
    pub white_background: bool,
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.width == 0 || self.height == 0 || self.depth == Some(0) {
            return bad("phantom geometry must be non-empty");
        }
        if self.n_frames == 0 {
            return bad("phantom needs at least one frame");
        }
        if self.vessel.is_empty() {
            return bad("vessel path needs at least one vertex");
        }
        if !(self.velocity.is_finite() && self.velocity > 0.0) {
            return bad("velocity must be positive");
        }
        if !(self.pulse_width.is_finite() && self.pulse_width >= 1.0) {
            return bad("pulse width must be at least 1 frame");
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return bad("radius must be non-negative");
        }
        if !(self.background >= 0.0 && self.peak_intensity > self.background && self.peak_intensity.is_finite()) {
            return bad("need peak_intensity > background >= 0");
        }
        let limits = [self.width, self.height, self.depth.unwrap_or(1)];
        for vertex in &self.vessel {
            let dims = if self.depth.is_some() { 3 } else { 2 };
            for a in 0..dims {
                let c = vertex[a];
                if !c.is_finite() || c < 0.0 || c > (limits[a] - 1) as f64 {
                    return Err(Error::PathOutOfBounds);
                }
            }
        }
        Ok(())
    }

    /// Same phantom on a dark background.
    pub fn dark_twin(&self) -> Self {
        PhantomSpec {
            white_background: false,
            ..self.clone()
        }
    }

    /// Reads a `key = value` spec. Keys: `width`, `height`, optional `nz`,
    /// `frames`, `vessel` (`x,y[,z]; x,y[,z]; ...`), `radius`, `velocity`,
    /// `pulse_width`, `peak`, `background`, optional `white_background`.
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        let vessel = kv
            .require("vessel")?
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|vertex| {
                let coords: Vec<f64> = vertex
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::InvalidHeader(format!("bad vessel vertex `{vertex}`")))?;
                match coords.as_slice() {
                    [x, y] => Ok([*x, *y, 0.0]),
                    [x, y, z] => Ok([*x, *y, *z]),
                    _ => Err(Error::InvalidHeader(format!("bad vessel vertex `{vertex}`"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let white_background = match kv.get("white_background") {
            None => false,
            Some("true") | Some("1") | Some("yes") => true,
            Some("false") | Some("0") | Some("no") => false,
            Some(other) => {
                return Err(Error::InvalidHeader(format!(
                    "bad value for `white_background`: `{other}`"
                )))
            }
        };
        let spec = PhantomSpec {
            width: kv.parse_required("width")?,
            height: kv.parse_required("height")?,
            depth: kv.parse_optional("nz")?,
            n_frames: kv.parse_required("frames")?,
            vessel,
            radius: kv.parse_required("radius")?,
            velocity: kv.parse_required("velocity")?,
            pulse_width: kv.parse_required("pulse_width")?,
            peak_intensity: kv.parse_required("peak")?,
            background: kv.parse_optional("background")?.unwrap_or(0.0),
            white_background,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Ground-truth arrival frame (real valued) per pixel; `None` off the vessel.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalMap {
    width: usize,
    height: usize,
    depth: usize,
    n_frames: usize,
    arrivals: Vec<Option<f64>>,
}

impl ArrivalMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn arrivals(&self) -> &[Option<f64>] {
        &self.arrivals
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> Option<f64> {
        self.arrivals[(z * self.height + y) * self.width + x]
    }

    /// Frame index of the discrete peak.
    pub fn peak_frame(arrival: f64) -> usize {
        arrival.round() as usize
    }

    pub fn vessel_pixels(&self) -> usize {
        self.arrivals.iter().filter(|a| a.is_some()).count()
    }

    /// Writes `x,y,z,arrival` rows for every vessel pixel.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = format!(
            "# width={} height={} depth={} frames={}\nx,y,z,arrival\n",
            self.width, self.height, self.depth, self.n_frames
        );
        for (i, a) in self.arrivals.iter().enumerate() {
            if let Some(a) = a {
                let (x, y, z) = (
                    i % self.width,
                    (i / self.width) % self.height,
                    i / (self.width * self.height),
                );
                let _ = writeln!(text, "{x},{y},{z},{a}");
            }
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let bad = |m: String| Error::InvalidHeader(format!("{}: {m}", path.display()));
        let mut lines = text.lines();
        let meta = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| bad("missing geometry line".into()))?;
        let kv = KeyValues::parse(&meta.split_whitespace().collect::<Vec<_>>().join("\n"))?;
        let (width, height, depth, n_frames): (usize, usize, usize, usize) = (
            kv.parse_required("width")?,
            kv.parse_required("height")?,
            kv.parse_required("depth")?,
            kv.parse_required("frames")?,
        );
        let mut arrivals = vec![None; width * height * depth];
        for line in lines.skip(1).filter(|l| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [x, y, z, a] = fields.as_slice() else {
                return Err(bad(format!("bad row `{line}`")));
            };
            let parse_idx = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad row `{line}`")));
            let (x, y, z) = (parse_idx(x)?, parse_idx(y)?, parse_idx(z)?);
            if x >= width || y >= height || z >= depth {
                return Err(bad(format!("row outside geometry `{line}`")));
            }
            let a: f64 = a.parse().map_err(|_| bad(format!("bad row `{line}`")))?;
            arrivals[(z * height + y) * width + x] = Some(a);
        }
        Ok(ArrivalMap {
            width,
            height,
            depth,
            n_frames,
            arrivals,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomData {
    Stack(FrameStack),
    Volume(Volume4D),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub data: PhantomData,
    pub arrivals: ArrivalMap,
}

struct Segment {
    start: [f64; 3],
    delta: [f64; 3],
    length: f64,
    arc_start: f64,
}

fn segments(path: &[[f64; 3]]) -> Vec<Segment> {
    if path.len() == 1 {
        return vec![Segment {
            start: path[0],
            delta: [0.0; 3],
            length: 0.0,
            arc_start: 0.0,
        }];
    }
    let mut arc = 0.0;
    path.windows(2)
        .map(|w| {
            let delta = [w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]];
            let length = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
            let seg = Segment {
                start: w[0],
                delta,
                length,
                arc_start: arc,
            };
            arc += length;
            seg
        })
        .collect()
}

/// Arc length of the closest path point, if `p` lies within `radius`.
fn arc_length_at(segs: &[Segment], p: [f64; 3], radius: f64) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for s in segs {
        let rel = [p[0] - s.start[0], p[1] - s.start[1], p[2] - s.start[2]];
        let t = if s.length > 0.0 {
            let dot: f64 = rel.iter().zip(&s.delta).map(|(a, b)| a * b).sum();
            (dot / (s.length * s.length)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let dist2: f64 = (0..3).map(|a| (rel[a] - t * s.delta[a]).powi(2)).sum();
        if best.map_or(true, |(d, _)| dist2 < d) {
            best = Some((dist2, s.arc_start + t * s.length));
        }
    }
    best.filter(|(d2, _)| *d2 <= radius * radius).map(|(_, arc)| arc)
}

/// Builds the phantom and its ground truth.
pub fn generate(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let depth = spec.depth.unwrap_or(1);
    let plane = spec.width * spec.height;
    let segs = segments(&spec.vessel);
    let arrivals: Vec<Option<f64>> = (0..plane * depth)
        .into_par_iter()
        .map(|i| {
            let p = [
                (i % spec.width) as f64,
                ((i / spec.width) % spec.height) as f64,
                if spec.depth.is_some() { (i / plane) as f64 } else { 0.0 },
            ];
            arc_length_at(&segs, p, spec.radius).map(|d| d / spec.velocity)
        })
        .collect();
    if let Some(late) = arrivals
        .iter()
        .flatten()
        .find(|&&a| ArrivalMap::peak_frame(a) >= spec.n_frames)
    {
        return Err(Error::InvalidParameter(format!(
            "arrival at frame {late} falls after the last of {} frames",
            spec.n_frames
        )));
    }

    let amplitude = spec.peak_intensity - spec.background;
    let half_width = spec.pulse_width / 2.0;
    let sample_len = plane * depth;
    let mut data = vec![0.0; sample_len * spec.n_frames];
    data.par_chunks_mut(sample_len)
        .enumerate()
        .for_each(|(frame, out)| {
            for (o, arrival) in out.iter_mut().zip(&arrivals) {
                let value = match arrival {
                    None => spec.background,
                    Some(a) => {
                        let offset = (frame as f64 - ArrivalMap::peak_frame(*a) as f64).abs();
                        if offset == 0.0 {
                            spec.peak_intensity
                        } else {
                            let tri = (1.0 - offset / half_width).max(0.0);
                            // floor keeps off-peak samples strictly below the peak
                            spec.background + (amplitude * tri).floor()
                        }
                    }
                };
                *o = if spec.white_background {
                    spec.peak_intensity - value
                } else {
                    value
                };
            }
        });

    let arrivals = ArrivalMap {
        width: spec.width,
        height: spec.height,
        depth,
        n_frames: spec.n_frames,
        arrivals,
    };
    let data = match spec.depth {
        None => PhantomData::Stack(FrameStack::from_raw(spec.width, spec.height, spec.n_frames, data)?),
        Some(nz) => PhantomData::Volume(Volume4D::from_raw(
            spec.width,
            spec.height,
            nz,
            spec.n_frames,
            data,
        )?),
    };
    Ok(Phantom { data, arrivals })
}

/// Circular hue error statistics over vessel pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HueFidelityReport {
    pub pixels_scored: usize,
    pub max_error: f64,
    pub mean_error: f64,
    pub exact_matches: usize,
}

fn score_hues(hue: &[f64], truth: &ArrivalMap, params: &CipsParams) -> Result<HueFidelityReport> {
    params.validate()?;
    let interp = InterpolationSpec::new(params.interp_factor)?;
    let period = params.effective_period(interp.output_frames(truth.n_frames));
    let mut report = HueFidelityReport {
        pixels_scored: 0,
        max_error: 0.0,
        mean_error: 0.0,
        exact_matches: 0,
    };
    let mut total = 0.0;
    for (&observed, arrival) in hue.iter().zip(&truth.arrivals) {
        let Some(a) = arrival else { continue };
        let expected = hue_from_index(ArrivalMap::peak_frame(*a) * interp.factor(), period);
        let diff = (observed - expected).abs();
        let err = diff.min(1.0 - diff);
        report.pixels_scored += 1;
        report.max_error = report.max_error.max(err);
        if observed == expected {
            report.exact_matches += 1;
        }
        total += err;
    }
    if report.pixels_scored > 0 {
        report.mean_error = total / report.pixels_scored as f64;
    }
    Ok(report)
}

/// Compares observed hues with the hue the ground-truth arrival should give.
/// `params` must be the ones used to build `cips` (interpolation factor included).
pub fn score_hue_fidelity(cips: &CipsImage, truth: &ArrivalMap, params: &CipsParams) -> Result<HueFidelityReport> {
    if cips.width() != truth.width || cips.height() != truth.height || truth.depth != 1 {
        return Err(Error::GeometryMismatch(format!(
            "image {}x{} vs arrival map {}x{}x{}",
            cips.width(),
            cips.height(),
            truth.width,
            truth.height,
            truth.depth
        )));
    }
    score_hues(cips.hue(), truth, params)
}

pub fn score_volume_hue_fidelity(
    cips: &CipsVolume,
    truth: &ArrivalMap,
    params: &CipsParams,
) -> Result<HueFidelityReport> {
    if (cips.nx(), cips.ny(), cips.nz()) != (truth.width, truth.height, truth.depth) {
        return Err(Error::GeometryMismatch("volume vs arrival map".into()));
    }
    score_hues(cips.hue(), truth, params)
}
