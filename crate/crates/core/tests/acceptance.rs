//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use cips::cips::compute_cips;
use cips::colorspace::{hsb_to_rgb, render_rgb};
use cips::phantom::{generate, score_hue_fidelity, Phantom, PhantomData, PhantomSpec};
use cips::pipeline::stack_to_cips;
use cips::preprocess::{interpolate_stack, invert_stack, InterpolationSpec};
use cips::stack_io::{load_stack, read_rgb, write_rgb, write_stack};
use cips::volume_render::{mip_axis, mip_oblique, Axis, ViewSpec};
use cips::{CipsParams, CipsVolume, FrameStack};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

/// Builds a `width x 1` stack whose pixel `i` follows `series[i]`.
fn stack_from_series(series: &[Vec<f64>]) -> FrameStack {
    let n = series[0].len();
    let frames = (0..n).map(|t| series.iter().map(|s| s[t]).collect()).collect();
    FrameStack::new(series.len(), 1, frames).unwrap()
}

fn s_curve(white_background: bool) -> PhantomSpec {
    PhantomSpec {
        width: 256,
        height: 256,
        depth: None,
        n_frames: 64,
        vessel: vec![
            [16.0, 40.0, 0.0],
            [240.0, 40.0, 0.0],
            [240.0, 128.0, 0.0],
            [16.0, 128.0, 0.0],
            [16.0, 216.0, 0.0],
            [240.0, 216.0, 0.0],
        ],
        radius: 3.0,
        velocity: 848.0 / 60.0,
        pulse_width: 8.0,
        peak_intensity: 4000.0,
        background: 0.0,
        white_background,
    }
}

fn stack_of(p: Phantom) -> FrameStack {
    match p.data {
        PhantomData::Stack(s) => s,
        PhantomData::Volume(_) => unreachable!(),
    }
}

// 1. 29 frames with interpolation factor 4 give exactly 113 frames.
fn frame_count_anchor() -> Outcome {
    let spec = PhantomSpec {
        width: 64,
        height: 64,
        n_frames: 29,
        vessel: vec![[4.0, 32.0, 0.0], [60.0, 32.0, 0.0]],
        velocity: 2.0,
        ..s_curve(false)
    };
    let stack = stack_of(generate(&spec).map_err(|e| e.to_string())?);
    let start = Instant::now();
    let out = interpolate_stack(&stack, InterpolationSpec::new(4).unwrap()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.frame_count() == 113, || format!("{} frames", out.frame_count()))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("29 -> {} frames in {elapsed:?}", out.frame_count()))
}

/// Independent per-pixel evaluation: explicit loops, integer-modulo hue.
struct Oracle {
    b: f64,
    s: f64,
    h: f64,
    argmax: usize,
}

fn oracle(group: &[Vec<f64>], period: Option<usize>) -> Vec<Oracle> {
    let mut peak = 0.0f64;
    let mut stats = Vec::new();
    for series in group {
        let mut max = series[0];
        let mut min = series[0];
        let mut arg = 0;
        for (i, &v) in series.iter().enumerate() {
            if v > max {
                max = v;
                arg = i;
            }
            if v < min {
                min = v;
            }
        }
        if max > peak {
            peak = max;
        }
        stats.push((max, min, arg));
    }
    stats
        .into_iter()
        .map(|(max, min, arg)| {
            let p = period.unwrap_or(group[0].len());
            Oracle {
                b: if peak == 0.0 { 0.0 } else { max / peak },
                s: if max == 0.0 { 0.0 } else { (max - min) / max },
                h: (arg % p) as f64 / p as f64,
                argmax: arg,
            }
        })
        .collect()
}

// 2. compute_cips agrees with a brute-force evaluation on random series.
fn eq1_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut by_len: Vec<Vec<Vec<f64>>> = vec![Vec::new(); 17];
    for _ in 0..1000 {
        let len = rng.gen_range(1..=16);
        // narrow value ranges on some series so ties and repeats occur
        let hi = if rng.gen_bool(0.3) { 4 } else { 65535 };
        let series: Vec<f64> = (0..len).map(|_| f64::from(rng.gen_range(0..=hi))).collect();
        by_len[len].push(series);
    }
    let mut checked = 0;
    let mut worst_ulps = 0;
    for group in by_len.iter().filter(|g| !g.is_empty()) {
        let stack = stack_from_series(group);
        for period in [None, Some(3), Some(7), Some(22)] {
            let params = match period {
                None => CipsParams::default(),
                Some(p) => CipsParams::cycling(p as f64),
            };
            let image = compute_cips(&stack, &params).map_err(|e| e.to_string())?;
            for (x, want) in oracle(group, period).iter().enumerate() {
                let got = image.get(x, 0);
                ensure(got.h == want.h, || {
                    format!("hue {} vs {} (argmax {}) at series {:?}", got.h, want.h, want.argmax, group[x])
                })?;
                let (db, ds) = (ulps(got.b, want.b), ulps(got.s, want.s));
                ensure(db <= 1 && ds <= 1, || format!("b/s off by {db}/{ds} ulp at {:?}", group[x]))?;
                worst_ulps = worst_ulps.max(db).max(ds);
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} pixel evaluations, worst {worst_ulps} ulp, {elapsed:?}"))
}

fn q(x: f64) -> u8 {
    (x * 255.0 + 0.5).floor() as u8
}

// 3. Constant series render as gray at their normalised level.
fn grayscale_preservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 9;
    let mut series: Vec<Vec<f64>> = (0..500)
        .map(|_| vec![f64::from(rng.gen_range(0u16..=60000)); n])
        .collect();
    let mut pulse = vec![0.0; n];
    pulse[4] = 65535.0;
    series.push(pulse);
    let stack = stack_from_series(&series);
    let global = 65535.0;
    for params in [CipsParams::default(), CipsParams::cycling(2.0)] {
        let rgb = render_rgb(&compute_cips(&stack, &params).map_err(|e| e.to_string())?);
        for (x, s) in series.iter().enumerate().take(500) {
            let want = q(s[0] / global);
            ensure(rgb.get(x, 0) == [want; 3], || format!("{:?} for level {}", rgb.get(x, 0), s[0]))?;
        }
    }
    Ok("500 constant pixels gray at q(v/G)".into())
}

// 4. Period 22: argmax one period apart renders identically. Non-cycling:
// distinct argmax gives distinct hue.
fn periodicity_and_injectivity() -> Outcome {
    let n = 113;
    let series: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let mut s = vec![0.0; n];
            s[a] = 1000.0;
            s
        })
        .collect();
    let stack = stack_from_series(&series);
    let cycled = compute_cips(&stack, &CipsParams::cycling(22.0)).map_err(|e| e.to_string())?;
    let rgb = render_rgb(&cycled);
    let mut pairs = 0;
    for a in 0..n - 22 {
        ensure(rgb.get(a, 0) == rgb.get(a + 22, 0), || {
            format!("argmax {a} vs {}: {:?} vs {:?}", a + 22, rgb.get(a, 0), rgb.get(a + 22, 0))
        })?;
        pairs += 1;
    }
    let flat = compute_cips(&stack, &CipsParams::default()).map_err(|e| e.to_string())?;
    let mut hues: Vec<u64> = flat.hue().iter().map(|h| h.to_bits()).collect();
    hues.sort_unstable();
    hues.dedup();
    ensure(hues.len() == n, || format!("{} distinct hues for {n} arrival times", hues.len()))?;
    let wide = compute_cips(&stack, &CipsParams::cycling(200.0)).map_err(|e| e.to_string())?;
    let mut wide_hues: Vec<u64> = wide.hue().iter().map(|h| h.to_bits()).collect();
    wide_hues.sort_unstable();
    wide_hues.dedup();
    ensure(wide_hues.len() == n, || "period 200 not injective".into())?;
    Ok(format!("{pairs} period-22 pairs identical; {n} distinct hues without cycling"))
}

// 5. Colorspace against the committed reference table.
fn colorspace_oracle() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/hsb_reference.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let (mut grid, mut random) = (0, 0);
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize| f[i].parse::<f64>().unwrap();
        let byte = |i: usize| f[i].parse::<u8>().unwrap();
        let (h, s, b) = (num(1), num(2), num(3));
        let want = [byte(4), byte(5), byte(6)];
        let got = hsb_to_rgb(h, s, b).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("({h}, {s}, {b}): {got:?} vs {want:?}"))?;
        match f[0] {
            "grid" => grid += 1,
            _ => random += 1,
        }
    }
    ensure(grid == 12 * 11 * 11 && random == 1000, || format!("table has {grid} grid / {random} random rows"))?;
    Ok(format!("{grid} grid + {random} random triples byte-exact"))
}

// 6. Phantom hue fidelity at periods 22 and 99.
fn phantom_fidelity() -> Outcome {
    let start = Instant::now();
    let phantom = generate(&s_curve(false)).map_err(|e| e.to_string())?;
    let truth = phantom.arrivals.clone();
    let stack = stack_of(phantom);
    let mut notes = Vec::new();
    for period in [22.0, 99.0] {
        let params = CipsParams::cycling(period);
        let cips = compute_cips(&stack, &params).map_err(|e| e.to_string())?;
        let report = score_hue_fidelity(&cips, &truth, &params).map_err(|e| e.to_string())?;
        ensure(report.pixels_scored > 1000, || format!("only {} vessel pixels", report.pixels_scored))?;
        ensure(report.max_error == 0.0, || format!("period {period}: max error {}", report.max_error))?;
        notes.push(format!("p={period}: {} px, max err 0", report.pixels_scored));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{} ({elapsed:?})", notes.join("; ")))
}

// 7. Inversion of the white-background phantom.
fn inversion_complement() -> Outcome {
    let white = stack_of(generate(&s_curve(true)).map_err(|e| e.to_string())?);
    let dark = stack_of(generate(&s_curve(true).dark_twin()).map_err(|e| e.to_string())?);
    let peak = white.global_max();
    let inverted = invert_stack(&white);
    for (a, b) in white.data().iter().zip(inverted.data()) {
        ensure(a + b == peak, || format!("{a} + {b} != {peak}"))?;
    }
    let params = CipsParams::cycling(22.0);
    let from_white = compute_cips(&inverted, &params).map_err(|e| e.to_string())?;
    let from_dark = compute_cips(&dark, &params).map_err(|e| e.to_string())?;
    let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
    ensure(
        same(from_white.brightness(), from_dark.brightness())
            && same(from_white.hue(), from_dark.hue())
            && same(from_white.saturation(), from_dark.saturation()),
        || "CIPs of inverted white phantom differs from dark twin".into(),
    )?;
    Ok(format!("{} samples complement to {peak}; CIPs bit-identical", white.data().len()))
}

fn random_volume(rng: &mut ChaCha8Rng, n: usize) -> CipsVolume {
    let len = n * n * n;
    // coarse brightness levels force ties along rays
    let b: Vec<f64> = (0..len).map(|_| f64::from(rng.gen_range(0..=12u8)) / 12.0).collect();
    let h: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
    let s: Vec<f64> = b.iter().map(|&v| if v == 0.0 { 0.0 } else { rng.gen::<f64>() }).collect();
    CipsVolume::from_planes(n, n, n, b, h, s).unwrap()
}

/// Brute force over whole slices: a running "brightest so far" image,
/// replaced wherever a later slice is strictly brighter.
fn brute_force_z(vol: &CipsVolume) -> Vec<[f64; 3]> {
    let (nx, ny) = (vol.nx(), vol.ny());
    let mut best: Vec<[f64; 3]> = vec![[f64::NEG_INFINITY, 0.0, 0.0]; nx * ny];
    for z in 0..vol.nz() {
        let slice = vol.slice(z);
        for (i, cell) in best.iter_mut().enumerate() {
            if slice.brightness()[i] > cell[0] {
                *cell = [slice.brightness()[i], slice.hue()[i], slice.saturation()[i]];
            }
        }
    }
    best
}

fn render_triples(cells: &[[f64; 3]]) -> Vec<u8> {
    cells.iter().flat_map(|[b, h, s]| hsb_to_rgb(*h, *s, *b).unwrap()).collect()
}

// 8. MIP against brute force; identity oblique view equals the z projection.
fn mip_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..4 {
        let vol = random_volume(&mut rng, 32);
        let axis = mip_axis(&vol, Axis::Z);
        let brute = render_triples(&brute_force_z(&vol));
        ensure(render_rgb(&axis).as_bytes() == brute.as_slice(), || format!("trial {trial}: axis z vs brute force"))?;

        // x and y projections: brute force over the matching voxel lines
        let n = 32;
        for (axis_kind, name) in [(Axis::X, "x"), (Axis::Y, "y")] {
            let img = mip_axis(&vol, axis_kind);
            let mut cells = Vec::with_capacity(n * n);
            for v in 0..n {
                for u in 0..n {
                    let mut cell = [f64::NEG_INFINITY, 0.0, 0.0];
                    for k in 0..n {
                        let t = match axis_kind {
                            Axis::X => vol.get(k, v, n - 1 - u),
                            _ => vol.get(u, k, n - 1 - v),
                        };
                        if t.b > cell[0] {
                            cell = [t.b, t.h, t.s];
                        }
                    }
                    cells.push(cell);
                }
            }
            ensure(render_rgb(&img).as_bytes() == render_triples(&cells).as_slice(), || {
                format!("trial {trial}: axis {name} vs brute force")
            })?;
        }

        let oblique = mip_oblique(&vol, &ViewSpec::default()).map_err(|e| e.to_string())?;
        ensure(oblique == axis, || format!("trial {trial}: identity oblique differs from axis z"))?;
    }
    Ok("4 random 32^3 volumes: axis x/y/z match brute force; identity view bit-identical".into())
}

fn run_pipeline(input: &Path, out: &Path) -> Result<Vec<u8>, String> {
    let stack = load_stack(input).map_err(|e| e.to_string())?;
    let params = CipsParams {
        invert: true,
        interp_factor: 4,
        ..CipsParams::cycling(22.0)
    };
    let image = stack_to_cips(&stack, &params).map_err(|e| e.to_string())?;
    write_rgb(&render_rgb(&image), out).map_err(|e| e.to_string())?;
    std::fs::read(out).map_err(|e| e.to_string())
}

// 9. Full pipeline on 29 -> 113 frames at 512x512: time and determinism.
fn determinism_performance() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = PhantomSpec {
        width: 512,
        height: 512,
        n_frames: 29,
        vessel: vec![[20.0, 20.0, 0.0], [490.0, 100.0, 0.0], [60.0, 300.0, 0.0], [480.0, 490.0, 0.0]],
        radius: 6.0,
        velocity: 1500.0 / 27.0,
        pulse_width: 4.0,
        peak_intensity: 60000.0,
        background: 0.0,
        ..s_curve(true)
    };
    let stack = stack_of(generate(&spec).map_err(|e| e.to_string())?);
    let frames_dir = dir.path().join("frames");
    write_stack(&stack, &frames_dir).map_err(|e| e.to_string())?;

    let start = Instant::now();
    let first = run_pipeline(&frames_dir, &dir.path().join("a.png"))?;
    let elapsed = start.elapsed();
    let second = run_pipeline(&frames_dir, &dir.path().join("b.png"))?;
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let single = pool(1).install(|| run_pipeline(&frames_dir, &dir.path().join("c.png")))?;
    let many = pool(4).install(|| run_pipeline(&frames_dir, &dir.path().join("d.png")))?;
    ensure(first == second, || "two runs differ".into())?;
    ensure(first == single && first == many, || "output depends on thread count".into())?;
    let decoded = read_rgb(&dir.path().join("a.png")).map_err(|e| e.to_string())?;
    ensure(decoded.width() == 512 && decoded.height() == 512, || "wrong output geometry".into())?;
    ensure(elapsed < Duration::from_secs(5), || format!("pipeline took {elapsed:?}"))?;
    Ok(format!("load+invert+interp(113)+cips+png in {elapsed:?}; identical across runs and 1/4 threads"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 frame-count anchor", frame_count_anchor),
        ("2 per-pixel oracle equivalence", eq1_oracle),
        ("3 grayscale preservation", grayscale_preservation),
        ("4 hue periodicity and injectivity", periodicity_and_injectivity),
        ("5 colorspace reference table", colorspace_oracle),
        ("6 phantom hue fidelity", phantom_fidelity),
        ("7 inversion complement", inversion_complement),
        ("8 MIP equivalence", mip_equivalence),
        ("9 determinism and performance", determinism_performance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
