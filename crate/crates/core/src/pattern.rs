//! Deterministic synthetic test images: phantoms for the MTF harness,
//! textured scenes for quality benchmarks, and sources for the simulated
//! acquisition pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::ImageGrid;
use crate::{cast, Scalar};

/// Abramowitz–Stegun 7.1.26 approximation, ~1e-7 absolute accuracy.
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = ((((1.061405429 * t - 1.453152027) * t + 1.421413741) * t - 0.284496736) * t
        + 0.254829592)
        * t;
    sign * (1.0 - poly * (-x * x).exp())
}

/// Disk of intensity `fg` on a `bg` background. `edge_sigma > 0` renders a
/// Gaussian-soft edge (erf profile); `edge_sigma == 0` renders a hard edge
/// antialiased by 4×4 subpixel coverage.
pub fn disk<S: Scalar>(
    width: usize,
    height: usize,
    cx: f64,
    cy: f64,
    radius: f64,
    edge_sigma: f64,
    fg: f64,
    bg: f64,
) -> ImageGrid<S> {
    let mut values = Vec::with_capacity(width * height);
    for i in 0..height {
        for j in 0..width {
            let v = if edge_sigma > 0.0 {
                let d = ((j as f64 - cx).powi(2) + (i as f64 - cy).powi(2)).sqrt();
                let inside = 0.5 * (1.0 - erf((d - radius) / (edge_sigma * std::f64::consts::SQRT_2)));
                bg + (fg - bg) * inside
            } else {
                let mut cover = 0.0;
                for si in 0..4 {
                    for sj in 0..4 {
                        let y = i as f64 + (si as f64 + 0.5) / 4.0 - 0.5;
                        let x = j as f64 + (sj as f64 + 0.5) / 4.0 - 0.5;
                        if (x - cx).powi(2) + (y - cy).powi(2) <= radius * radius {
                            cover += 1.0;
                        }
                    }
                }
                bg + (fg - bg) * cover / 16.0
            };
            values.push(cast::<S>(v));
        }
    }
    ImageGrid::from_vec(width, height, values).expect("finite by construction")
}

pub fn checkerboard<S: Scalar>(
    width: usize,
    height: usize,
    tile: usize,
    lo: f64,
    hi: f64,
) -> ImageGrid<S> {
    let mut values = Vec::with_capacity(width * height);
    for i in 0..height {
        for j in 0..width {
            let v = if ((i / tile) + (j / tile)) % 2 == 0 { lo } else { hi };
            values.push(cast::<S>(v));
        }
    }
    ImageGrid::from_vec(width, height, values).unwrap()
}

/// Intensity ramp over the pixel index, normalized to [0, 1].
pub fn ramp<S: Scalar>(width: usize, height: usize) -> ImageGrid<S> {
    let n = (width * height - 1).max(1) as f64;
    ImageGrid::from_vec(
        width,
        height,
        (0..width * height).map(|i| cast::<S>(i as f64 / n)).collect(),
    )
    .unwrap()
}

fn box_blur(values: &mut Vec<f64>, width: usize, height: usize, radius: usize) {
    let mut tmp = vec![0.0; values.len()];
    // Horizontal.
    for i in 0..height {
        for j in 0..width {
            let lo = j.saturating_sub(radius);
            let hi = (j + radius).min(width - 1);
            let mut acc = 0.0;
            for k in lo..=hi {
                acc += values[i * width + k];
            }
            tmp[i * width + j] = acc / (hi - lo + 1) as f64;
        }
    }
    // Vertical.
    for i in 0..height {
        for j in 0..width {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(height - 1);
            let mut acc = 0.0;
            for k in lo..=hi {
                acc += tmp[k * width + j];
            }
            values[i * width + j] = acc / (hi - lo + 1) as f64;
        }
    }
}

/// Band-limited random field: seeded white noise smoothed by repeated box
/// blurs and stretched to [0.05, 0.95]. Statistically uniform across rows,
/// which makes it suitable for seam statistics.
pub fn smooth_field<S: Scalar>(width: usize, height: usize, seed: u64) -> ImageGrid<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..width * height).map(|_| rng.gen_range(0.0..1.0)).collect();
    box_blur(&mut values, width, height, 2);
    box_blur(&mut values, width, height, 2);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = (hi - lo).max(1e-12);
    ImageGrid::from_vec(
        width,
        height,
        values
            .into_iter()
            .map(|v| cast::<S>(0.05 + 0.9 * (v - lo) / span))
            .collect(),
    )
    .unwrap()
}

/// Resolution-style target: vertical bar groups of shrinking pitch over the
/// top half, horizontal groups over the bottom half.
pub fn bars<S: Scalar>(width: usize, height: usize) -> ImageGrid<S> {
    let pitches = [16usize, 12, 8, 6, 4, 3, 2];
    let group_w = width / pitches.len();
    let mut values = vec![0.15f64; width * height];
    for (g, &pitch) in pitches.iter().enumerate() {
        let j0 = g * group_w;
        let j1 = if g + 1 == pitches.len() { width } else { j0 + group_w };
        for i in 0..height {
            for j in j0..j1 {
                let phase = if i < height / 2 { j / pitch } else { i / pitch };
                if phase % 2 == 0 {
                    values[i * width + j] = 0.85;
                }
            }
        }
    }
    ImageGrid::from_vec(width, height, values.into_iter().map(cast::<S>).collect()).unwrap()
}

/// Textured benchmark scene: a smooth random field with bar groups, disks,
/// and a diagonal edge layered on top. Different seeds give different
/// layouts; contrast stays inside [0, 1].
pub fn test_card<S: Scalar>(width: usize, height: usize, seed: u64) -> ImageGrid<S> {
    let field = smooth_field::<f64>(width, height, seed);
    let bar_img = bars::<f64>(width, height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut values: Vec<f64> = field
        .values()
        .iter()
        .zip(bar_img.values())
        .map(|(&f, &b)| 0.55 * f + 0.45 * b)
        .collect();
    // A few soft disks.
    for _ in 0..4 {
        let r = rng.gen_range(0.05..0.12) * width as f64;
        let cx = rng.gen_range(r..width as f64 - r);
        let cy = rng.gen_range(r..height as f64 - r);
        let amp = rng.gen_range(-0.25..0.25);
        for i in 0..height {
            for j in 0..width {
                let d = ((j as f64 - cx).powi(2) + (i as f64 - cy).powi(2)).sqrt();
                let inside = 0.5 * (1.0 - erf((d - r) / (1.2 * std::f64::consts::SQRT_2)));
                values[i * width + j] += amp * inside;
            }
        }
    }
    // Diagonal edge.
    let offset = rng.gen_range(-0.2..0.2) * width as f64;
    for i in 0..height {
        for j in 0..width {
            if (j as f64) - (i as f64) > offset {
                values[i * width + j] += 0.08;
            }
        }
    }
    ImageGrid::from_vec(
        width,
        height,
        values
            .into_iter()
            .map(|v| cast::<S>(v.clamp(0.0, 1.0)))
            .collect(),
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_profiles_are_bounded_and_centered() {
        let hard = disk::<f64>(64, 64, 32.0, 32.0, 20.0, 0.0, 0.9, 0.1);
        let soft = disk::<f64>(64, 64, 32.0, 32.0, 20.0, 1.0, 0.9, 0.1);
        for g in [&hard, &soft] {
            assert!((g.get(32, 32) - 0.9).abs() < 1e-3);
            assert!((g.get(1, 1) - 0.1).abs() < 1e-3);
            for &v in g.values() {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(smooth_field::<f64>(32, 32, 9), smooth_field::<f64>(32, 32, 9));
        assert_eq!(test_card::<f64>(48, 48, 3), test_card::<f64>(48, 48, 3));
        assert_ne!(test_card::<f64>(48, 48, 3), test_card::<f64>(48, 48, 4));
    }
}
