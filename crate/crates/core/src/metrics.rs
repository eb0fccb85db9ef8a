//! Quality assessment: PSNR, SSIM, circular-edge MTF, and the
//! multi-image interpolation baseline.
//!
//! Metric arithmetic runs internally in f64 regardless of the image scalar
//! type.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::{cast, Scalar};

fn check_same_dims<S: Scalar>(a: &ImageGrid<S>, b: &ImageGrid<S>) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::contract(format!(
            "image dimensions differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Peak signal-to-noise ratio in decibels; +∞ when the images are equal.
pub fn psnr<S: Scalar>(a: &ImageGrid<S>, b: &ImageGrid<S>, peak: S) -> Result<S> {
    check_same_dims(a, b)?;
    let mut acc = 0.0f64;
    for (&x, &y) in a.values().iter().zip(b.values()) {
        let d = x.to_f64().unwrap() - y.to_f64().unwrap();
        acc += d * d;
    }
    let mse = acc / a.len() as f64;
    if mse == 0.0 {
        return Ok(S::infinity());
    }
    let p = peak.to_f64().unwrap();
    Ok(cast(10.0 * (p * p / mse).log10()))
}

const SSIM_WINDOW: usize = 8;

/// Mean local SSIM over sliding 8×8 windows with the standard stabilizing
/// constants (K1 = 0.01, K2 = 0.03) for unit dynamic range. Images smaller
/// than the window are scored as one whole-image window.
pub fn ssim<S: Scalar>(a: &ImageGrid<S>, b: &ImageGrid<S>) -> Result<S> {
    check_same_dims(a, b)?;
    let (w, h) = (a.width(), a.height());
    let c1 = 0.01f64 * 0.01;
    let c2 = 0.03f64 * 0.03;

    // Prefix sums over a, b, a², b², ab.
    let mut sums = vec![[0.0f64; 5]; (w + 1) * (h + 1)];
    for i in 0..h {
        for j in 0..w {
            let x = a.get(i, j).to_f64().unwrap();
            let y = b.get(i, j).to_f64().unwrap();
            let here = [x, y, x * x, y * y, x * y];
            let idx = (i + 1) * (w + 1) + j + 1;
            for k in 0..5 {
                sums[idx][k] = here[k] + sums[idx - 1][k] + sums[idx - (w + 1)][k]
                    - sums[idx - (w + 1) - 1][k];
            }
        }
    }
    let window_sum = |i0: usize, j0: usize, wh: usize, ww: usize| -> [f64; 5] {
        let (i1, j1) = (i0 + wh, j0 + ww);
        let mut out = [0.0; 5];
        for k in 0..5 {
            out[k] = sums[i1 * (w + 1) + j1][k] - sums[i0 * (w + 1) + j1][k]
                - sums[i1 * (w + 1) + j0][k]
                + sums[i0 * (w + 1) + j0][k];
        }
        out
    };

    let (wh, ww) = (SSIM_WINDOW.min(h), SSIM_WINDOW.min(w));
    let n = (wh * ww) as f64;
    let mut total = 0.0f64;
    let mut count = 0usize;
    for i0 in 0..=h - wh {
        for j0 in 0..=w - ww {
            let [sa, sb, saa, sbb, sab] = window_sum(i0, j0, wh, ww);
            let ma = sa / n;
            let mb = sb / n;
            let va = saa / n - ma * ma;
            let vb = sbb / n - mb * mb;
            let cov = sab / n - ma * mb;
            let s = ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            total += s;
            count += 1;
        }
    }
    Ok(cast(total / count as f64))
}

/// Modulation transfer function estimated from a circular edge.
#[derive(Debug, Clone)]
pub struct MtfCurve {
    /// Cycles per pixel, uniformly spaced, up to Nyquist (0.5).
    pub frequencies: Vec<f64>,
    /// Modulation normalized to 1 at zero frequency.
    pub magnitudes: Vec<f64>,
    /// Frequency where the modulation first drops below 0.10; clamped to
    /// the last measured frequency when it never does.
    pub mtf10: f64,
}

impl MtfCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency,magnitude\n");
        for (f, m) in self.frequencies.iter().zip(&self.magnitudes) {
            out.push_str(&format!("{f},{m}\n"));
        }
        out
    }

    /// Linear interpolation of the modulation at an arbitrary frequency.
    pub fn magnitude_at(&self, f: f64) -> f64 {
        let fs = &self.frequencies;
        if f <= fs[0] {
            return self.magnitudes[0];
        }
        for k in 1..fs.len() {
            if f <= fs[k] {
                let t = (f - fs[k - 1]) / (fs[k] - fs[k - 1]);
                return self.magnitudes[k - 1] * (1.0 - t) + self.magnitudes[k] * t;
            }
        }
        *self.magnitudes.last().unwrap()
    }
}

const ESF_BIN: f64 = 0.1;

/// Radial edge-spread measurement on a disk of roughly uniform interior:
/// pixel intensities are binned by distance to the center (0.1 px bins),
/// monotone-smoothed, differentiated to the line-spread function and
/// Fourier-transformed; the magnitude is normalized to 1 at DC.
pub fn mtf_circular_edge<S: Scalar>(
    img: &ImageGrid<S>,
    center: (f64, f64),
    radius: f64,
) -> Result<MtfCurve> {
    let (cx, cy) = center;
    let (w, h) = (img.width() as f64, img.height() as f64);
    if radius < 3.0 {
        return Err(Error::analysis(format!(
            "disk radius {radius} too small for an edge profile"
        )));
    }
    let border = cx.min(cy).min(w - 1.0 - cx).min(h - 1.0 - cy);
    if border < radius + 4.0 {
        return Err(Error::analysis(format!(
            "disk (center {cx},{cy}, radius {radius}) too close to the image border"
        )));
    }
    let r_max = (2.0 * radius).min(border);
    let nbins = (r_max / ESF_BIN).floor() as usize;

    let mut sums = vec![0.0f64; nbins];
    let mut counts = vec![0u32; nbins];
    let i0 = (cy - r_max).floor().max(0.0) as usize;
    let i1 = ((cy + r_max).ceil() as usize).min(img.height() - 1);
    let j0 = (cx - r_max).floor().max(0.0) as usize;
    let j1 = ((cx + r_max).ceil() as usize).min(img.width() - 1);
    for i in i0..=i1 {
        for j in j0..=j1 {
            let d = ((j as f64 - cx).powi(2) + (i as f64 - cy).powi(2)).sqrt();
            let bin = (d / ESF_BIN) as usize;
            if bin < nbins {
                sums[bin] += img.get(i, j).to_f64().unwrap();
                counts[bin] += 1;
            }
        }
    }

    // Bin means, with empty bins bridged by linear interpolation.
    let mut esf = vec![f64::NAN; nbins];
    for k in 0..nbins {
        if counts[k] > 0 {
            esf[k] = sums[k] / counts[k] as f64;
        }
    }
    fill_gaps(&mut esf)?;

    // Monotone smoothing before differentiation.
    let n4 = (nbins / 4).max(1);
    let inner: f64 = esf[..n4].iter().sum::<f64>() / n4 as f64;
    let outer: f64 = esf[nbins - n4..].iter().sum::<f64>() / n4 as f64;
    let decreasing = inner >= outer;
    if !decreasing {
        for v in &mut esf {
            *v = -*v;
        }
    }
    pava_non_increasing(&mut esf);
    if !decreasing {
        for v in &mut esf {
            *v = -*v;
        }
    }

    // Line-spread function by central differences (per bin).
    let mut lsf = vec![0.0f64; nbins];
    for k in 1..nbins - 1 {
        lsf[k] = (esf[k + 1] - esf[k - 1]) / 2.0;
    }
    lsf[0] = esf[1] - esf[0];
    lsf[nbins - 1] = esf[nbins - 1] - esf[nbins - 2];

    // DFT and normalization at DC.
    let mut buf: Vec<Complex<f64>> = lsf.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(nbins).process(&mut buf);
    let dc = buf[0].norm();
    if dc < 1e-9 {
        return Err(Error::analysis("no edge contrast found at the given disk"));
    }
    let mut frequencies = Vec::new();
    let mut magnitudes = Vec::new();
    for (k, v) in buf.iter().enumerate().take(nbins / 2 + 1) {
        let f = k as f64 / (nbins as f64 * ESF_BIN);
        if f > 0.5 + 1e-12 {
            break;
        }
        frequencies.push(f);
        magnitudes.push(v.norm() / dc);
    }

    let mut mtf10 = *frequencies.last().unwrap();
    for k in 1..magnitudes.len() {
        if magnitudes[k] < 0.1 {
            let t = (0.1 - magnitudes[k - 1]) / (magnitudes[k] - magnitudes[k - 1]);
            mtf10 = frequencies[k - 1] + t * (frequencies[k] - frequencies[k - 1]);
            break;
        }
    }
    Ok(MtfCurve {
        frequencies,
        magnitudes,
        mtf10,
    })
}

fn fill_gaps(esf: &mut [f64]) -> Result<()> {
    let n = esf.len();
    let first = esf
        .iter()
        .position(|v| !v.is_nan())
        .ok_or_else(|| Error::analysis("no pixels fell into the edge profile"))?;
    let last = n - 1 - esf.iter().rev().position(|v| !v.is_nan()).unwrap();
    for k in 0..first {
        esf[k] = esf[first];
    }
    for k in last + 1..n {
        esf[k] = esf[last];
    }
    let mut k = first;
    while k <= last {
        if esf[k].is_nan() {
            let gap_start = k - 1;
            let mut gap_end = k;
            while esf[gap_end].is_nan() {
                gap_end += 1;
            }
            let span = (gap_end - gap_start) as f64;
            for m in k..gap_end {
                let t = (m - gap_start) as f64 / span;
                esf[m] = esf[gap_start] * (1.0 - t) + esf[gap_end] * t;
            }
            k = gap_end;
        } else {
            k += 1;
        }
    }
    Ok(())
}

/// Pool-adjacent-violators; enforces a non-increasing sequence.
fn pava_non_increasing(values: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values.iter() {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.pop();
            blocks.pop();
            let n = n1 + n2;
            blocks.push(((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n));
        }
    }
    let mut k = 0;
    for (mean, n) in blocks {
        for _ in 0..n {
            values[k] = mean;
            k += 1;
        }
    }
}

/// Bilinear upsampling with corner alignment: HR(i, j) samples the LR image
/// at (i/f, j/f), so HR lattice sites i = f·u carry the LR values exactly.
fn corner_upsample<S: Scalar>(lr: &ImageGrid<S>, factor: usize) -> ImageGrid<S> {
    let (hw, hh) = (lr.width() * factor, lr.height() * factor);
    let f = factor as f64;
    let mut out = Vec::with_capacity(hw * hh);
    for i in 0..hh {
        let sy = (i as f64 / f).min((lr.height() - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(lr.height() - 1);
        let fy = sy - y0 as f64;
        for j in 0..hw {
            let sx = (j as f64 / f).min((lr.width() - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(lr.width() - 1);
            let fx = sx - x0 as f64;
            let v = cast::<S>((1.0 - fy) * (1.0 - fx)) * lr.get(y0, x0)
                + cast::<S>((1.0 - fy) * fx) * lr.get(y0, x1)
                + cast::<S>(fy * (1.0 - fx)) * lr.get(y1, x0)
                + cast::<S>(fy * fx) * lr.get(y1, x1);
            out.push(v);
        }
    }
    ImageGrid::from_vec(hw, hh, out).expect("upsample produces finite values")
}

/// Multi-image interpolation baseline: every LR sample is inserted at its
/// integer HR site (scale·u + round(scale·dy), scale·v + round(scale·dx));
/// HR sites not covered by any frame are filled from the bilinear
/// upsampling of the reference frame. With a complete integer-shift
/// pattern every HR pixel comes from exactly one LR frame.
pub fn interp_fuse<S: Scalar>(
    frames: &[ImageGrid<S>],
    shifts: &[(S, S)],
    scale: usize,
) -> Result<ImageGrid<S>> {
    if frames.is_empty() {
        return Err(Error::contract("at least one frame is required"));
    }
    if frames.len() != shifts.len() {
        return Err(Error::contract(format!(
            "{} frames but {} shifts",
            frames.len(),
            shifts.len()
        )));
    }
    let (lw, lh) = (frames[0].width(), frames[0].height());
    for f in frames.iter() {
        if f.width() != lw || f.height() != lh {
            return Err(Error::contract("inconsistent frame sizes"));
        }
    }
    let (hw, hh) = (lw * scale, lh * scale);
    let mut out = corner_upsample(&frames[0], scale).into_values();
    let mut filled = vec![false; hw * hh];
    for (frame, &(dx, dy)) in frames.iter().zip(shifts) {
        let ox = (scale as f64 * dx.to_f64().unwrap()).round() as isize;
        let oy = (scale as f64 * dy.to_f64().unwrap()).round() as isize;
        for u in 0..lh {
            let si = u as isize * scale as isize + oy;
            if si < 0 || si >= hh as isize {
                continue;
            }
            for v in 0..lw {
                let sj = v as isize * scale as isize + ox;
                if sj < 0 || sj >= hw as isize {
                    continue;
                }
                let idx = si as usize * hw + sj as usize;
                if !filled[idx] {
                    out[idx] = frame.get(u, v);
                    filled[idx] = true;
                }
            }
        }
    }
    ImageGrid::from_vec(hw, hh, out)
}
