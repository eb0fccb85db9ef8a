//! Forward degradation model y_i = A_i x + ε_i.
//!
//! Each frame's system operator factors as A_i = D·B·M_i:
//!
//! * `D` — decimation by box-averaging each scale×scale block (binning),
//! * `B` — spatially invariant blur with a normalized odd kernel,
//! * `M_i` — subpixel translation with bilinear weights.
//!
//! Shifts are the detector displacement in LR pixel units: a frame captured
//! at shift (dx, dy) samples the scene at +scale·(dx, dy) HR pixels. Reads
//! that would fall outside the image replicate the border row/column, which
//! keeps every operator row summing to one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::sparse::SparseOperator;
use crate::{cast, Scalar};

/// Normalized 2D blur kernel with odd side length.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel<S> {
    size: usize,
    values: Vec<S>,
}

impl<S: Scalar> BlurKernel<S> {
    /// The 1×1 kernel [1] (no blur).
    pub fn identity() -> Self {
        BlurKernel {
            size: 1,
            values: vec![S::one()],
        }
    }

    /// Sampled Gaussian, normalized to sum exactly one.
    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        if size % 2 == 0 || size == 0 {
            return Err(Error::config(format!(
                "blur kernel size must be odd, got {size}"
            )));
        }
        if sigma <= 0.0 {
            return Err(Error::config("blur sigma must be positive"));
        }
        let radius = (size / 2) as isize;
        let mut values = Vec::with_capacity(size * size);
        let mut total = 0.0f64;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let v = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                total += v;
                values.push(v);
            }
        }
        Ok(BlurKernel {
            size,
            values: values.into_iter().map(|v| cast(v / total)).collect(),
        })
    }

    /// Validates an explicit kernel: odd size, non-negative entries, sum
    /// within 1e-12 of one.
    pub fn from_values(size: usize, values: Vec<S>) -> Result<Self> {
        if size % 2 == 0 || size == 0 {
            return Err(Error::config(format!(
                "blur kernel size must be odd, got {size}"
            )));
        }
        if values.len() != size * size {
            return Err(Error::config(format!(
                "blur kernel has {} entries, expected {}",
                values.len(),
                size * size
            )));
        }
        if values.iter().any(|&v| !v.is_finite() || v < S::zero()) {
            return Err(Error::config("blur kernel entries must be finite and >= 0"));
        }
        let sum: S = values.iter().copied().sum();
        if (sum - S::one()).abs() > cast(1e-12) {
            return Err(Error::config(format!(
                "blur kernel is not normalized (sum = {sum})"
            )));
        }
        Ok(BlurKernel { size, values })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    #[inline]
    fn at(&self, dy: isize, dx: isize) -> S {
        let radius = (self.size / 2) as isize;
        self.values[((dy + radius) * self.size as isize + (dx + radius)) as usize]
    }
}

/// Parameters of the synthetic degradation chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationSpec<S> {
    /// Integer upscaling factor r (LR pixel = r×r HR block).
    pub scale: usize,
    pub blur: BlurKernel<S>,
    /// Per-frame detector shifts (dx, dy) in LR pixel units.
    pub shifts: Vec<(S, S)>,
    /// Standard deviation of the additive Gaussian noise, intensity units.
    pub noise_sigma: S,
    pub hr_width: usize,
    pub hr_height: usize,
}

impl<S: Scalar> DegradationSpec<S> {
    pub fn validate(&self) -> Result<()> {
        if self.scale == 0 {
            return Err(Error::config("scale must be >= 1"));
        }
        if self.shifts.is_empty() {
            return Err(Error::config("at least one frame shift is required"));
        }
        if self.hr_width == 0 || self.hr_height == 0 {
            return Err(Error::config("image dimensions must be positive"));
        }
        if self.hr_width % self.scale != 0 || self.hr_height % self.scale != 0 {
            return Err(Error::config(format!(
                "HR dimensions {}x{} not divisible by scale {}",
                self.hr_width, self.hr_height, self.scale
            )));
        }
        if self
            .shifts
            .iter()
            .any(|&(dx, dy)| !dx.is_finite() || !dy.is_finite())
        {
            return Err(Error::config("shifts must be finite"));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < S::zero() {
            return Err(Error::config("noise sigma must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn frames(&self) -> usize {
        self.shifts.len()
    }

    pub fn lr_width(&self) -> usize {
        self.hr_width / self.scale
    }

    pub fn lr_height(&self) -> usize {
        self.hr_height / self.scale
    }

    pub fn hr_len(&self) -> usize {
        self.hr_width * self.hr_height
    }

    pub fn lr_len(&self) -> usize {
        self.lr_width() * self.lr_height()
    }

    /// Largest shift magnitude (per axis) in LR pixel units.
    pub fn max_shift(&self) -> f64 {
        self.shifts
            .iter()
            .map(|&(dx, dy)| {
                dx.to_f64()
                    .unwrap()
                    .abs()
                    .max(dy.to_f64().unwrap().abs())
            })
            .fold(0.0, f64::max)
    }

    /// The canonical capture pattern: for scale 2 the clockwise half-pixel
    /// square (0,0) → (½,0) → (½,½) → (0,½); for larger scales the full
    /// (a/r, b/r) subpixel grid, row-major, giving r² frames.
    pub fn default_shifts(scale: usize) -> Vec<(S, S)> {
        if scale == 2 {
            let h = cast::<S>(0.5);
            let z = S::zero();
            return vec![(z, z), (h, z), (h, h), (z, h)];
        }
        let mut shifts = Vec::with_capacity(scale * scale);
        for b in 0..scale {
            for a in 0..scale {
                shifts.push((
                    cast::<S>(a as f64 / scale as f64),
                    cast::<S>(b as f64 / scale as f64),
                ));
            }
        }
        shifts
    }
}

/// Box-average decimation D: each LR pixel row carries r² weights of 1/r²
/// over its source block.
pub fn build_decimation<S: Scalar>(spec: &DegradationSpec<S>) -> Result<SparseOperator<S>> {
    spec.validate()?;
    let r = spec.scale;
    let (hw, lw, lh) = (spec.hr_width, spec.lr_width(), spec.lr_height());
    let w = cast::<S>(1.0 / (r * r) as f64);
    SparseOperator::from_row_entries(spec.lr_len(), spec.hr_len(), |row, entries| {
        let (u, v) = (row / lw, row % lw);
        debug_assert!(u < lh);
        for dy in 0..r {
            for dx in 0..r {
                let col = (u * r + dy) * hw + v * r + dx;
                entries.push((col as u32, w));
            }
        }
    })
}

/// Blur B: the kernel stamped at each HR pixel, borders folded back by
/// replication (clamped source indices merge, so rows still sum to one).
pub fn build_blur<S: Scalar>(spec: &DegradationSpec<S>) -> Result<SparseOperator<S>> {
    spec.validate()?;
    let (hw, hh) = (spec.hr_width, spec.hr_height);
    let radius = (spec.blur.size() / 2) as isize;
    SparseOperator::from_row_entries(spec.hr_len(), spec.hr_len(), |row, entries| {
        let (i, j) = ((row / hw) as isize, (row % hw) as isize);
        for dy in -radius..=radius {
            let sy = (i + dy).clamp(0, hh as isize - 1) as usize;
            for dx in -radius..=radius {
                let sx = (j + dx).clamp(0, hw as isize - 1) as usize;
                entries.push(((sy * hw + sx) as u32, spec.blur.at(dy, dx)));
            }
        }
    })
}

/// Motion M_i: translation by scale·shift HR pixels with bilinear weights.
/// Integer shifts degenerate to permutation rows; out-of-image sources
/// replicate the border.
pub fn build_motion<S: Scalar>(
    spec: &DegradationSpec<S>,
    shift_index: usize,
) -> Result<SparseOperator<S>> {
    spec.validate()?;
    let (dx, dy) = *spec
        .shifts
        .get(shift_index)
        .ok_or_else(|| Error::contract(format!("shift index {shift_index} out of bounds")))?;
    let hx = spec.scale as f64 * dx.to_f64().unwrap();
    let hy = spec.scale as f64 * dy.to_f64().unwrap();
    let (hw, hh) = (spec.hr_width, spec.hr_height);
    SparseOperator::from_row_entries(spec.hr_len(), spec.hr_len(), |row, entries| {
        let (i, j) = (row / hw, row % hw);
        // The frame at detector shift +s samples the scene at +s.
        let ty = i as f64 + hy;
        let tx = j as f64 + hx;
        let y0 = ty.floor();
        let x0 = tx.floor();
        let fy = ty - y0;
        let fx = tx - x0;
        let clamp_y = |y: f64| (y.max(0.0) as usize).min(hh - 1);
        let clamp_x = |x: f64| (x.max(0.0) as usize).min(hw - 1);
        let taps_y: &[(f64, f64)] = if fy == 0.0 {
            &[(0.0, 1.0)]
        } else {
            &[(0.0, 0.0), (1.0, 0.0)]
        };
        for &(oy, _) in taps_y {
            let wy = if fy == 0.0 {
                1.0
            } else if oy == 0.0 {
                1.0 - fy
            } else {
                fy
            };
            let sy = clamp_y(y0 + oy);
            if fx == 0.0 {
                entries.push(((sy * hw + clamp_x(x0)) as u32, cast(wy)));
            } else {
                entries.push(((sy * hw + clamp_x(x0)) as u32, cast(wy * (1.0 - fx))));
                entries.push(((sy * hw + clamp_x(x0 + 1.0)) as u32, cast(wy * fx)));
            }
        }
    })
}

/// The per-frame operators A_i together with their cached transposes.
#[derive(Debug, Clone)]
pub struct SystemModel<S> {
    spec: DegradationSpec<S>,
    ops: Vec<SparseOperator<S>>,
    ops_t: Vec<SparseOperator<S>>,
}

impl<S: Scalar> SystemModel<S> {
    /// Builds A_i = (D·B)·M_i for every frame. D·B is composed once and
    /// shared across frames.
    pub fn build(spec: DegradationSpec<S>) -> Result<Self> {
        spec.validate()?;
        let d = build_decimation(&spec)?;
        let b = build_blur(&spec)?;
        let db = d.compose(&b)?;
        let mut ops = Vec::with_capacity(spec.frames());
        for i in 0..spec.frames() {
            let m = build_motion(&spec, i)?;
            ops.push(db.compose(&m)?);
        }
        Self::from_operators(spec, ops)
    }

    /// Wraps externally built operators (transposes are cached here).
    /// Validates dimensions and row-stochasticity.
    pub fn from_operators(spec: DegradationSpec<S>, ops: Vec<SparseOperator<S>>) -> Result<Self> {
        if ops.len() != spec.frames() {
            return Err(Error::contract(format!(
                "{} operators supplied for {} frames",
                ops.len(),
                spec.frames()
            )));
        }
        let tol = cast::<S>(1e-9);
        for (i, op) in ops.iter().enumerate() {
            if op.rows() != spec.lr_len() || op.cols() != spec.hr_len() {
                return Err(Error::contract(format!(
                    "operator {i} is {}x{}, expected {}x{}",
                    op.rows(),
                    op.cols(),
                    spec.lr_len(),
                    spec.hr_len()
                )));
            }
            for r in 0..op.rows() {
                let s = op.row_sum(r);
                if (s - S::one()).abs() > tol {
                    return Err(Error::Numerical {
                        worker: 0,
                        stage: "system build",
                        detail: format!("row {r} of operator {i} sums to {s}, expected 1"),
                    });
                }
            }
        }
        let ops_t = ops.iter().map(SparseOperator::transpose).collect();
        Ok(SystemModel { spec, ops, ops_t })
    }

    pub fn spec(&self) -> &DegradationSpec<S> {
        &self.spec
    }

    pub fn frames(&self) -> usize {
        self.ops.len()
    }

    pub fn operator(&self, i: usize) -> &SparseOperator<S> {
        &self.ops[i]
    }

    pub fn operator_t(&self, i: usize) -> &SparseOperator<S> {
        &self.ops_t[i]
    }

    /// y_i = A_i x + ε_i with ε_i ~ N(0, noise_sigma²) from a deterministic
    /// seeded generator: the same seed reproduces the frames bit-exactly.
    pub fn degrade(&self, x: &ImageGrid<S>, seed: u64) -> Result<Vec<ImageGrid<S>>> {
        if x.width() != self.spec.hr_width || x.height() != self.spec.hr_height {
            return Err(Error::contract(format!(
                "input is {}x{}, model expects {}x{}",
                x.width(),
                x.height(),
                self.spec.hr_width,
                self.spec.hr_height
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = self.spec.noise_sigma.to_f64().unwrap();
        let (lw, lh) = (self.spec.lr_width(), self.spec.lr_height());
        let mut frames = Vec::with_capacity(self.frames());
        for op in &self.ops {
            let mut y = op.spmv(x.values())?;
            if sigma > 0.0 {
                for v in &mut y {
                    // Box-Muller on the raw stream keeps the realization
                    // independent of the scalar type.
                    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                    let u2: f64 = rng.gen();
                    let n = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                    *v += cast::<S>(sigma * n);
                }
            }
            frames.push(ImageGrid::from_vec(lw, lh, y)?);
        }
        Ok(frames)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_2x(hr: usize, blur: BlurKernel<f64>, shifts: Vec<(f64, f64)>) -> DegradationSpec<f64> {
        DegradationSpec {
            scale: 2,
            blur,
            shifts,
            noise_sigma: 0.0,
            hr_width: hr,
            hr_height: hr,
        }
    }

    #[test]
    fn decimation_2x_is_quarter_weights() {
        let spec = spec_2x(4, BlurKernel::identity(), vec![(0.0, 0.0)]);
        let d = build_decimation(&spec).unwrap();
        assert_eq!(d.rows(), 4);
        assert_eq!(d.cols(), 16);
        for r in 0..4 {
            let (cols, ws) = d.row(r);
            assert_eq!(cols.len(), 4);
            for &w in ws {
                assert_eq!(w, 0.25);
            }
        }
    }

    #[test]
    fn decimation_preserves_constants() {
        let spec = spec_2x(6, BlurKernel::identity(), vec![(0.0, 0.0)]);
        let d = build_decimation(&spec).unwrap();
        let y = d.spmv(&vec![0.37; 36]).unwrap();
        for v in y {
            assert!((v - 0.37).abs() < 1e-14);
        }
    }

    #[test]
    fn decimation_3x_block_means_on_ramp() {
        let spec = DegradationSpec {
            scale: 3,
            blur: BlurKernel::identity(),
            shifts: vec![(0.0, 0.0)],
            noise_sigma: 0.0,
            hr_width: 6,
            hr_height: 6,
        };
        let d = build_decimation(&spec).unwrap();
        let ramp: Vec<f64> = (0..36).map(|i| i as f64).collect();
        let y = d.spmv(&ramp).unwrap();
        // Block mean oracle: direct average over each 3x3 block.
        let mut expected = Vec::new();
        for bu in 0..2 {
            for bv in 0..2 {
                let mut acc = 0.0;
                for dy in 0..3 {
                    for dx in 0..3 {
                        acc += ramp[(bu * 3 + dy) * 6 + bv * 3 + dx];
                    }
                }
                expected.push(acc / 9.0);
            }
        }
        for (a, b) in y.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn decimation_rejects_non_divisible() {
        let spec = spec_2x(5, BlurKernel::identity(), vec![(0.0, 0.0)]);
        assert!(build_decimation(&spec).is_err());
    }

    #[test]
    fn blur_identity_kernel_is_identity_operator() {
        let spec = spec_2x(4, BlurKernel::identity(), vec![(0.0, 0.0)]);
        let b = build_blur(&spec).unwrap();
        assert_eq!(b, SparseOperator::identity(16));
    }

    #[test]
    fn blur_preserves_constants() {
        let spec = spec_2x(6, BlurKernel::gaussian(3, 0.5).unwrap(), vec![(0.0, 0.0)]);
        let b = build_blur(&spec).unwrap();
        let y = b.spmv(&vec![0.4; 36]).unwrap();
        for v in y {
            assert!((v - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn blur_stamps_kernel_at_central_impulse() {
        let k = BlurKernel::<f64>::gaussian(3, 0.5).unwrap();
        let kv = k.values().to_vec();
        let spec = DegradationSpec {
            scale: 1,
            blur: k,
            shifts: vec![(0.0, 0.0)],
            noise_sigma: 0.0,
            hr_width: 5,
            hr_height: 5,
        };
        let b = build_blur(&spec).unwrap();
        let mut x = vec![0.0; 25];
        x[12] = 1.0; // center of the 5x5 grid
        let y = b.spmv(&x).unwrap();
        // Direct convolution oracle: kernel mirrored around the impulse.
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                let out = y[((2 + dy) * 5 + 2 + dx) as usize];
                // Symmetric kernel, so stamping equals the kernel itself.
                let expect = kv[((1 - dy) * 3 + (1 - dx)) as usize];
                assert!((out - expect).abs() < 1e-12, "at ({dy},{dx})");
            }
        }
    }

    #[test]
    fn even_kernel_rejected() {
        assert!(BlurKernel::<f64>::gaussian(4, 0.5).is_err());
        assert!(BlurKernel::from_values(2, vec![0.25; 4]).is_err());
        assert!(BlurKernel::from_values(1, vec![0.9]).is_err()); // unnormalized
    }

    #[test]
    fn motion_zero_shift_is_identity() {
        let spec = spec_2x(4, BlurKernel::identity(), vec![(0.0, 0.0)]);
        let m = build_motion(&spec, 0).unwrap();
        assert_eq!(m, SparseOperator::identity(16));
    }

    #[test]
    fn motion_half_pixel_at_2x_is_permutation() {
        let spec = spec_2x(4, BlurKernel::identity(), vec![(0.5, 0.0)]);
        let m = build_motion(&spec, 0).unwrap();
        for r in 0..m.rows() {
            let (cols, ws) = m.row(r);
            assert_eq!(cols.len(), 1);
            assert_eq!(ws[0], 1.0);
        }
        // Interior row reads its right neighbor.
        let (cols, _) = m.row(4 * 1); // row 1, col 0
        assert_eq!(cols[0], 4 + 1);
    }

    #[test]
    fn motion_quarter_pixel_has_two_half_weights() {
        let spec = spec_2x(4, BlurKernel::identity(), vec![(0.25, 0.0)]);
        let m = build_motion(&spec, 0).unwrap();
        let (cols, ws) = m.row(0);
        assert_eq!(cols.len(), 2);
        assert_eq!(ws, &[0.5, 0.5]);
        // Rows keep summing to one everywhere (replicated borders merge).
        for r in 0..m.rows() {
            assert!((m.row_sum(r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn motion_integer_shifts_compose_to_identity() {
        let spec = spec_2x(6, BlurKernel::identity(), vec![(0.5, 0.5), (-0.5, -0.5)]);
        let fwd = build_motion(&spec, 0).unwrap();
        let bwd = build_motion(&spec, 1).unwrap();
        let round = bwd.compose(&fwd).unwrap();
        // Interior rows come back to themselves (borders replicate).
        let n = 6;
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let (cols, ws) = round.row(i * n + j);
                assert_eq!(cols, &[(i * n + j) as u32]);
                assert_eq!(ws, &[1.0]);
            }
        }
    }

    #[test]
    fn system_reduces_to_decimation() {
        let spec = spec_2x(4, BlurKernel::identity(), vec![(0.0, 0.0)]);
        let model = SystemModel::build(spec.clone()).unwrap();
        assert_eq!(model.operator(0), &build_decimation(&spec).unwrap());
    }

    #[test]
    fn system_rows_sum_to_one() {
        let spec: DegradationSpec<f64> = DegradationSpec {
            scale: 2,
            blur: BlurKernel::gaussian(3, 0.5).unwrap(),
            shifts: DegradationSpec::default_shifts(2),
            noise_sigma: 0.0,
            hr_width: 12,
            hr_height: 12,
        };
        let model = SystemModel::build(spec).unwrap();
        for i in 0..model.frames() {
            let op = model.operator(i);
            for r in 0..op.rows() {
                assert!((op.row_sum(r) - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn composed_operator_matches_chained_application() {
        let spec = DegradationSpec {
            scale: 2,
            blur: BlurKernel::gaussian(3, 0.5).unwrap(),
            shifts: vec![(0.25, 0.5)],
            noise_sigma: 0.0,
            hr_width: 8,
            hr_height: 8,
        };
        let model = SystemModel::build(spec.clone()).unwrap();
        let d = build_decimation(&spec).unwrap();
        let b = build_blur(&spec).unwrap();
        let m = build_motion(&spec, 0).unwrap();
        let x: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let direct = model.operator(0).spmv(&x).unwrap();
        let chained = d.spmv(&b.spmv(&m.spmv(&x).unwrap()).unwrap()).unwrap();
        for (a, c) in direct.iter().zip(&chained) {
            assert!((a - c).abs() <= 1e-12);
        }
    }

    #[test]
    fn adjoint_holds_for_built_operators() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let spec = DegradationSpec {
            scale: 2,
            blur: BlurKernel::gaussian(3, 0.5).unwrap(),
            shifts: DegradationSpec::default_shifts(2),
            noise_sigma: 0.0,
            hr_width: 10,
            hr_height: 10,
        };
        let model = SystemModel::build(spec).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for i in 0..model.frames() {
            let a = model.operator(i);
            let x: Vec<f64> = (0..a.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..a.rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs: f64 = a.spmv(&x).unwrap().iter().zip(&y).map(|(p, q)| p * q).sum();
            let rhs: f64 = x
                .iter()
                .zip(model.operator_t(i).spmv(&y).unwrap().iter())
                .map(|(p, q)| p * q)
                .sum();
            assert!((lhs - rhs).abs() <= 1e-10 * (lhs.abs() + 1e-30));
        }
    }

    #[test]
    fn degrade_constant_without_noise_stays_constant() {
        let spec = spec_2x(8, BlurKernel::identity(), vec![(0.0, 0.0)]);
        let model = SystemModel::build(spec).unwrap();
        let x = ImageGrid::constant(8, 8, 0.55f64);
        let y = model.degrade(&x, 1).unwrap();
        assert_eq!(y.len(), 1);
        for &v in y[0].values() {
            assert!((v - 0.55).abs() < 1e-14);
        }
    }

    #[test]
    fn degrade_is_deterministic_per_seed() {
        let spec = DegradationSpec {
            scale: 2,
            blur: BlurKernel::gaussian(3, 0.5).unwrap(),
            shifts: DegradationSpec::default_shifts(2),
            noise_sigma: 1.0 / 255.0,
            hr_width: 16,
            hr_height: 16,
        };
        let model = SystemModel::build(spec).unwrap();
        let x = ImageGrid::from_vec(16, 16, (0..256).map(|i| i as f64 / 255.0).collect()).unwrap();
        let a = model.degrade(&x, 42).unwrap();
        let b = model.degrade(&x, 42).unwrap();
        assert_eq!(a, b);
        let c = model.degrade(&x, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degrade_noise_std_matches_request() {
        let spec = DegradationSpec {
            scale: 2,
            blur: BlurKernel::identity(),
            shifts: DegradationSpec::default_shifts(2),
            noise_sigma: 1.0 / 255.0,
            hr_width: 64,
            hr_height: 64,
        };
        let model = SystemModel::build(spec.clone()).unwrap();
        let x = ImageGrid::from_vec(
            64,
            64,
            (0..64 * 64).map(|i| i as f64 / (64.0 * 64.0)).collect(),
        )
        .unwrap();
        let noisy = model.degrade(&x, 7).unwrap();
        let mut clean_spec = spec;
        clean_spec.noise_sigma = 0.0;
        let clean = SystemModel::build(clean_spec).unwrap().degrade(&x, 7).unwrap();
        let mut sq = 0.0;
        let mut n = 0usize;
        for (yn, yc) in noisy.iter().zip(&clean) {
            for (&a, &b) in yn.values().iter().zip(yc.values()) {
                sq += (a - b) * (a - b);
                n += 1;
            }
        }
        let std = (sq / n as f64).sqrt();
        let target = 1.0 / 255.0;
        assert!(
            (std - target).abs() <= 0.1 * target,
            "empirical noise std {std} vs target {target}"
        );
    }
}
