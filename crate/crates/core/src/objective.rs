//! The MAP objective and its gradient.
//!
//! ```text
//! J(x) = Σ_i ||A_i x − y_i||_p^p + λ Σ_{d≠0} α^(dx+dy) ||x − S_d x||_1
//! ```
//!
//! with p ∈ {1, 2} and the bilateral total variation window
//! d = (dx, dy) ∈ [0, w−1]². Absolute values are smoothed as
//! √(t² + ε²) − ε so the objective stays differentiable for the conjugate
//! gradient solver.
//!
//! Evaluation is defined on a [`Patch`]: a band of owned rows plus halo
//! rows imported from the neighbors. Every LR residual is attributed to the
//! worker owning its anchor row and every prior term to the worker owning
//! its base pixel, so the per-worker values of any partition sum to the
//! centralized objective term for term. Gradients are exact on owned rows;
//! halo entries may lack out-of-window contributions and are refreshed by
//! the border exchange after every update.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::system::SystemModel;
use crate::{cast, Scalar};

/// Data fidelity norm p ∈ {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataNorm {
    L1,
    L2,
}

impl DataNorm {
    pub fn from_p(p: usize) -> Result<Self> {
        match p {
            1 => Ok(DataNorm::L1),
            2 => Ok(DataNorm::L2),
            _ => Err(Error::config(format!("norm p must be 1 or 2, got {p}"))),
        }
    }

    pub fn p(&self) -> usize {
        match self {
            DataNorm::L1 => 1,
            DataNorm::L2 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveParams<S> {
    pub norm: DataNorm,
    /// Regularization weight λ > 0.
    pub lambda: S,
    /// Spatial decay α ∈ (0, 1) of the BTV window.
    pub btv_alpha: S,
    /// BTV window size w ≥ 1 (shifts range over [0, w−1]).
    pub btv_window: usize,
    /// Smoothing constant of the differentiable |·| approximation.
    pub l1_epsilon: S,
}

impl<S: Scalar> ObjectiveParams<S> {
    pub fn new(norm: DataNorm) -> Self {
        ObjectiveParams {
            norm,
            lambda: cast(0.05),
            btv_alpha: cast(0.4),
            btv_window: 3,
            l1_epsilon: cast(1e-3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > S::zero()) || !self.lambda.is_finite() {
            return Err(Error::config("lambda must be positive"));
        }
        if !(self.btv_alpha > S::zero() && self.btv_alpha < S::one()) {
            return Err(Error::config("btv alpha must lie in (0, 1)"));
        }
        if self.btv_window < 1 {
            return Err(Error::config("btv window must be >= 1"));
        }
        if !(self.l1_epsilon > S::zero()) {
            return Err(Error::config("l1 epsilon must be positive"));
        }
        Ok(())
    }
}

/// Geometry of one worker's view: a window of HR rows (owned + halo) inside
/// the full image. A single patch covering the whole image is the
/// centralized (g = 1) case.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub hr_width: usize,
    pub hr_height: usize,
    pub scale: usize,
    /// HR rows visible to the worker.
    pub window: Range<usize>,
    /// HR rows owned by the worker (⊆ window).
    pub owned: Range<usize>,
}

fn div_ceil(a: usize, b: usize) -> usize {
    (a + b - 1) / b
}

impl Patch {
    pub fn full<S: Scalar>(model: &SystemModel<S>) -> Patch {
        let spec = model.spec();
        Patch {
            hr_width: spec.hr_width,
            hr_height: spec.hr_height,
            scale: spec.scale,
            window: 0..spec.hr_height,
            owned: 0..spec.hr_height,
        }
    }

    pub fn lr_width(&self) -> usize {
        self.hr_width / self.scale
    }

    pub fn window_len(&self) -> usize {
        self.window.len() * self.hr_width
    }

    /// Owned entries inside the window vector (contiguous).
    pub fn owned_range(&self) -> Range<usize> {
        let start = (self.owned.start - self.window.start) * self.hr_width;
        start..start + self.owned.len() * self.hr_width
    }

    /// Global vector indices covered by the window.
    pub fn window_cols(&self) -> Range<usize> {
        self.window.start * self.hr_width..self.window.end * self.hr_width
    }

    /// LR rows whose anchor (scale·row) lies inside the window.
    pub fn frame_rows(&self) -> Range<usize> {
        div_ceil(self.window.start, self.scale)..div_ceil(self.window.end, self.scale)
    }

    /// LR rows anchored in the owned band; each LR row has exactly one
    /// owner, so residual sums tile the image exactly.
    pub fn owned_frame_rows(&self) -> Range<usize> {
        div_ceil(self.owned.start, self.scale)..div_ceil(self.owned.end, self.scale)
    }

    fn check(&self) -> Result<()> {
        if self.owned.start < self.window.start
            || self.owned.end > self.window.end
            || self.window.end > self.hr_height
            || self.owned.is_empty()
        {
            return Err(Error::contract("patch owned rows must lie inside the window"));
        }
        Ok(())
    }
}

#[inline]
fn smooth_abs<S: Scalar>(t: S, eps: S) -> S {
    (t * t + eps * eps).sqrt() - eps
}

#[inline]
fn smooth_abs_deriv<S: Scalar>(t: S, eps: S) -> S {
    t / (t * t + eps * eps).sqrt()
}

#[inline]
fn rho<S: Scalar>(norm: DataNorm, t: S, eps: S) -> S {
    match norm {
        DataNorm::L2 => t * t,
        DataNorm::L1 => smooth_abs(t, eps),
    }
}

#[inline]
fn rho_deriv<S: Scalar>(norm: DataNorm, t: S, eps: S) -> S {
    match norm {
        DataNorm::L2 => t + t,
        DataNorm::L1 => smooth_abs_deriv(t, eps),
    }
}

/// Per-frame residual scratch for one patch.
#[derive(Debug, Clone)]
pub(crate) struct EvalBuffers<S> {
    pub residuals: Vec<Vec<S>>,
}

impl<S: Scalar> EvalBuffers<S> {
    pub fn new(model: &SystemModel<S>, patch: &Patch) -> Self {
        let rows = patch.frame_rows().len() * patch.lr_width();
        EvalBuffers {
            residuals: (0..model.frames()).map(|_| vec![S::zero(); rows]).collect(),
        }
    }
}

/// residuals_i = A_i x − y_i over the window-anchored LR rows.
pub(crate) fn residuals_into<S: Scalar>(
    model: &SystemModel<S>,
    patch: &Patch,
    x: &[S],
    y: &[ImageGrid<S>],
    bufs: &mut EvalBuffers<S>,
) {
    let lr_w = patch.lr_width();
    let rows = patch.frame_rows();
    let vec_rows = rows.start * lr_w..rows.end * lr_w;
    for (i, res) in bufs.residuals.iter_mut().enumerate() {
        let view = model.operator(i).window(vec_rows.clone(), patch.window_cols());
        view.apply_sub_into(x, &y[i].values()[vec_rows.clone()], res);
    }
}

/// Data value over owned-anchored rows plus λ times the BTV value over
/// owned pixels.
pub(crate) fn value_from_residuals<S: Scalar>(
    patch: &Patch,
    params: &ObjectiveParams<S>,
    x: &[S],
    bufs: &EvalBuffers<S>,
) -> S {
    let lr_w = patch.lr_width();
    let frame_rows = patch.frame_rows();
    let owned_rows = patch.owned_frame_rows();
    let lo = (owned_rows.start - frame_rows.start) * lr_w;
    let hi = lo + owned_rows.len() * lr_w;
    let eps = params.l1_epsilon;
    let mut value = S::zero();
    for res in &bufs.residuals {
        for &t in &res[lo..hi] {
            value += rho(params.norm, t, eps);
        }
    }
    value + params.lambda * btv_value_owned(patch, x, params)
}

/// Full gradient of J over the window: Σ_i A_iᵀ ρ′(residual) + λ ∇BTV.
/// Consumes the residual buffers (they are mapped to ρ′ in place).
pub(crate) fn gradient_from_residuals<S: Scalar>(
    model: &SystemModel<S>,
    patch: &Patch,
    params: &ObjectiveParams<S>,
    x: &[S],
    bufs: &mut EvalBuffers<S>,
    grad: &mut [S],
) {
    debug_assert_eq!(grad.len(), patch.window_len());
    grad.fill(S::zero());
    let lr_w = patch.lr_width();
    let rows = patch.frame_rows();
    let vec_rows = rows.start * lr_w..rows.end * lr_w;
    let eps = params.l1_epsilon;
    for (i, res) in bufs.residuals.iter_mut().enumerate() {
        for t in res.iter_mut() {
            *t = rho_deriv(params.norm, *t, eps);
        }
        let view = model
            .operator_t(i)
            .window(patch.window_cols(), vec_rows.clone());
        view.apply_accumulate(res, grad);
    }
    btv_gradient_accumulate(patch, x, params, params.lambda, grad);
}

/// BTV value over owned pixels. Differences whose shifted source would fall
/// outside the image are dropped.
pub(crate) fn btv_value_owned<S: Scalar>(patch: &Patch, x: &[S], params: &ObjectiveParams<S>) -> S {
    let w = patch.hr_width;
    let eps = params.l1_epsilon;
    let win = params.btv_window;
    let mut value = S::zero();
    let local_owned =
        (patch.owned.start - patch.window.start)..(patch.owned.end - patch.window.start);
    for dy in 0..win {
        for dx in 0..win {
            if dx == 0 && dy == 0 {
                continue;
            }
            let gamma = params.btv_alpha.powi((dx + dy) as i32);
            let mut s = S::zero();
            for li in local_owned.clone() {
                // li < dy reads above the window; for the top worker
                // (ws == 0) that is exactly the image border, where the
                // shifted difference is dropped.
                if li < dy {
                    continue;
                }
                let p_row = &x[li * w..(li + 1) * w];
                let q_row = &x[(li - dy) * w..(li - dy + 1) * w];
                for j in dx..w {
                    s += smooth_abs(p_row[j] - q_row[j - dx], eps);
                }
            }
            value += gamma * s;
        }
    }
    value
}

/// Accumulates weight·∇BTV over the whole window. Pairs whose source row
/// is above the window are skipped; that only affects the top halo rows,
/// which the border exchange overwrites.
pub(crate) fn btv_gradient_accumulate<S: Scalar>(
    patch: &Patch,
    x: &[S],
    params: &ObjectiveParams<S>,
    weight: S,
    grad: &mut [S],
) {
    let w = patch.hr_width;
    let wh = patch.window.len();
    let eps = params.l1_epsilon;
    let win = params.btv_window;
    for dy in 0..win {
        for dx in 0..win {
            if dx == 0 && dy == 0 {
                continue;
            }
            let gw = weight * params.btv_alpha.powi((dx + dy) as i32);
            for li in dy..wh {
                let p_row = &x[li * w..(li + 1) * w];
                let q_row = &x[(li - dy) * w..(li - dy + 1) * w];
                if dy == 0 {
                    // Same row: base and source alias.
                    let row_grad = &mut grad[li * w..(li + 1) * w];
                    for j in dx..w {
                        let g = gw * smooth_abs_deriv(p_row[j] - q_row[j - dx], eps);
                        row_grad[j] += g;
                        row_grad[j - dx] -= g;
                    }
                } else {
                    let (q_part, p_part) = grad.split_at_mut(li * w);
                    let p_grad = &mut p_part[..w];
                    let q_grad = &mut q_part[(li - dy) * w..(li - dy + 1) * w];
                    for j in dx..w {
                        let g = gw * smooth_abs_deriv(p_row[j] - q_row[j - dx], eps);
                        p_grad[j] += g;
                        q_grad[j - dx] -= g;
                    }
                }
            }
        }
    }
}

fn check_inputs<S: Scalar>(
    model: &SystemModel<S>,
    patch: &Patch,
    x: &[S],
    y: &[ImageGrid<S>],
    params: &ObjectiveParams<S>,
) -> Result<()> {
    params.validate()?;
    patch.check()?;
    if patch.hr_width != model.spec().hr_width
        || patch.hr_height != model.spec().hr_height
        || patch.scale != model.spec().scale
    {
        return Err(Error::contract("patch geometry does not match the model"));
    }
    if x.len() != patch.window_len() {
        return Err(Error::contract(format!(
            "partition vector has {} entries, window needs {}",
            x.len(),
            patch.window_len()
        )));
    }
    if y.len() != model.frames() {
        return Err(Error::contract(format!(
            "{} frames supplied, model has {}",
            y.len(),
            model.frames()
        )));
    }
    for (i, frame) in y.iter().enumerate() {
        if frame.width() != model.spec().lr_width() || frame.height() != model.spec().lr_height() {
            return Err(Error::contract(format!(
                "frame {i} is {}x{}, expected {}x{}",
                frame.width(),
                frame.height(),
                model.spec().lr_width(),
                model.spec().lr_height()
            )));
        }
    }
    Ok(())
}

/// Data fidelity term Σ_i Σ ρ(A_i x − y_i) over the patch and its gradient
/// over the window (owned + halo).
pub fn data_term<S: Scalar>(
    model: &SystemModel<S>,
    patch: &Patch,
    x: &[S],
    y: &[ImageGrid<S>],
    params: &ObjectiveParams<S>,
) -> Result<(S, Vec<S>)> {
    check_inputs(model, patch, x, y, params)?;
    let mut bufs = EvalBuffers::new(model, patch);
    residuals_into(model, patch, x, y, &mut bufs);

    let lr_w = patch.lr_width();
    let frame_rows = patch.frame_rows();
    let owned_rows = patch.owned_frame_rows();
    let lo = (owned_rows.start - frame_rows.start) * lr_w;
    let hi = lo + owned_rows.len() * lr_w;
    let eps = params.l1_epsilon;
    let mut value = S::zero();
    for res in &bufs.residuals {
        for &t in &res[lo..hi] {
            value += rho(params.norm, t, eps);
        }
    }

    let mut grad = vec![S::zero(); patch.window_len()];
    let vec_rows = frame_rows.start * lr_w..frame_rows.end * lr_w;
    for (i, res) in bufs.residuals.iter_mut().enumerate() {
        for t in res.iter_mut() {
            *t = rho_deriv(params.norm, *t, eps);
        }
        model
            .operator_t(i)
            .window(patch.window_cols(), vec_rows.clone())
            .apply_accumulate(res, &mut grad);
    }
    Ok((value, grad))
}

/// BTV prior value over owned pixels and its (unweighted) gradient over the
/// window.
pub fn btv_term<S: Scalar>(
    patch: &Patch,
    x: &[S],
    params: &ObjectiveParams<S>,
) -> Result<(S, Vec<S>)> {
    params.validate()?;
    patch.check()?;
    if x.len() != patch.window_len() {
        return Err(Error::contract(format!(
            "partition vector has {} entries, window needs {}",
            x.len(),
            patch.window_len()
        )));
    }
    let value = btv_value_owned(patch, x, params);
    let mut grad = vec![S::zero(); patch.window_len()];
    btv_gradient_accumulate(patch, x, params, S::one(), &mut grad);
    Ok((value, grad))
}

/// Full objective f = data + λ·BTV over owned pixels, and the steepest
/// descent direction r = −∇J restricted to owned pixels.
pub fn objective_eval<S: Scalar>(
    model: &SystemModel<S>,
    patch: &Patch,
    x: &[S],
    y: &[ImageGrid<S>],
    params: &ObjectiveParams<S>,
) -> Result<(S, Vec<S>)> {
    check_inputs(model, patch, x, y, params)?;
    let mut bufs = EvalBuffers::new(model, patch);
    residuals_into(model, patch, x, y, &mut bufs);
    let f = value_from_residuals(patch, params, x, &bufs);
    let mut grad = vec![S::zero(); patch.window_len()];
    gradient_from_residuals(model, patch, params, x, &mut bufs, &mut grad);
    let r = grad[patch.owned_range()].iter().map(|&g| -g).collect();
    Ok((f, r))
}
