//! Consensus-synchronized scaled conjugate gradient.
//!
//! Each of g workers owns one band of the latent image (plus halo rows) and
//! evaluates its share of the objective. All scalar quantities of the SCG
//! iteration — ‖p‖², the curvature probe δ, the directional derivative μ,
//! the candidate objective f_new, ‖r_new‖² and ⟨r, r_new⟩ — are computed
//! over owned entries only and summed across workers in fixed worker order,
//! so every worker takes the identical step and the distributed trajectory
//! matches a centralized run. Borders are exchanged after the two iterate
//! updates (the σ probe and the accepted candidate).
//!
//! One iteration:
//! 1. σ_c = σ₀/‖p_c‖; probe x_tmp = x + σ_c·p, exchange borders;
//! 2. δ_c = Σ_h ⟨p, (∇J(x_tmp) − ∇J(x))/σ_c⟩ + λ_scg·‖p_c‖², repaired to
//!    positive by raising λ_scg when the curvature estimate is not;
//! 3. α_c = μ_c/δ_c with μ_c = Σ_h ⟨p, r⟩; candidate x_new = x + α_c·p,
//!    exchange borders;
//! 4. comparison ratio Δ = 2δ_c(f_c − f_c_new)/μ_c² decides acceptance:
//!    accepted steps update x, r, f and the conjugate direction through
//!    β = (‖r_new‖²_c − ⟨r, r_new⟩_c)/μ_c; rejections keep x and raise
//!    λ_scg.
//!
//! Workers run sequentially or as OS threads; both modes produce identical
//! bits because reductions are ordered and stages are barrier-separated.

use std::ops::Range;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::objective::{
    gradient_from_residuals, residuals_into, value_from_residuals, EvalBuffers, ObjectiveParams,
    Patch,
};
use crate::partition::PartitionPlan;
use crate::system::SystemModel;
use crate::{cast, Scalar};

/// How worker stages are executed. Both modes are bit-identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Threaded,
}

/// SCG constants; the defaults are the conventional ones.
#[derive(Debug, Clone)]
pub struct ScgTuning<S> {
    /// Probe scale σ₀ (σ_c = σ₀/‖p_c‖).
    pub sigma0: S,
    /// Initial value of the adaptive scale parameter λ_scg.
    pub lambda_init: S,
    /// λ_scg above this aborts the run (the model is hopeless).
    pub lambda_max: S,
    /// Stop when ‖r_c‖² ≤ grad_tol · n (n = HR pixel count).
    pub grad_tol: S,
}

impl<S: Scalar> Default for ScgTuning<S> {
    fn default() -> Self {
        ScgTuning {
            sigma0: cast(1e-4),
            lambda_init: cast(1e-6),
            lambda_max: cast(1e100),
            grad_tol: cast(1e-12),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructOptions<S> {
    pub workers: usize,
    pub iterations: usize,
    pub execution: Execution,
    /// Keep the fused image after every iteration (diagnostics).
    pub record_iterates: bool,
    pub tuning: ScgTuning<S>,
}

impl<S: Scalar> Default for ReconstructOptions<S> {
    fn default() -> Self {
        ReconstructOptions {
            workers: 1,
            iterations: 20,
            execution: Execution::Threaded,
            record_iterates: false,
            tuning: ScgTuning::default(),
        }
    }
}

impl<S: Scalar> ReconstructOptions<S> {
    pub fn with_workers(workers: usize) -> Self {
        ReconstructOptions {
            workers,
            ..Default::default()
        }
    }
}

/// Why the iteration loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    IterationLimit,
    /// ‖r_c‖² fell below the tolerance.
    GradientTolerance,
    /// The conjugate direction (or its pairing with r) vanished.
    ZeroDirection,
    /// λ_scg overflowed; no further progress is possible.
    ScaleOverflow,
}

/// One per-iteration trace record, exportable as comma-separated text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<S> {
    pub iter: usize,
    pub f: S,
    pub grad_norm_sq: S,
    pub alpha: S,
    pub lambda_scg: S,
    pub accepted: bool,
}

impl<S: Scalar> IterationRecord<S> {
    pub const CSV_HEADER: &'static str = "iter,f,grad_norm_sq,alpha,lambda_scg,accepted";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.iter, self.f, self.grad_norm_sq, self.alpha, self.lambda_scg, self.accepted as u8
        )
    }
}

/// Per-worker vectors. All share the window (owned + halo) shape; the
/// consensus reductions read owned entries only.
#[derive(Debug)]
pub struct WorkerState<S> {
    pub id: usize,
    pub patch: Patch,
    /// Current iterate.
    pub x: Vec<S>,
    /// Conjugate direction.
    pub p: Vec<S>,
    /// Steepest descent direction −∇J(x).
    pub r: Vec<S>,
    /// Local objective share.
    pub f: S,
    pub x_tmp: Vec<S>,
    pub x_new: Vec<S>,
    pub r_new: Vec<S>,
    pub f_new: S,
    grad_tmp: Vec<S>,
    bufs: EvalBuffers<S>,
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

impl<S: Scalar> WorkerState<S> {
    fn new(id: usize, patch: Patch, x: Vec<S>, model: &SystemModel<S>) -> Self {
        let n = x.len();
        debug_assert_eq!(n, patch.window_len());
        WorkerState {
            id,
            bufs: EvalBuffers::new(model, &patch),
            patch,
            x,
            p: vec![S::zero(); n],
            r: vec![S::zero(); n],
            f: S::zero(),
            x_tmp: vec![S::zero(); n],
            x_new: vec![S::zero(); n],
            r_new: vec![S::zero(); n],
            f_new: S::zero(),
            grad_tmp: vec![S::zero(); n],
        }
    }

    fn owned(&self) -> Range<usize> {
        self.patch.owned_range()
    }

    /// Objective and steepest descent at the current iterate; sets r = p.
    fn initialize(
        &mut self,
        model: &SystemModel<S>,
        y: &[ImageGrid<S>],
        params: &ObjectiveParams<S>,
    ) -> S {
        residuals_into(model, &self.patch, &self.x, y, &mut self.bufs);
        self.f = value_from_residuals(&self.patch, params, &self.x, &self.bufs);
        gradient_from_residuals(
            model,
            &self.patch,
            params,
            &self.x,
            &mut self.bufs,
            &mut self.grad_tmp,
        );
        for (r, &g) in self.r.iter_mut().zip(&self.grad_tmp) {
            *r = -g;
        }
        self.p.copy_from_slice(&self.r);
        self.f
    }

    fn norm_p_sq(&self) -> S {
        let o = self.owned();
        dot(&self.p[o.clone()], &self.p[o])
    }

    fn norm_r_sq(&self) -> S {
        let o = self.owned();
        dot(&self.r[o.clone()], &self.r[o])
    }

    fn compute_probe(&mut self, sigma: S) {
        for ((t, &x), &p) in self.x_tmp.iter_mut().zip(&self.x).zip(&self.p) {
            *t = x + sigma * p;
        }
    }

    /// δ_h = ⟨p, s⟩ over owned entries, s = (∇J(x_tmp) − ∇J(x))/σ.
    fn probe_delta(
        &mut self,
        sigma: S,
        model: &SystemModel<S>,
        y: &[ImageGrid<S>],
        params: &ObjectiveParams<S>,
    ) -> S {
        residuals_into(model, &self.patch, &self.x_tmp, y, &mut self.bufs);
        gradient_from_residuals(
            model,
            &self.patch,
            params,
            &self.x_tmp,
            &mut self.bufs,
            &mut self.grad_tmp,
        );
        let o = self.owned();
        let mut acc = S::zero();
        for i in o {
            // ∇J(x) = −r, so ∇J(x_tmp) − ∇J(x) = grad_tmp + r.
            acc += self.p[i] * (self.grad_tmp[i] + self.r[i]);
        }
        acc / sigma
    }

    fn mu(&self) -> S {
        let o = self.owned();
        dot(&self.p[o.clone()], &self.r[o])
    }

    fn compute_candidate(&mut self, alpha: S) {
        for ((n, &x), &p) in self.x_new.iter_mut().zip(&self.x).zip(&self.p) {
            *n = x + alpha * p;
        }
    }

    /// f_h(x_new); the residuals stay cached for the acceptance gradient.
    fn candidate_value(
        &mut self,
        model: &SystemModel<S>,
        y: &[ImageGrid<S>],
        params: &ObjectiveParams<S>,
    ) -> S {
        residuals_into(model, &self.patch, &self.x_new, y, &mut self.bufs);
        self.f_new = value_from_residuals(&self.patch, params, &self.x_new, &self.bufs);
        self.f_new
    }

    /// r_new = −∇J(x_new) reusing the cached residuals; returns
    /// (‖r_new‖², ⟨r, r_new⟩) over owned entries.
    fn accept_gradient(
        &mut self,
        model: &SystemModel<S>,
        y: &[ImageGrid<S>],
        params: &ObjectiveParams<S>,
    ) -> (S, S) {
        let _ = y;
        gradient_from_residuals(
            model,
            &self.patch,
            params,
            &self.x_new,
            &mut self.bufs,
            &mut self.grad_tmp,
        );
        for (r, &g) in self.r_new.iter_mut().zip(&self.grad_tmp) {
            *r = -g;
        }
        let o = self.owned();
        (
            dot(&self.r_new[o.clone()], &self.r_new[o.clone()]),
            dot(&self.r[o.clone()], &self.r_new[o]),
        )
    }

    /// Accepts the candidate: updates the conjugate direction (β = None
    /// restarts at steepest descent) and promotes x_new, r_new, f_new.
    fn commit(&mut self, beta: Option<S>) {
        match beta {
            Some(b) => {
                for (p, &r) in self.p.iter_mut().zip(&self.r_new) {
                    *p = r + b * *p;
                }
            }
            None => self.p.copy_from_slice(&self.r_new),
        }
        std::mem::swap(&mut self.x, &mut self.x_new);
        std::mem::swap(&mut self.r, &mut self.r_new);
        self.f = self.f_new;
    }
}

/// The consensus scalars shared by all workers.
#[derive(Debug, Clone)]
pub struct ConsensusState<S> {
    pub f_c: S,
    pub f_c_new: S,
    pub norm_p_c: S,
    pub norm_r_c: S,
    pub norm_r_c_new: S,
    /// ⟨r_c, r_c_new⟩.
    pub dot_r_c: S,
    pub sigma_c: S,
    /// The adaptive SCG scale (distinct from the regularization weight λ).
    pub lambda_scg: S,
    pub delta_c: S,
    pub mu_c: S,
    pub alpha_c: S,
    pub iter: usize,
    pub accepted_steps: usize,
    pub success: bool,
}

impl<S: Scalar> ConsensusState<S> {
    fn new(lambda_init: S) -> Self {
        ConsensusState {
            f_c: S::zero(),
            f_c_new: S::zero(),
            norm_p_c: S::zero(),
            norm_r_c: S::zero(),
            norm_r_c_new: S::zero(),
            dot_r_c: S::zero(),
            sigma_c: S::zero(),
            lambda_scg: lambda_init,
            delta_c: S::zero(),
            mu_c: S::zero(),
            alpha_c: S::zero(),
            iter: 0,
            accepted_steps: 0,
            success: true,
        }
    }
}

/// Fixed-order consensus reduction: partials are summed by worker index,
/// so arrival order never changes the result. A non-finite partial aborts
/// with the worker id and stage.
pub fn aggregate<S: Scalar>(partials: &[S], stage: &'static str) -> Result<S> {
    let mut acc = S::zero();
    for (worker, &p) in partials.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::Numerical {
                worker,
                stage,
                detail: format!("non-finite partial {p}"),
            });
        }
        acc += p;
    }
    Ok(acc)
}

fn run_stage<'env, S, T, F>(
    workers: &'env mut [WorkerState<S>],
    execution: Execution,
    f: F,
) -> Vec<T>
where
    S: Scalar,
    T: Send,
    F: Fn(&mut WorkerState<S>) -> T + Sync,
{
    if workers.len() == 1 || execution == Execution::Sequential {
        return workers.iter_mut().map(|w| f(w)).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = workers
            .iter_mut()
            .map(|w| scope.spawn(|| f(w)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

/// The distributed solver: g workers plus the coordinator that owns the
/// consensus state and drives synchronized iterations.
pub struct Solver<'a, S: Scalar> {
    model: &'a SystemModel<S>,
    y: &'a [ImageGrid<S>],
    params: &'a ObjectiveParams<S>,
    options: ReconstructOptions<S>,
    plan: PartitionPlan,
    workers: Vec<WorkerState<S>>,
    consensus: ConsensusState<S>,
    trace: Vec<IterationRecord<S>>,
    iterates: Vec<ImageGrid<S>>,
    stop: Option<StopReason>,
    local_time: Duration,
    central_time: Duration,
}

impl<'a, S: Scalar> Solver<'a, S> {
    /// Initializes from the bilinear upsampling of the reference frame.
    pub fn new(
        model: &'a SystemModel<S>,
        y: &'a [ImageGrid<S>],
        params: &'a ObjectiveParams<S>,
        options: ReconstructOptions<S>,
    ) -> Result<Self> {
        let x0 = y
            .first()
            .ok_or_else(|| Error::contract("at least one LR frame is required"))?
            .bilinear_upsample(model.spec().scale);
        Self::with_initial(model, y, params, options, &x0)
    }

    pub fn with_initial(
        model: &'a SystemModel<S>,
        y: &'a [ImageGrid<S>],
        params: &'a ObjectiveParams<S>,
        options: ReconstructOptions<S>,
        x0: &ImageGrid<S>,
    ) -> Result<Self> {
        params.validate()?;
        check_frames(model, y)?;
        if x0.width() != model.spec().hr_width || x0.height() != model.spec().hr_height {
            return Err(Error::contract(format!(
                "initializer is {}x{}, model expects {}x{}",
                x0.width(),
                x0.height(),
                model.spec().hr_width,
                model.spec().hr_height
            )));
        }
        let plan = PartitionPlan::plan(model, params, options.workers)?;
        let windows = plan.split(x0)?;
        let mut workers: Vec<WorkerState<S>> = windows
            .into_iter()
            .enumerate()
            .map(|(h, x)| WorkerState::new(h, plan.patch(h), x, model))
            .collect();

        let mut solver = Solver {
            model,
            y,
            params,
            options,
            plan,
            workers: Vec::new(),
            consensus: ConsensusState::new(S::zero()),
            trace: Vec::new(),
            iterates: Vec::new(),
            stop: None,
            local_time: Duration::ZERO,
            central_time: Duration::ZERO,
        };
        solver.consensus = ConsensusState::new(solver.options.tuning.lambda_init);

        let exec = solver.options.execution;
        let (model_ref, y_ref, params_ref) = (solver.model, solver.y, solver.params);
        let f_partials = run_stage(&mut workers, exec, |w| w.initialize(model_ref, y_ref, params_ref));
        solver.consensus.f_c = aggregate(&f_partials, "initial objective")?;
        let r_partials: Vec<S> = workers.iter().map(|w| w.norm_r_sq()).collect();
        solver.consensus.norm_r_c = aggregate(&r_partials, "initial gradient norm")?;
        solver.workers = workers;
        Ok(solver)
    }

    pub fn consensus(&self) -> &ConsensusState<S> {
        &self.consensus
    }

    pub fn trace(&self) -> &[IterationRecord<S>] {
        &self.trace
    }

    pub fn iterates(&self) -> &[ImageGrid<S>] {
        &self.iterates
    }

    pub fn plan(&self) -> &PartitionPlan {
        &self.plan
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }

    pub fn local_time(&self) -> Duration {
        self.local_time
    }

    pub fn central_time(&self) -> Duration {
        self.central_time
    }

    /// Assembles the current iterate from owned rows.
    pub fn fuse(&self) -> Result<ImageGrid<S>> {
        let states: Vec<&[S]> = self.workers.iter().map(|w| w.x.as_slice()).collect();
        self.plan.fuse(&states)
    }

    fn grad_threshold(&self) -> S {
        self.options.tuning.grad_tol * cast::<S>(self.model.spec().hr_len() as f64)
    }

    fn exchange(&mut self, which: fn(&mut WorkerState<S>) -> &mut Vec<S>) -> Result<()> {
        let mut views: Vec<&mut [S]> = self
            .workers
            .iter_mut()
            .map(|w| which(w).as_mut_slice())
            .collect();
        self.plan.exchange_borders(&mut views)
    }

    /// One full SCG iteration. Returns false once the run has terminated.
    pub fn step(&mut self) -> Result<bool> {
        if self.stop.is_some() {
            return Ok(false);
        }
        if self.consensus.iter >= self.options.iterations {
            self.stop = Some(StopReason::IterationLimit);
            return Ok(false);
        }
        if self.consensus.norm_r_c <= self.grad_threshold() {
            self.stop = Some(StopReason::GradientTolerance);
            return Ok(false);
        }

        let exec = self.options.execution;
        let (model, y, params) = (self.model, self.y, self.params);
        let tuning = self.options.tuning.clone();

        // ‖p_c‖² and the probe scale.
        let t = Instant::now();
        let partials = run_stage(&mut self.workers, exec, |w| w.norm_p_sq());
        self.local_time += t.elapsed();
        let t = Instant::now();
        let norm_p = aggregate(&partials, "direction norm")?;
        self.consensus.norm_p_c = norm_p;
        if norm_p == S::zero() {
            self.stop = Some(StopReason::ZeroDirection);
            self.central_time += t.elapsed();
            return Ok(false);
        }
        let sigma = tuning.sigma0 / norm_p.sqrt();
        self.consensus.sigma_c = sigma;
        self.central_time += t.elapsed();

        // Curvature probe with halo exchange.
        let t = Instant::now();
        run_stage(&mut self.workers, exec, |w| w.compute_probe(sigma));
        self.local_time += t.elapsed();
        let t = Instant::now();
        self.exchange(|w| &mut w.x_tmp)?;
        self.central_time += t.elapsed();
        let t = Instant::now();
        let partials = run_stage(&mut self.workers, exec, |w| {
            w.probe_delta(sigma, model, y, params)
        });
        self.local_time += t.elapsed();

        let t = Instant::now();
        let delta_raw = aggregate(&partials, "curvature")?;
        let mut lambda = self.consensus.lambda_scg;
        let mut delta = delta_raw + lambda * norm_p;
        if delta <= S::zero() {
            // Positive-definiteness repair: raise the scale until the
            // effective curvature is positive.
            lambda = (lambda - delta / norm_p) * cast::<S>(2.0);
            delta = -delta_raw;
        }
        self.consensus.delta_c = delta;
        self.consensus.lambda_scg = lambda;
        self.central_time += t.elapsed();

        // Step size from consensus scalars.
        let t = Instant::now();
        let partials = run_stage(&mut self.workers, exec, |w| w.mu());
        self.local_time += t.elapsed();
        let t = Instant::now();
        let mu = aggregate(&partials, "directional derivative")?;
        self.consensus.mu_c = mu;
        if mu == S::zero() {
            self.stop = Some(StopReason::ZeroDirection);
            self.central_time += t.elapsed();
            return Ok(false);
        }
        let alpha = mu / delta;
        self.consensus.alpha_c = alpha;
        self.central_time += t.elapsed();

        // Candidate with halo exchange, then its objective.
        let t = Instant::now();
        run_stage(&mut self.workers, exec, |w| w.compute_candidate(alpha));
        self.local_time += t.elapsed();
        let t = Instant::now();
        self.exchange(|w| &mut w.x_new)?;
        self.central_time += t.elapsed();
        let t = Instant::now();
        let partials = run_stage(&mut self.workers, exec, |w| w.candidate_value(model, y, params));
        self.local_time += t.elapsed();
        let t = Instant::now();
        let f_new = aggregate(&partials, "candidate objective")?;
        self.consensus.f_c_new = f_new;

        // Møller's comparison ratio.
        let ratio = cast::<S>(2.0) * delta * (self.consensus.f_c - f_new) / (mu * mu);
        if !ratio.is_finite() {
            return Err(Error::Numerical {
                worker: 0,
                stage: "comparison ratio",
                detail: format!(
                    "non-finite ratio (f_c = {}, f_new = {f_new}, mu = {mu})",
                    self.consensus.f_c
                ),
            });
        }
        let accepted = ratio >= S::zero();
        self.consensus.success = accepted;
        self.central_time += t.elapsed();

        if accepted {
            let t = Instant::now();
            let partials = run_stage(&mut self.workers, exec, |w| {
                w.accept_gradient(model, y, params)
            });
            self.local_time += t.elapsed();

            let t = Instant::now();
            let norms: Vec<S> = partials.iter().map(|&(n, _)| n).collect();
            let dots: Vec<S> = partials.iter().map(|&(_, d)| d).collect();
            let norm_r_new = aggregate(&norms, "gradient norm")?;
            let dot_r = aggregate(&dots, "gradient inner product")?;
            self.consensus.norm_r_c_new = norm_r_new;
            self.consensus.dot_r_c = dot_r;
            self.consensus.accepted_steps += 1;

            // Conjugate update; restart on a stale cycle or non-positive β.
            let beta = if self.consensus.accepted_steps % self.model.spec().hr_len() == 0 {
                None
            } else {
                let b = (norm_r_new - dot_r) / mu;
                (b > S::zero()).then_some(b)
            };
            self.central_time += t.elapsed();

            let t = Instant::now();
            run_stage(&mut self.workers, exec, |w| w.commit(beta));
            self.local_time += t.elapsed();

            let t = Instant::now();
            self.consensus.f_c = f_new;
            self.consensus.norm_r_c = norm_r_new;
            if ratio >= cast(0.75) {
                self.consensus.lambda_scg = self.consensus.lambda_scg * cast(0.25);
            }
            self.central_time += t.elapsed();
        }

        let t = Instant::now();
        if ratio < cast(0.25) {
            self.consensus.lambda_scg =
                self.consensus.lambda_scg + delta * (S::one() - ratio) / norm_p;
        }
        self.consensus.iter += 1;
        self.trace.push(IterationRecord {
            iter: self.consensus.iter,
            f: self.consensus.f_c,
            grad_norm_sq: self.consensus.norm_r_c,
            alpha,
            lambda_scg: self.consensus.lambda_scg,
            accepted,
        });
        self.central_time += t.elapsed();

        if self.options.record_iterates {
            let fused = self.fuse()?;
            self.iterates.push(fused);
        }

        if !self.consensus.lambda_scg.is_finite()
            || self.consensus.lambda_scg > self.options.tuning.lambda_max
        {
            self.stop = Some(StopReason::ScaleOverflow);
            return Ok(false);
        }
        Ok(true)
    }

    /// Drives iterations until a stop condition triggers.
    pub fn run(&mut self) -> Result<StopReason> {
        while self.step()? {}
        Ok(self.stop.unwrap_or(StopReason::IterationLimit))
    }
}

fn check_frames<S: Scalar>(model: &SystemModel<S>, y: &[ImageGrid<S>]) -> Result<()> {
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

/// The result of a full reconstruction run.
#[derive(Debug, Clone)]
pub struct Reconstruction<S> {
    pub image: ImageGrid<S>,
    pub trace: Vec<IterationRecord<S>>,
    /// Fused iterate after every iteration, when requested.
    pub iterates: Vec<ImageGrid<S>>,
    pub stop: StopReason,
    pub local_time: Duration,
    pub central_time: Duration,
}

/// Reconstructs the SR image from the LR frames: initializes from the
/// bilinear upsampling of the reference frame, runs the consensus SCG and
/// fuses the owned bands.
pub fn reconstruct<S: Scalar>(
    y: &[ImageGrid<S>],
    model: &SystemModel<S>,
    params: &ObjectiveParams<S>,
    options: &ReconstructOptions<S>,
) -> Result<Reconstruction<S>> {
    let mut solver = Solver::new(model, y, params, options.clone())?;
    let stop = solver.run()?;
    Ok(Reconstruction {
        image: solver.fuse()?,
        trace: std::mem::take(&mut solver.trace),
        iterates: std::mem::take(&mut solver.iterates),
        stop,
        local_time: solver.local_time,
        central_time: solver.central_time,
    })
}
