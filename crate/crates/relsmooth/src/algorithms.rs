//! The four optimization methods, each emitting a per-iteration trace.
//!
//! Every method is an instance of the generic update
//! `x_{t+1} = argmin_{x ∈ Q_t} ⟨g_t, x⟩ + L_t D_h(x, x_t)`:
//! relGD uses the full gradient with constant `L`; relRCDs restricts the
//! search to a random coordinate subset with the same `L`; relRCD replaces
//! `L` with per-coordinate ESO stepsizes `vᵢ`; relSGD keeps `Q_t = Q` but
//! feeds an unbiased gradient estimator with a stepsize schedule `L_t`.

use std::time::Instant;

use rand::Rng;

use crate::bregman::{bregman, mirror_step, weighted_bregman, StepSizes};
use crate::error::{Error, Result};
use crate::problems::{stochastic_grad, EsoCertificate, Objective, Problem};
use crate::sampling::Sampling;
use crate::theory;

/// Number of fresh gradient draws relSGD attempts when a noisy step exits the
/// domain, before the run aborts.
const SGD_DOMAIN_RETRIES: usize = 10;

/// Rule producing the stepsize controlling parameter `L_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeSchedule {
    Constant(f64),
    /// `L_t = L0 + alpha·t`.
    Linear {
        l0: f64,
        alpha: f64,
    },
    /// `L_t = coeff·√t` for `t ≥ 1` and `coeff` at `t = 0`.
    SqrtGrowth {
        coeff: f64,
    },
    /// The fixed-horizon optimal constant stepsize; `value` is precomputed.
    FixedHorizonOptimal {
        value: f64,
    },
}

impl StepsizeSchedule {
    pub fn constant(l: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidParams("constant stepsize must be > 0".into()));
        }
        Ok(StepsizeSchedule::Constant(l))
    }

    pub fn linear(l0: f64, alpha: f64) -> Result<Self> {
        if !(l0 > 0.0) || alpha < 0.0 {
            return Err(Error::InvalidParams(
                "linear schedule needs l0 > 0 and alpha >= 0".into(),
            ));
        }
        Ok(StepsizeSchedule::Linear { l0, alpha })
    }

    pub fn sqrt_growth(coeff: f64) -> Result<Self> {
        if !(coeff > 0.0) {
            return Err(Error::InvalidParams(
                "sqrt schedule coefficient must be > 0".into(),
            ));
        }
        Ok(StepsizeSchedule::SqrtGrowth { coeff })
    }

    /// Constant stepsize minimizing the two-term relSGD bound over a fixed
    /// horizon of `k` iterations; `sigma2 = 0` degenerates to `Constant(L)`.
    pub fn fixed_horizon_optimal(sigma2: f64, l: f64, d0: f64, k: usize) -> Result<Self> {
        if sigma2 == 0.0 {
            return Self::constant(l);
        }
        let value = theory::optimal_constant_stepsize(sigma2, l, d0, k)?;
        Ok(StepsizeSchedule::FixedHorizonOptimal { value })
    }

    pub fn at(&self, t: usize) -> f64 {
        match self {
            StepsizeSchedule::Constant(l) => *l,
            StepsizeSchedule::Linear { l0, alpha } => l0 + alpha * t as f64,
            StepsizeSchedule::SqrtGrowth { coeff } => {
                if t == 0 {
                    *coeff
                } else {
                    coeff * (t as f64).sqrt()
                }
            }
            StepsizeSchedule::FixedHorizonOptimal { value } => *value,
        }
    }
}

/// Scalar part of one trace entry.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub iter: usize,
    /// Work done so far, in full-gradient equivalents.
    pub epoch: f64,
    pub objective: f64,
    /// Stepsize parameter applied to reach this iterate (0 at `t = 0`).
    pub stepsize: f64,
    /// `D_h(x*, x_t)` when the problem knows its optimum.
    pub breg_to_opt: Option<f64>,
    /// `D_h(x_t, x_{(t+1,*)})_v` when requested via [`RunOptions`].
    pub breg_step_ref: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AbortReason {
    /// A noisy step left the domain and every retry failed.
    StepOutOfDomain { iter: usize, retries: usize },
}

/// Per-iteration record of a run, plus optionally thinned iterate snapshots.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub algorithm: String,
    pub records: Vec<RunRecord>,
    /// `(t, x_t)` snapshots: always `t = 0` and the final iterate, plus every
    /// `iterate_stride`-th iterate when requested.
    pub iterates: Vec<(usize, Vec<f64>)>,
    pub final_point: Vec<f64>,
    /// Optimal value used for gap reporting, copied from the problem or set
    /// to a reference value by the caller.
    pub f_star: Option<f64>,
    /// Seed provenance, filled by replicate runners.
    pub seed: Option<u64>,
    pub wall_clock_secs: f64,
    pub abort: Option<AbortReason>,
    /// Set when the requested stepsize parameter lies below the certificate.
    pub small_stepsize_warning: bool,
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.objective)
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().expect("trace has records").objective
    }

    pub fn set_reference_optimum(&mut self, f_star: f64) {
        self.f_star = Some(f_star);
    }

    /// Objective value at the record closest to the given epoch count.
    pub fn objective_at_epoch(&self, epoch: f64) -> f64 {
        let rec = self
            .records
            .iter()
            .min_by(|a, b| (a.epoch - epoch).abs().total_cmp(&(b.epoch - epoch).abs()))
            .expect("trace has records");
        rec.objective
    }
}

/// Optional trace instrumentation.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Store `x_t` every this many iterations (`0` keeps endpoints only).
    pub iterate_stride: usize,
    /// Compute `D_h(x_t, x_{(t+1,*)})_v` every this many iterations
    /// (`0` never); costs one full-gradient mirror step per evaluation.
    pub step_ref_stride: usize,
    /// Early stop once the step-reference distance falls below this value;
    /// checked only on iterations where it is computed.
    pub early_stop_tol: Option<f64>,
}

struct TraceBuilder<'a> {
    problem: &'a Problem,
    options: &'a RunOptions,
    trace: RunTrace,
    started: Instant,
}

impl<'a> TraceBuilder<'a> {
    fn new(
        problem: &'a Problem,
        algorithm: &str,
        x0: &[f64],
        options: &'a RunOptions,
        k: usize,
    ) -> Result<Self> {
        problem.h.check_domain(x0)?;
        let f0 = problem.eval(x0)?;
        let mut trace = RunTrace {
            algorithm: algorithm.to_string(),
            records: Vec::with_capacity(k + 1),
            iterates: vec![(0, x0.to_vec())],
            final_point: x0.to_vec(),
            f_star: problem.optimum_value,
            seed: None,
            wall_clock_secs: 0.0,
            abort: None,
            small_stepsize_warning: false,
        };
        trace.records.push(RunRecord {
            iter: 0,
            epoch: 0.0,
            objective: f0,
            stepsize: 0.0,
            breg_to_opt: breg_to_opt(problem, x0)?,
            breg_step_ref: None,
        });
        Ok(Self {
            problem,
            options,
            trace,
            started: Instant::now(),
        })
    }

    fn push(
        &mut self,
        iter: usize,
        epoch: f64,
        x: &[f64],
        stepsize: f64,
        breg_step_ref: Option<f64>,
    ) -> Result<()> {
        self.trace.records.push(RunRecord {
            iter,
            epoch,
            objective: self.problem.eval(x)?,
            stepsize,
            breg_to_opt: breg_to_opt(self.problem, x)?,
            breg_step_ref,
        });
        if self.options.iterate_stride > 0 && iter.is_multiple_of(self.options.iterate_stride) {
            self.trace.iterates.push((iter, x.to_vec()));
        }
        Ok(())
    }

    fn finish(mut self, x: Vec<f64>) -> RunTrace {
        let last_iter = self.trace.records.last().map(|r| r.iter).unwrap_or(0);
        if self.trace.iterates.last().map(|(t, _)| *t) != Some(last_iter) {
            self.trace.iterates.push((last_iter, x.clone()));
        }
        self.trace.final_point = x;
        self.trace.wall_clock_secs = self.started.elapsed().as_secs_f64();
        self.trace
    }
}

fn breg_to_opt(p: &Problem, x: &[f64]) -> Result<Option<f64>> {
    match &p.optimum_point {
        Some(star) => Ok(Some(bregman(&p.h, star, x)?)),
        None => Ok(None),
    }
}

/// Work per oracle row: full finite sums count one epoch per `m` row draws.
fn oracle_rows(p: &Problem) -> usize {
    match &p.objective {
        Objective::PoissonKl { a, .. } => a.rows(),
        _ => 1,
    }
}

/// Relative gradient descent: `x_{t+1} = argmin ⟨∇f(x_t), x⟩ + L D_h(x, x_t)`.
pub fn relgd(p: &Problem, x0: &[f64], l: f64, k: usize) -> Result<RunTrace> {
    relgd_with(p, x0, l, k, &RunOptions::default())
}

pub fn relgd_with(
    p: &Problem,
    x0: &[f64],
    l: f64,
    k: usize,
    options: &RunOptions,
) -> Result<RunTrace> {
    let mut builder = TraceBuilder::new(p, "relgd", x0, options, k)?;
    builder.trace.small_stepsize_warning = l < p.smoothness;
    let mut x = x0.to_vec();
    for t in 0..k {
        let g = p.grad(&x)?;
        let next = mirror_step(&p.h, &p.feasible_set, &x, &g, StepSizes::Uniform(l), None)?;
        x = next.point;
        builder.push(t + 1, (t + 1) as f64, &x, l, None)?;
    }
    Ok(builder.finish(x))
}

/// Relative randomized coordinate descent with short stepsizes: each
/// iteration draws a tau-nice subset and moves only those coordinates, with
/// the global constant `L`.
pub fn relrcds<R: Rng + ?Sized>(
    p: &Problem,
    x0: &[f64],
    l: f64,
    tau: usize,
    k: usize,
    rng: &mut R,
) -> Result<RunTrace> {
    relrcds_with(p, x0, l, tau, k, rng, &RunOptions::default())
}

pub fn relrcds_with<R: Rng + ?Sized>(
    p: &Problem,
    x0: &[f64],
    l: f64,
    tau: usize,
    k: usize,
    rng: &mut R,
    options: &RunOptions,
) -> Result<RunTrace> {
    let n = p.dim();
    let sampling = Sampling::tau_nice(n, tau)?;
    let mut builder = TraceBuilder::new(p, "relrcds", x0, options, k)?;
    builder.trace.small_stepsize_warning = l < p.smoothness;
    let epoch_per_iter = tau as f64 / n as f64;
    let mut x = x0.to_vec();
    for t in 0..k {
        let coords = sampling.draw(rng);
        let g = p.partial_grad(&x, &coords)?;
        let next = mirror_step(
            &p.h,
            &p.feasible_set,
            &x,
            &g,
            StepSizes::Uniform(l),
            Some(&coords),
        )?;
        x = next.point;
        builder.push(t + 1, (t + 1) as f64 * epoch_per_iter, &x, l, None)?;
    }
    Ok(builder.finish(x))
}

/// Relative randomized coordinate descent with ESO stepsizes: drawn
/// coordinates move with their per-coordinate parameters `vᵢ`.
pub fn relrcd<R: Rng + ?Sized>(
    p: &Problem,
    x0: &[f64],
    cert: &EsoCertificate,
    k: usize,
    rng: &mut R,
) -> Result<RunTrace> {
    relrcd_with(p, x0, cert, k, rng, &RunOptions::default())
}

pub fn relrcd_with<R: Rng + ?Sized>(
    p: &Problem,
    x0: &[f64],
    cert: &EsoCertificate,
    k: usize,
    rng: &mut R,
    options: &RunOptions,
) -> Result<RunTrace> {
    let n = p.dim();
    if cert.sampling.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cert.sampling.dim(),
        });
    }
    let mut builder = TraceBuilder::new(p, "relrcd", x0, options, k)?;
    let v_max = cert.v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let epoch_per_iter = cert.sampling.tau() as f64 / n as f64;
    let mut x = x0.to_vec();
    for t in 0..k {
        let coords = cert.sampling.draw(rng);
        let g = p.partial_grad(&x, &coords)?;
        let next = mirror_step(
            &p.h,
            &p.feasible_set,
            &x,
            &g,
            StepSizes::PerCoord(&cert.v),
            Some(&coords),
        )?;
        x = next.point;

        let step_ref = if options.step_ref_stride > 0 && (t + 1) % options.step_ref_stride == 0 {
            Some(step_reference_distance(p, &x, &cert.v)?)
        } else {
            None
        };
        builder.push(t + 1, (t + 1) as f64 * epoch_per_iter, &x, v_max, step_ref)?;
        if let (Some(tol), Some(d)) = (options.early_stop_tol, step_ref) {
            if d < tol {
                break;
            }
        }
    }
    Ok(builder.finish(x))
}

/// `D_h(x, x_{(+,*)})_v` where `x_{(+,*)}` is the full (all-coordinate)
/// mirror step from `x`; a geometry-adapted gradient-norm surrogate.
fn step_reference_distance(p: &Problem, x: &[f64], v: &[f64]) -> Result<f64> {
    let g = p.grad(x)?;
    let full = mirror_step(&p.h, &p.feasible_set, x, &g, StepSizes::PerCoord(v), None)?;
    weighted_bregman(&p.h, x, &full.point, v)
}

/// Relative stochastic gradient descent with minibatch size `tau`.
///
/// When a noisy step would leave the domain the gradient is resampled up to
/// ten times; if every retry fails the run aborts and the abort is recorded
/// on the trace rather than returned as an error, so replicate batches can
/// report partial results.
pub fn relsgd<R: Rng + ?Sized>(
    p: &Problem,
    x0: &[f64],
    schedule: &StepsizeSchedule,
    tau: usize,
    k: usize,
    rng: &mut R,
) -> Result<RunTrace> {
    relsgd_with(p, x0, schedule, tau, k, rng, &RunOptions::default())
}

pub fn relsgd_with<R: Rng + ?Sized>(
    p: &Problem,
    x0: &[f64],
    schedule: &StepsizeSchedule,
    tau: usize,
    k: usize,
    rng: &mut R,
    options: &RunOptions,
) -> Result<RunTrace> {
    if !p.has_stochastic_oracle() {
        return Err(Error::OracleUnavailable);
    }
    if tau == 0 {
        return Err(Error::InvalidParams("minibatch tau must be >= 1".into()));
    }
    let mut builder = TraceBuilder::new(p, "relsgd", x0, options, k)?;
    builder.trace.small_stepsize_warning = schedule.at(0) < p.smoothness;
    let epoch_per_iter = tau as f64 / oracle_rows(p) as f64;
    let mut x = x0.to_vec();
    for t in 0..k {
        let lt = schedule.at(t);
        let mut accepted = None;
        let mut retries = 0;
        loop {
            let g = stochastic_grad(p, &x, tau, rng)?;
            match mirror_step(&p.h, &p.feasible_set, &x, &g, StepSizes::Uniform(lt), None) {
                Ok(step) => {
                    accepted = Some(step.point);
                    break;
                }
                Err(Error::StepOutOfDomain { .. }) => {
                    if retries >= SGD_DOMAIN_RETRIES {
                        break;
                    }
                    retries += 1;
                }
                Err(e) => return Err(e),
            }
        }
        match accepted {
            Some(next) => {
                x = next;
                builder.push(t + 1, (t + 1) as f64 * epoch_per_iter, &x, lt, None)?;
            }
            None => {
                builder.trace.abort = Some(AbortReason::StepOutOfDomain {
                    iter: t,
                    retries: SGD_DOMAIN_RETRIES,
                });
                break;
            }
        }
    }
    Ok(builder.finish(x))
}

/// Weighted suboptimality `Σ_t c_t (f(x_t) − f*)` over the trace's recorded
/// objective values (`t = 1..k`); a single-run surrogate for the theorems'
/// expectations.
pub fn weighted_output(trace: &RunTrace, weights: &[f64]) -> Result<f64> {
    let k = trace.iterations();
    if weights.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParams("weights must be positive".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "weights must sum to 1, got {total}"
        )));
    }
    let f_star = trace.f_star.ok_or(Error::MissingOptimum)?;
    Ok(trace
        .records
        .iter()
        .skip(1)
        .zip(weights)
        .map(|(r, c)| c * (r.objective - f_star))
        .sum())
}
