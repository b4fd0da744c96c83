//! Monte Carlo estimates of secrecy outage and delay.
//!
//! Trial `t` draws its channels from `rng::stream(seed, t)`, and partial sums
//! are formed over fixed blocks of [`BLOCK`] trials and combined by pairwise
//! summation. Estimates therefore depend only on `(seed, trials)`; neither
//! the execution backend nor `batch_size` changes a single bit.

use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::beamforming::AnMode;
use crate::channel::{complex_gaussian, sample_channels, ChannelDraw, LinkGeometry};
use crate::error::{Error, Result};
use crate::link::{delays, link_report, AccessScheme, LinkConstants, LinkGains, LinkReport, OffloadPlan, TaskModel};
use crate::par::{self, Execution};
use crate::params::{LinkLabel, SystemParams};
use crate::rng;

/// Reduction block, in trials.
pub const BLOCK: usize = 1024;
/// Row cap of the per-trial trace.
pub const TRACE_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    pub an_mode: AnMode,
    /// Trials per work item, rounded up to a whole number of blocks.
    pub batch_size: usize,
    pub exec: Execution,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            an_mode: AnMode::Model,
            batch_size: 16 * BLOCK,
            exec: Execution::Parallel,
        }
    }
}

impl McConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self { trials, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials_used)`.
    pub std_error: f64,
    pub trials_used: usize,
}

impl McEstimate {
    /// From a count, sum and sum of squares. `n = 0` gives a NaN mean.
    pub fn from_moments(n: usize, sum: f64, sum_sq: f64) -> Self {
        if n == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, trials_used: 0 };
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self { mean, std_error: (var / nf).sqrt(), trials_used: n }
    }

    fn from_count(n: usize, hits: u64) -> Self {
        Self::from_moments(n, hits as f64, hits as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSop {
    pub alpha: McEstimate,
    pub beta: McEstimate,
    /// Joint event: outage of `α` or of `β` in the same trial.
    pub sops: McEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McDelay {
    /// Over trials with finite `D_β`.
    pub d_beta: McEstimate,
    /// Over trials with finite `D_α`.
    pub d_alpha: McEstimate,
    pub infeasible_beta: f64,
    pub infeasible_alpha: f64,
}

/// Channel draw of trial `trial`. Model mode and `Off` draw only the scalar
/// links and `h_be`; the relay and self-interference vectors are left empty.
pub fn trial_draw(params: &SystemParams, mode: AnMode, seed: u64, trial: u64) -> ChannelDraw {
    let mut rng = rng::stream(seed, trial);
    match mode {
        AnMode::Geometric => sample_channels(params, &mut rng),
        AnMode::Model | AnMode::Off => sample_scalar_channels(params, &mut rng),
    }
}

fn sample_scalar_channels<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ChannelDraw {
    let var = |l| params.variance(l);
    let h_beta_alpha = complex_gaussian(rng, var(LinkLabel::BetaAlpha));
    let h_alpha_b = complex_gaussian(rng, var(LinkLabel::AlphaB));
    let h_beta_e = complex_gaussian(rng, var(LinkLabel::BetaE));
    let h_alpha_e = complex_gaussian(rng, var(LinkLabel::AlphaE));
    let h_alpha_alpha = complex_gaussian(rng, var(LinkLabel::AlphaAlpha));
    let h_b_e = (0..params.bs_antennas - 1)
        .map(|_| complex_gaussian(rng, var(LinkLabel::Be)))
        .collect();
    ChannelDraw {
        h_beta_alpha,
        h_alpha_b,
        h_beta_e,
        h_alpha_e,
        h_alpha_alpha,
        h_b_alpha: Vec::new(),
        h_b_e,
        h_bb: Vec::new(),
    }
}

/// Link report of trial `trial`.
pub fn trial_report(
    geometry: &LinkGeometry,
    lambda: f64,
    scheme: AccessScheme,
    params: &SystemParams,
    mc: &McConfig,
    trial: u64,
) -> LinkReport {
    let consts = LinkConstants::new(params);
    let draw = trial_draw(params, mc.an_mode, mc.seed, trial);
    let gains = LinkGains::from_draw(&draw, geometry, &consts, mc.an_mode);
    link_report(&gains, lambda, scheme, &consts)
}

/// Runs `per_trial` on every trial and folds each block into an accumulator.
fn run_blocks<A, F>(mc: &McConfig, per_trial: F) -> Vec<A>
where
    A: Default + Send,
    F: Fn(u64, &mut A) + Sync + Send,
{
    let blocks = mc.trials.div_ceil(BLOCK);
    let per_item = mc.batch_size.div_ceil(BLOCK).max(1);
    let items = blocks.div_ceil(per_item);
    let nested = par::map_indexed(mc.exec, items, |item| {
        let first = item * per_item;
        let last = ((item + 1) * per_item).min(blocks);
        (first..last)
            .map(|b| {
                let mut acc = A::default();
                let lo = b * BLOCK;
                let hi = ((b + 1) * BLOCK).min(mc.trials);
                for t in lo..hi {
                    per_trial(t as u64, &mut acc);
                }
                acc
            })
            .collect::<Vec<A>>()
    });
    nested.into_iter().flatten().collect()
}

#[derive(Default)]
struct SopCounts {
    alpha: u64,
    beta: u64,
    joint: u64,
}

#[derive(Default)]
struct DelaySums {
    n_beta: usize,
    sum_beta: f64,
    sq_beta: f64,
    n_alpha: usize,
    sum_alpha: f64,
    sq_alpha: f64,
}

/// Outage indicators `(C_α < R_s, C_β < R_s)` of one report.
pub fn outage_events(report: &LinkReport, rs: f64) -> (bool, bool) {
    (report.c_alpha < rs, report.c_beta < rs)
}

pub fn mc_sop(
    geometry: &LinkGeometry,
    lambda: f64,
    scheme: AccessScheme,
    params: &SystemParams,
    mc: &McConfig,
) -> Result<McSop> {
    mc.validate()?;
    let rs = params.secrecy_rate_target;
    let blocks = run_blocks(mc, |t, acc: &mut SopCounts| {
        let r = trial_report(geometry, lambda, scheme, params, mc, t);
        let (a, b) = outage_events(&r, rs);
        acc.alpha += a as u64;
        acc.beta += b as u64;
        acc.joint += (a || b) as u64;
    });
    let (mut a, mut b, mut j) = (0u64, 0u64, 0u64);
    for c in &blocks {
        a += c.alpha;
        b += c.beta;
        j += c.joint;
    }
    let n = mc.trials;
    Ok(McSop {
        alpha: McEstimate::from_count(n, a),
        beta: McEstimate::from_count(n, b),
        sops: McEstimate::from_count(n, j),
    })
}

pub fn mc_delay(
    geometry: &LinkGeometry,
    plan: &OffloadPlan,
    scheme: AccessScheme,
    params: &SystemParams,
    mc: &McConfig,
) -> Result<McDelay> {
    mc.validate()?;
    let tasks = TaskModel::new(params);
    let blocks = run_blocks(mc, |t, acc: &mut DelaySums| {
        let r = trial_report(geometry, plan.lambda, scheme, params, mc, t);
        let d = delays(plan, &r, &tasks);
        if d.d_beta.is_finite() {
            acc.n_beta += 1;
            acc.sum_beta += d.d_beta;
            acc.sq_beta += d.d_beta * d.d_beta;
        }
        if d.d_alpha.is_finite() {
            acc.n_alpha += 1;
            acc.sum_alpha += d.d_alpha;
            acc.sq_alpha += d.d_alpha * d.d_alpha;
        }
    });
    let col = |f: fn(&DelaySums) -> f64| par::pairwise_sum(&blocks.iter().map(f).collect::<Vec<_>>());
    let n_beta: usize = blocks.iter().map(|b| b.n_beta).sum();
    let n_alpha: usize = blocks.iter().map(|b| b.n_alpha).sum();
    let n = mc.trials as f64;
    Ok(McDelay {
        d_beta: McEstimate::from_moments(n_beta, col(|b| b.sum_beta), col(|b| b.sq_beta)),
        d_alpha: McEstimate::from_moments(n_alpha, col(|b| b.sum_alpha), col(|b| b.sq_alpha)),
        infeasible_beta: (mc.trials - n_beta) as f64 / n,
        infeasible_alpha: (mc.trials - n_alpha) as f64 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub trial: u64,
    pub r_alpha_b: f64,
    pub r_alpha_e: f64,
    pub r_beta_alpha: f64,
    pub r_beta_b: f64,
    pub r_beta_e: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub outage_alpha: bool,
    pub outage_beta: bool,
}

/// Per-trial rows for the first `min(trials, TRACE_CAP)` trials.
pub fn mc_trace(
    geometry: &LinkGeometry,
    lambda: f64,
    scheme: AccessScheme,
    params: &SystemParams,
    mc: &McConfig,
) -> Vec<TraceRow> {
    let rs = params.secrecy_rate_target;
    (0..mc.trials.min(TRACE_CAP) as u64)
        .map(|t| {
            let r = trial_report(geometry, lambda, scheme, params, mc, t);
            let (oa, ob) = outage_events(&r, rs);
            TraceRow {
                trial: t,
                r_alpha_b: r.sinr.r_alpha_b,
                r_alpha_e: r.sinr.r_alpha_e,
                r_beta_alpha: r.sinr.r_beta_alpha,
                r_beta_b: r.sinr.r_beta_b,
                r_beta_e: r.sinr.r_beta_e,
                c_alpha: r.c_alpha,
                c_beta: r.c_beta,
                outage_alpha: oa,
                outage_beta: ob,
            }
        })
        .collect()
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows.iter().take(TRACE_CAP) {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
