//! Edge-vehicle delay minimisation over `(λ, m_α, m_β)`.
//!
//! One [`OptContext`] fixes a pair geometry and one channel realisation. The
//! delay constraints use that realisation's secure rates; the secrecy
//! constraint uses the analytic outage probabilities, which depend on `λ`
//! only and are memoised per `λ`.

pub mod ga;

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::beamforming::AnMode;
use crate::channel::{ChannelDraw, LinkGeometry};
use crate::error::Result;
use crate::link::{delays, link_report, AccessScheme, DelayReport, LinkConstants, LinkGains, OffloadPlan, TaskModel};
use crate::params::SystemParams;
use crate::secrecy::{analytic_report, sop_alpha_closed, sop_beta_lower_bound, SopInputs};

pub use ga::{ga_pats, GaConfig};

/// `λ` reported for OMA, where the split is fixed by the slot model.
pub const OMA_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chromosome {
    pub lambda: f64,
    pub m_alpha: usize,
    pub m_beta: usize,
}

impl Chromosome {
    pub fn plan(&self) -> OffloadPlan {
        OffloadPlan {
            lambda: self.lambda,
            m_alpha: self.m_alpha,
            m_beta: self.m_beta,
        }
    }
}

/// Penalty weights. `mu = None` means `10 D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    pub mu: Option<f64>,
    pub eps0: f64,
}

impl Default for Penalty {
    fn default() -> Self {
        Self { mu: None, eps0: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub d_beta: f64,
    pub d_alpha: f64,
    pub penalty: f64,
    pub fitness: f64,
    pub feasible: bool,
    pub sop_alpha: f64,
    pub sop_beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub best: Chromosome,
    pub eval: Evaluation,
    pub feasible: bool,
    /// Best-ever fitness after each generation (one entry for grid search).
    pub history: Vec<f64>,
    pub evaluations: usize,
}

impl OptResult {
    pub fn d_beta(&self) -> f64 {
        self.eval.d_beta
    }

    pub fn d_alpha(&self) -> f64 {
        self.eval.d_alpha
    }
}

/// Everything the objective needs for one pair and one realisation.
#[derive(Debug)]
pub struct OptContext {
    pub gains: LinkGains,
    pub sop: SopInputs,
    pub scheme: AccessScheme,
    pub consts: LinkConstants,
    pub tasks: TaskModel,
    pub max_delay: f64,
    pub sop_tolerance: f64,
    sop_cache: Mutex<HashMap<u64, (f64, f64)>>,
}

impl Clone for OptContext {
    fn clone(&self) -> Self {
        Self {
            sop_cache: Mutex::new(self.sop_cache.lock().expect("cache poisoned").clone()),
            ..*self
        }
    }
}

impl OptContext {
    pub fn new(
        params: &SystemParams,
        geometry: LinkGeometry,
        gains: LinkGains,
        scheme: AccessScheme,
        an_mode: AnMode,
    ) -> Self {
        Self {
            gains,
            sop: SopInputs::new(params, geometry, 0.25, scheme, an_mode),
            scheme,
            consts: LinkConstants::new(params),
            tasks: TaskModel::new(params),
            max_delay: params.max_delay_s,
            sop_tolerance: params.sop_tolerance,
            sop_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_draw(
        params: &SystemParams,
        geometry: LinkGeometry,
        draw: &ChannelDraw,
        scheme: AccessScheme,
        an_mode: AnMode,
    ) -> Self {
        let gains = LinkGains::from_draw(draw, &geometry, &LinkConstants::new(params), an_mode);
        Self::new(params, geometry, gains, scheme, an_mode)
    }

    pub fn m_tasks(&self) -> usize {
        self.tasks.m_tasks
    }

    /// `(P_sop,α, P_sop,β)` at `λ`; OMA ignores `λ`.
    pub fn sops(&self, lambda: f64) -> Result<(f64, f64)> {
        let key = match self.scheme {
            AccessScheme::Noma => lambda.to_bits(),
            AccessScheme::Oma => 0,
        };
        if let Some(v) = self.sop_cache.lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let r = analytic_report(&self.sop.with_lambda(lambda))?;
        let v = (r.p_sop_alpha, r.p_sop_beta);
        self.sop_cache.lock().expect("cache poisoned").insert(key, v);
        Ok(v)
    }

    /// `P_sop,α` and a lower bound on `P_sop,β`; exact when memoised.
    pub fn sop_floor(&self, lambda: f64) -> Result<(f64, f64)> {
        let key = match self.scheme {
            AccessScheme::Noma => lambda.to_bits(),
            AccessScheme::Oma => 0,
        };
        if let Some(v) = self.sop_cache.lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let inp = self.sop.with_lambda(lambda);
        Ok((sop_alpha_closed(&inp)?.value, sop_beta_lower_bound(&inp)))
    }

    /// Distinct `λ` values whose outage probabilities have been computed.
    pub fn sop_evaluations(&self) -> usize {
        self.sop_cache.lock().expect("cache poisoned").len()
    }

    pub fn delays(&self, ch: &Chromosome) -> DelayReport {
        let report = link_report(&self.gains, ch.lambda, self.scheme, &self.consts);
        delays(&ch.plan(), &report, &self.tasks)
    }

    /// Normalised violation of C3 to C6 (zero when all hold).
    fn delay_violation(&self, d: &DelayReport) -> f64 {
        let cap = self.max_delay;
        [
            d.d_local_alpha,
            d.d_local_beta,
            d.d_mec_alpha,
            d.d_mec_beta_alpha,
            d.d_mec_beta_b,
        ]
        .iter()
        .map(|&x| ((x - cap) / cap).max(0.0))
        .sum()
    }

    fn sop_violation(&self, p_alpha: f64, p_beta: f64) -> f64 {
        let z = self.sop_tolerance;
        ((p_alpha - z) / z).max(0.0) + ((p_beta - z) / z).max(0.0)
    }
}

/// Penalised fitness `1 / (D_β + penalty + ε₀)`.
pub fn evaluate_fitness(ch: &Chromosome, ctx: &OptContext, pen: &Penalty) -> Result<Evaluation> {
    let d = ctx.delays(ch);
    let (pa, pb) = ctx.sops(ch.lambda)?;
    Ok(score(ctx, &d, pa, pb, pen))
}

fn score(ctx: &OptContext, d: &DelayReport, pa: f64, pb: f64, pen: &Penalty) -> Evaluation {
    let violation = ctx.delay_violation(d) + ctx.sop_violation(pa, pb);
    let mu = pen.mu.unwrap_or(10.0 * ctx.max_delay);
    let penalty = mu * violation;
    Evaluation {
        d_beta: d.d_beta,
        d_alpha: d.d_alpha,
        penalty,
        fitness: 1.0 / (d.d_beta + penalty + pen.eps0),
        feasible: violation == 0.0,
        sop_alpha: pa,
        sop_beta: pb,
    }
}

/// `{step, 2 step, ..., 0.5 - step}`.
pub fn lambda_grid(step: f64) -> Vec<f64> {
    let n = lambda_grid_len(step);
    (1..=n).map(|k| k as f64 * step).collect()
}

pub(crate) fn lambda_grid_len(step: f64) -> usize {
    ((0.5 / step).round() as usize).saturating_sub(1).max(1)
}

fn lambdas_for(ctx: &OptContext, step: f64) -> Vec<f64> {
    match ctx.scheme {
        AccessScheme::Noma => lambda_grid(step),
        AccessScheme::Oma => vec![OMA_LAMBDA],
    }
}

/// Grid argmin of `D_β` subject to C3 to C7. Ties go to smaller `D_α`,
/// then larger `λ`, then smaller `m_β`, then smaller `m_α`. The secrecy constraint is checked
/// lazily in order of increasing delay. With no feasible point the result
/// is flagged infeasible and holds the same argmin without C7, or, when the
/// delay constraints cannot be met either, the point of least delay plus
/// delay penalty.
pub fn exhaustive_search(ctx: &OptContext, step: f64, pen: &Penalty) -> Result<OptResult> {
    if !(step > 0.0 && step < 0.5) {
        return Err(crate::Error::invalid("lambda_step", format!("must lie in (0, 0.5), got {step}")));
    }
    let m = ctx.m_tasks();
    let cap = ctx.max_delay;
    let lambdas = lambdas_for(ctx, step);
    // (d_beta, d_alpha, λ index, m_β, m_α) for the best delay-feasible
    // point per λ. D_α depends on m_α only and D_β on m_β only.
    let mut cands: Vec<(f64, f64, usize, usize, usize)> = Vec::new();
    let mut evaluations = 0;
    for (li, &lambda) in lambdas.iter().enumerate() {
        let report = link_report(&ctx.gains, lambda, ctx.scheme, &ctx.consts);
        let mut alpha: Option<(f64, usize)> = None;
        for ma in 0..=m {
            let d = delays(&OffloadPlan { lambda, m_alpha: ma, m_beta: 0 }, &report, &ctx.tasks);
            evaluations += 1;
            let ok = d.d_local_alpha <= cap && d.d_mec_alpha <= cap;
            if ok && alpha.is_none_or(|(bd, _)| d.d_alpha < bd) {
                alpha = Some((d.d_alpha, ma));
            }
        }
        let Some((d_alpha, m_alpha)) = alpha else { continue };
        let mut best: Option<(f64, usize)> = None;
        for mb in 0..=m {
            let d = delays(&OffloadPlan { lambda, m_alpha, m_beta: mb }, &report, &ctx.tasks);
            evaluations += 1;
            let ok = d.d_local_beta <= cap && d.d_mec_beta_alpha <= cap && d.d_mec_beta_b <= cap;
            if ok && best.is_none_or(|(bd, _)| d.d_beta < bd) {
                best = Some((d.d_beta, mb));
            }
        }
        if let Some((db, mb)) = best {
            cands.push((db, d_alpha, li, mb, m_alpha));
        }
    }
    cands.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(b.2.cmp(&a.2))
            .then(a.3.cmp(&b.3))
    });
    for &(_, _, li, mb, ma) in &cands {
        let (pa, pb_floor) = ctx.sop_floor(lambdas[li])?;
        if ctx.sop_violation(pa, pb_floor) > 0.0 {
            continue;
        }
        let (pa, pb) = ctx.sops(lambdas[li])?;
        if ctx.sop_violation(pa, pb) == 0.0 {
            let best = Chromosome { lambda: lambdas[li], m_alpha: ma, m_beta: mb };
            let eval = evaluate_fitness(&best, ctx, pen)?;
            debug_assert!(eval.feasible);
            return Ok(OptResult { best, eval, feasible: true, history: vec![eval.fitness], evaluations });
        }
    }
    // No feasible point: report the delay-optimal point, ignoring C7 when
    // C3 to C6 can be met and minimising the delay penalty otherwise.
    let best = match cands.first() {
        Some(&(_, _, li, mb, ma)) => Chromosome { lambda: lambdas[li], m_alpha: ma, m_beta: mb },
        None => {
            let mut best: Option<(Chromosome, f64)> = None;
            for &lambda in &lambdas {
                let report = link_report(&ctx.gains, lambda, ctx.scheme, &ctx.consts);
                for mb in 0..=m {
                    for ma in 0..=m {
                        let ch = Chromosome { lambda, m_alpha: ma, m_beta: mb };
                        let f = score(ctx, &delays(&ch.plan(), &report, &ctx.tasks), 0.0, 0.0, pen).fitness;
                        evaluations += 1;
                        if best.is_none_or(|(_, bf)| f > bf) {
                            best = Some((ch, f));
                        }
                    }
                }
            }
            best.expect("grid is non-empty").0
        }
    };
    let eval = evaluate_fitness(&best, ctx, pen)?;
    Ok(OptResult { best, eval, feasible: false, history: vec![eval.fitness], evaluations })
}

/// Exhaustive search under the orthogonal-slot model, over `m_α, m_β` only.
pub fn oma_baseline(ctx: &OptContext, pen: &Penalty) -> Result<OptResult> {
    let mut oma = ctx.clone();
    if oma.scheme != AccessScheme::Oma {
        oma.scheme = AccessScheme::Oma;
        oma.sop.scheme = AccessScheme::Oma;
        oma.sop_cache = Mutex::new(HashMap::new());
    }
    exhaustive_search(&oma, 0.25, pen)
}
