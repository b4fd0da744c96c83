//! GA-PATS: real-coded `λ`, integer task splits, roulette selection and
//! elitism of one.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{evaluate_fitness, lambda_grid_len, Chromosome, Evaluation, OptContext, OptResult, Penalty, OMA_LAMBDA};
use crate::error::{Error, Result};
use crate::link::AccessScheme;
use crate::par::{self, Execution};
use crate::rng;

/// Open interval kept between `λ` and the bounds of `(0, 0.5)`.
const LAMBDA_MARGIN: f64 = 1e-6;
/// Standard deviation of the Gaussian `λ` mutation.
const LAMBDA_SIGMA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub iterations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// `Ϝ` of the early-stop rule.
    pub tolerance: f64,
    /// Consecutive generations within `tolerance` before stopping.
    pub stall_generations: usize,
    pub seed: u64,
    /// Snap `λ` to `{step, ..., 0.5 - step}` when set.
    pub lambda_step: Option<f64>,
    pub penalty: Penalty,
    pub exec: Execution,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 50,
            iterations: 200,
            crossover_prob: 0.8,
            mutation_prob: 0.05,
            tolerance: 1e-6,
            stall_generations: 30,
            seed: 0,
            lambda_step: None,
            penalty: Penalty::default(),
            exec: Execution::Parallel,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || !self.population.is_multiple_of(2) {
            return Err(Error::invalid("population", "must be even and >= 2"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be >= 1"));
        }
        for (f, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(f, "must lie in [0, 1]"));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be > 0"));
        }
        if let Some(s) = self.lambda_step {
            if !(s > 0.0 && s < 0.5) {
                return Err(Error::invalid("lambda_step", "must lie in (0, 0.5)"));
            }
        }
        Ok(())
    }
}

/// One generation of the optimiser trace.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GenerationTrace {
    pub generation: usize,
    pub best_d_beta: f64,
    pub mean_fitness: f64,
}

struct Genome<'a> {
    cfg: &'a GaConfig,
    scheme: AccessScheme,
    m: usize,
}

impl Genome<'_> {
    fn fix_lambda(&self, x: f64) -> f64 {
        if self.scheme == AccessScheme::Oma {
            return OMA_LAMBDA;
        }
        match self.cfg.lambda_step {
            Some(step) => {
                let n = lambda_grid_len(step);
                ((x / step).round().clamp(1.0, n as f64)) * step
            }
            None => x.clamp(LAMBDA_MARGIN, 0.5 - LAMBDA_MARGIN),
        }
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Chromosome {
        Chromosome {
            lambda: self.fix_lambda(rng.random_range(0.0..0.5)),
            m_alpha: rng.random_range(0..=self.m),
            m_beta: rng.random_range(0..=self.m),
        }
    }

    fn space_size(&self) -> Option<usize> {
        let lambdas = match (self.scheme, self.cfg.lambda_step) {
            (AccessScheme::Oma, _) => 1,
            (_, Some(step)) => lambda_grid_len(step),
            (_, None) => return None,
        };
        Some(lambdas * (self.m + 1) * (self.m + 1))
    }
}

/// Picks an index with probability proportional to `weights`; uniform when
/// every weight is zero.
fn roulette(weights: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    if !(total > 0.0) || !total.is_finite() {
        return rng.random_range(0..weights.len());
    }
    let mut r = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        r -= w;
        if r < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

pub fn ga_pats(ctx: &OptContext, cfg: &GaConfig) -> Result<OptResult> {
    ga_pats_traced(ctx, cfg).map(|(r, _)| r)
}

/// [`ga_pats`] together with the per-generation trace.
pub fn ga_pats_traced(ctx: &OptContext, cfg: &GaConfig) -> Result<(OptResult, Vec<GenerationTrace>)> {
    cfg.validate()?;
    let genome = Genome { cfg, scheme: ctx.scheme, m: ctx.m_tasks() };
    let s = cfg.population;
    let stream = |gen: usize, op: u64, i: usize| rng::stream_path(cfg.seed, &[gen as u64, op, i as u64]);

    let mut pop: Vec<Chromosome> = (0..s).map(|i| genome.random(&mut stream(0, 0, i))).collect();
    // Elite by penalised fitness, and best feasible point seen so far.
    let mut elite: Option<(Chromosome, Evaluation)> = None;
    let mut best: Option<(Chromosome, Evaluation)> = None;
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut evaluations = 0;
    let mut prev_d: Option<f64> = None;
    let mut stall = 0;

    for gen in 0..cfg.iterations {
        let evals: Vec<Evaluation> = par::map_indexed(cfg.exec, s, |i| evaluate_fitness(&pop[i], ctx, &cfg.penalty))
            .into_iter()
            .collect::<Result<_>>()?;
        evaluations += s;
        for (c, e) in pop.iter().zip(&evals) {
            debug_assert!(c.m_alpha <= genome.m && c.m_beta <= genome.m);
            debug_assert!(c.lambda > 0.0 && c.lambda <= 0.5);
            if elite.as_ref().is_none_or(|(_, b)| e.fitness > b.fitness) {
                elite = Some((*c, *e));
            }
            if e.feasible && best.as_ref().is_none_or(|(_, b)| e.fitness > b.fitness) {
                best = Some((*c, *e));
            }
        }
        let (elite_ch, elite_eval) = elite.expect("population is non-empty");
        history.push(elite_eval.fitness);
        let d_now = best.map_or(f64::INFINITY, |(_, b)| b.d_beta);
        trace.push(GenerationTrace {
            generation: gen,
            best_d_beta: d_now,
            mean_fitness: par::pairwise_sum(&evals.iter().map(|e| e.fitness).collect::<Vec<_>>()) / s as f64,
        });
        if genome.space_size() == Some(1) {
            break;
        }
        if let Some(p) = prev_d {
            if (d_now - p).abs() <= cfg.tolerance {
                stall += 1;
            } else {
                stall = 0;
            }
        }
        prev_d = Some(d_now);
        if stall >= cfg.stall_generations || gen + 1 == cfg.iterations {
            break;
        }

        // Selection.
        let weights: Vec<f64> = evals.iter().map(|e| e.fitness).collect();
        let total = par::pairwise_sum(&weights);
        let mut sel_rng = stream(gen, 1, 0);
        let mut next: Vec<Chromosome> = (0..s).map(|_| pop[roulette(&weights, total, &mut sel_rng)]).collect();

        // Crossover of adjacent pairs.
        for k in 0..s / 2 {
            let mut r = stream(gen, 2, k);
            if r.random::<f64>() >= cfg.crossover_prob {
                continue;
            }
            let (a, b) = (next[2 * k], next[2 * k + 1]);
            let w: f64 = r.random();
            let mut ca = a;
            let mut cb = b;
            ca.lambda = genome.fix_lambda(w * a.lambda + (1.0 - w) * b.lambda);
            cb.lambda = genome.fix_lambda((1.0 - w) * a.lambda + w * b.lambda);
            // Integer genes [m_α, m_β]: swap from the cut point on.
            if r.random_range(0..2) == 0 {
                std::mem::swap(&mut ca.m_alpha, &mut cb.m_alpha);
            }
            std::mem::swap(&mut ca.m_beta, &mut cb.m_beta);
            next[2 * k] = ca;
            next[2 * k + 1] = cb;
        }

        // Mutation.
        let normal = Normal::new(0.0, LAMBDA_SIGMA).expect("valid sigma");
        for (i, c) in next.iter_mut().enumerate() {
            let mut r = stream(gen, 3, i);
            if r.random::<f64>() < cfg.mutation_prob {
                c.lambda = genome.fix_lambda(c.lambda + normal.sample(&mut r));
            }
            if r.random::<f64>() < cfg.mutation_prob {
                c.m_alpha = r.random_range(0..=genome.m);
            }
            if r.random::<f64>() < cfg.mutation_prob {
                c.m_beta = r.random_range(0..=genome.m);
            }
        }

        next[0] = elite_ch;
        pop = next;
    }

    let (best, eval) = best.or(elite).expect("population is non-empty");
    Ok((
        OptResult {
            best,
            eval,
            feasible: eval.feasible,
            history,
            evaluations,
        },
        trace,
    ))
}

pub fn write_trace_csv(path: &std::path::Path, trace: &[GenerationTrace]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for t in trace {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}
