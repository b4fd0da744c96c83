//! Replicated parameter sweeps.
//!
//! Replication `r` draws its scenario from `split_path(seed, [r, 0])`, the
//! random pairing from `[r, 1]` and the channels of pair `(c, e)` from
//! `[r, 2, c, e]`, so every scheme and every sweep value sees the same
//! vehicles and, for a shared pair, the same channels. Each replication
//! contributes the mean of its pairs; rows report the mean and standard
//! error over replications.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{Pairing, Scheme, Solver};
use crate::channel::{draw_channels, LinkGeometry};
use crate::error::{Error, Result};
use crate::link::link_report;
use crate::optimizer::{exhaustive_search, ga_pats, GaConfig, OptResult};
use crate::par::{self, Execution};
use crate::params::SystemParams;
use crate::rng;
use crate::scenario::{assign_groups, generate_scenario, pair_gpm, pair_rpm, Scenario};
use crate::secrecy::sops;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVar {
    PBetaDbm,
    /// Road distance between the paired vehicles; the edge vehicle is
    /// placed this far beyond its relay.
    DAlphaBetaM,
    Rs,
    Zeta,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::PBetaDbm => "p_beta_dbm",
            SweepVar::DAlphaBetaM => "d_alpha_beta_m",
            SweepVar::Rs => "rs",
            SweepVar::Zeta => "zeta",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "p_beta" | "p_beta_dbm" => Ok(SweepVar::PBetaDbm),
            "d_alpha_beta" | "d_alpha_beta_m" => Ok(SweepVar::DAlphaBetaM),
            "rs" => Ok(SweepVar::Rs),
            "zeta" => Ok(SweepVar::Zeta),
            _ => Err(Error::InvalidArgument(format!("unknown sweep variable `{s}`"))),
        }
    }

    fn apply(self, params: &SystemParams, value: f64) -> SystemParams {
        let mut p = params.clone();
        match self {
            SweepVar::PBetaDbm => p.p_edge_dbm = value,
            SweepVar::Rs => p.secrecy_rate_target = value,
            SweepVar::Zeta => p.sop_tolerance = value,
            SweepVar::DAlphaBetaM => {}
        }
        p
    }
}

pub const METRICS: [&str; 8] = [
    "sops",
    "sop_alpha",
    "sop_beta",
    "d_beta",
    "d_alpha",
    "lambda_star",
    "offloaded_tasks",
    "rate_beta",
];
/// Metrics averaged over feasible pairs only; the others use every pair.
const FEASIBLE_ONLY: [bool; 8] = [false, false, false, true, true, true, true, true];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub replications: usize,
    /// Index of the first replication; lets a run be split across calls.
    pub rep_start: usize,
    pub seed: u64,
    pub lambda_step: f64,
    /// GA settings for `-ga` schemes; `λ` is snapped to `lambda_step` and
    /// the seed is derived per pair.
    pub ga: GaConfig,
    pub exec: Execution,
}

impl SweepSpec {
    pub fn new(variable: SweepVar, values: Vec<f64>, schemes: Vec<Scheme>, replications: usize, seed: u64) -> Self {
        Self {
            variable,
            values,
            schemes,
            replications,
            rep_start: 0,
            seed,
            lambda_step: 0.005,
            ga: GaConfig::default(),
            exec: Execution::Parallel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "sweep needs at least one value"));
        }
        if self.schemes.is_empty() {
            return Err(Error::invalid("schemes", "sweep needs at least one scheme"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be >= 1"));
        }
        if !(self.lambda_step > 0.0 && self.lambda_step < 0.5) {
            return Err(Error::invalid("lambda_step", "must lie in (0, 0.5)"));
        }
        self.ga.validate()
    }
}

/// Mean, standard error and sample count of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Stat {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Stat { mean: f64::NAN, se: f64::NAN, n };
        }
        let nf = n as f64;
        let mean = par::pairwise_sum(xs) / nf;
        let se = if n > 1 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (par::pairwise_sum(&dev) / (nf - 1.0) / nf).sqrt()
        } else {
            0.0
        };
        Stat { mean, se, n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: String,
    pub variable: &'static str,
    pub value: f64,
    pub replications: usize,
    pub pairs: usize,
    pub infeasible_fraction: f64,
    /// In the order of [`METRICS`].
    pub metrics: Vec<Stat>,
}

impl SweepRow {
    pub fn metric(&self, name: &str) -> Option<Stat> {
        METRICS.iter().position(|m| *m == name).map(|i| self.metrics[i])
    }
}

/// Per-pair outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub center: usize,
    pub edge: usize,
    pub feasible: bool,
    pub values: [f64; 8],
}

/// Optimises one pair under `scheme` and collects its metrics.
pub fn evaluate_pair(
    params: &SystemParams,
    scheme: &Scheme,
    geometry: LinkGeometry,
    channel_seed: u64,
    lambda_step: f64,
    ga: &GaConfig,
) -> Result<(OptResult, [f64; 8])> {
    let draw = draw_channels(params, channel_seed);
    let ctx = scheme.context(params, geometry, &draw);
    let pen = ga.penalty;
    let res = match scheme.solver {
        Solver::Eg => exhaustive_search(&ctx, lambda_step, &pen)?,
        Solver::Ga => {
            let cfg = GaConfig { seed: rng::split(channel_seed, 3), lambda_step: Some(lambda_step), ..*ga };
            ga_pats(&ctx, &cfg)?
        }
    };
    let report = link_report(&ctx.gains, res.best.lambda, scheme.access, &ctx.consts);
    let e = res.eval;
    let values = [
        sops(e.sop_alpha, e.sop_beta),
        e.sop_alpha,
        e.sop_beta,
        e.d_beta,
        e.d_alpha,
        res.best.lambda,
        (params.m_tasks - res.best.m_beta) as f64,
        report.rate_beta(),
    ];
    Ok((res, values))
}

fn pair_geometry(
    var: SweepVar,
    value: f64,
    scenario: &Scenario,
    center: usize,
    edge: usize,
    params: &SystemParams,
) -> LinkGeometry {
    let la = scenario.vehicle(center).expect("paired id exists").horiz_dist_m;
    let mut lb = scenario.vehicle(edge).expect("paired id exists").horiz_dist_m;
    if var == SweepVar::DAlphaBetaM {
        lb = la + value * lb.signum();
    }
    LinkGeometry::from_positions(la, lb, scenario.eavesdropper.horiz_dist_m, params)
}

/// All pairs of replication `rep` for one scheme and sweep value.
pub fn run_cell(spec: &SweepSpec, params: &SystemParams, scheme: &Scheme, value: f64, rep: usize) -> Result<Vec<PairOutcome>> {
    let p = spec.variable.apply(params, value);
    let r = rep as u64;
    let scenario = generate_scenario(&p, rng::split_path(spec.seed, &[r, 0]));
    let groups = assign_groups(&scenario.vehicles, &p);
    let pairing = match scheme.pairing {
        Pairing::Gpm => pair_gpm(&groups, &scenario.vehicles),
        Pairing::Rpm => pair_rpm(&groups, &scenario.vehicles, rng::split_path(spec.seed, &[r, 1])),
    };
    pairing
        .pairs
        .iter()
        .map(|&(c, e)| {
            let geo = pair_geometry(spec.variable, value, &scenario, c, e, &p);
            let ch_seed = rng::split_path(spec.seed, &[r, 2, c as u64, e as u64]);
            let (res, values) = evaluate_pair(&p, scheme, geo, ch_seed, spec.lambda_step, &spec.ga)?;
            Ok(PairOutcome { center: c, edge: e, feasible: res.feasible, values })
        })
        .collect()
}

pub fn run_sweep(spec: &SweepSpec, params: &SystemParams) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    params.validate()?;
    let (ns, nv, nr) = (spec.schemes.len(), spec.values.len(), spec.replications);
    let cells = par::map_indexed(spec.exec, ns * nv * nr, |i| {
        let (si, rest) = (i / (nv * nr), i % (nv * nr));
        let (vi, ri) = (rest / nr, rest % nr);
        run_cell(spec, params, &spec.schemes[si], spec.values[vi], spec.rep_start + ri)
    });
    let mut cells = cells.into_iter();
    let mut rows = Vec::with_capacity(ns * nv);
    for scheme in &spec.schemes {
        for &value in &spec.values {
            let mut per_metric: Vec<Vec<f64>> = vec![Vec::new(); METRICS.len()];
            let (mut pairs, mut infeasible) = (0usize, 0usize);
            for _ in 0..nr {
                let outcomes = cells.next().expect("one cell per replication")?;
                pairs += outcomes.len();
                infeasible += outcomes.iter().filter(|o| !o.feasible).count();
                for (k, col) in per_metric.iter_mut().enumerate() {
                    let xs: Vec<f64> = outcomes
                        .iter()
                        .filter(|o| o.feasible || !FEASIBLE_ONLY[k])
                        .map(|o| o.values[k])
                        .collect();
                    if !xs.is_empty() {
                        col.push(par::pairwise_sum(&xs) / xs.len() as f64);
                    }
                }
            }
            rows.push(SweepRow {
                scheme: scheme.to_string(),
                variable: spec.variable.name(),
                value,
                replications: nr,
                pairs,
                infeasible_fraction: if pairs == 0 { 0.0 } else { infeasible as f64 / pairs as f64 },
                metrics: per_metric.iter().map(|c| Stat::of(c)).collect(),
            });
        }
    }
    Ok(rows)
}

/// Metadata lines, each prefixed with `# `.
pub fn metadata_header(spec: &SweepSpec, params: &SystemParams) -> String {
    let mut h = String::new();
    h.push_str(&format!("# {} {}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
    h.push_str(&format!("# seed = {}\n", spec.seed));
    h.push_str(&format!("# variable = {}\n", spec.variable.name()));
    h.push_str(&format!("# replications = {} from {}\n", spec.replications, spec.rep_start));
    h.push_str(&format!("# lambda_step = {}\n", spec.lambda_step));
    let g = &spec.ga;
    h.push_str(&format!(
        "# ga = population {} iterations {} crossover {} mutation {} tolerance {:e} stall {} eps0 {:e} mu {}\n",
        g.population,
        g.iterations,
        g.crossover_prob,
        g.mutation_prob,
        g.tolerance,
        g.stall_generations,
        g.penalty.eps0,
        g.penalty.mu.map_or("10D".to_string(), |m| m.to_string()),
    ));
    for line in params.to_config_text().lines() {
        h.push_str(&format!("# {line}\n"));
    }
    h
}

pub fn write_sweep_csv<W: Write>(mut out: W, spec: &SweepSpec, params: &SystemParams, rows: &[SweepRow]) -> Result<()> {
    out.write_all(metadata_header(spec, params).as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["scheme", "variable", "value", "replications", "pairs", "infeasible_fraction"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for m in METRICS {
        header.extend([format!("{m}_mean"), format!("{m}_se"), format!("{m}_n")]);
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.scheme.clone(),
            r.variable.to_string(),
            r.value.to_string(),
            r.replications.to_string(),
            r.pairs.to_string(),
            r.infeasible_fraction.to_string(),
        ];
        for s in &r.metrics {
            rec.extend([s.mean.to_string(), s.se.to_string(), s.n.to_string()]);
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_file(path: &Path, spec: &SweepSpec, params: &SystemParams, rows: &[SweepRow]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_sweep_csv(std::io::BufWriter::new(f), spec, params, rows)
}

/// `from, from + step, ..., to` (inclusive up to rounding).
pub fn linspace_step(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(to >= from) {
        return Err(Error::InvalidArgument(format!("bad range {from}..{to} step {step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> SystemParams {
        SystemParams { n_vehicles: 12, ..SystemParams::default() }
    }

    fn spec(schemes: &str, values: Vec<f64>, reps: usize) -> SweepSpec {
        SweepSpec::new(SweepVar::PBetaDbm, values, super::super::parse_schemes(schemes).unwrap(), reps, 42)
    }

    #[test]
    fn one_value_one_scheme_one_seed_gives_one_row() {
        let rows = run_sweep(&spec("gpm-noma", vec![10.0], 1), &small_params()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].scheme, "gpm-noma-an-eg");
        assert_eq!(rows[0].replications, 1);
    }

    #[test]
    fn split_replications_pool_to_the_same_means() {
        let p = small_params();
        let full = run_sweep(&spec("gpm-noma,rpm-oma", vec![0.0, 20.0], 6), &p).unwrap();
        let mut a = spec("gpm-noma,rpm-oma", vec![0.0, 20.0], 4);
        let first = run_sweep(&a, &p).unwrap();
        a.replications = 2;
        a.rep_start = 4;
        let second = run_sweep(&a, &p).unwrap();
        for ((f, x), y) in full.iter().zip(&first).zip(&second) {
            assert_eq!(f.pairs, x.pairs + y.pairs);
            for ((sf, sx), sy) in f.metrics.iter().zip(&x.metrics).zip(&y.metrics) {
                assert_eq!(sf.n, sx.n + sy.n);
                if sf.n == 0 {
                    continue;
                }
                let pooled = (sx.n as f64 * nan0(sx.mean) + sy.n as f64 * nan0(sy.mean)) / sf.n as f64;
                assert!((pooled - sf.mean).abs() <= 1e-12 * sf.mean.abs().max(1e-12));
            }
        }
    }

    fn nan0(x: f64) -> f64 {
        if x.is_nan() {
            0.0
        } else {
            x
        }
    }

    #[test]
    fn serial_and_parallel_sweeps_agree() {
        let p = small_params();
        let mut s = spec("gpm-noma,gpm-noma-ga", vec![10.0], 2);
        s.ga.iterations = 20;
        let a = run_sweep(&s, &p).unwrap();
        s.exec = Execution::Serial;
        assert_eq!(a, run_sweep(&s, &p).unwrap());
    }

    #[test]
    fn csv_has_metadata_and_one_line_per_row() {
        let p = small_params();
        let s = spec("gpm-noma", vec![0.0, 10.0], 1);
        let rows = run_sweep(&s, &p).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &s, &p, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# nomasec"));
        assert!(text.contains("# seed = 42"));
        assert!(text.contains("# n_vehicles = 12"));
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 3);
        assert!(data[0].starts_with("scheme,variable,value,replications,pairs,infeasible_fraction,sops_mean"));
    }

    #[test]
    fn distance_sweep_moves_the_edge_vehicle() {
        let p = small_params();
        let s = Scenario {
            vehicles: vec![
                crate::scenario::Vehicle { id: 0, horiz_dist_m: -100.0, speed_mps: 1.0 },
                crate::scenario::Vehicle { id: 1, horiz_dist_m: -450.0, speed_mps: 1.0 },
            ],
            eavesdropper: crate::scenario::EavesdropperPlacement { horiz_dist_m: 30.0 },
        };
        let g = pair_geometry(SweepVar::DAlphaBetaM, 80.0, &s, 0, 1, &p);
        assert_eq!(g.d_beta_alpha, 80.0);
        assert_eq!(g.d_beta_e, 210.0);
    }

    #[test]
    fn rejects_empty_specs() {
        let p = small_params();
        assert!(run_sweep(&spec("gpm-noma", vec![], 1), &p).is_err());
        let mut s = spec("gpm-noma", vec![1.0], 1);
        s.schemes.clear();
        assert!(run_sweep(&s, &p).is_err());
        assert_eq!(linspace_step(0.0, 30.0, 2.0).unwrap().len(), 16);
        assert!(linspace_step(0.0, 1.0, 0.0).is_err());
    }
}
