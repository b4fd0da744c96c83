//! Acceptance gate. Runs every criterion at its stated tolerance and prints
//! one line per criterion. Uses its own harness so the lines always reach
//! stdout; exits nonzero on any unexpected failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma};

use nomasec::beamforming::{inner, solve_an_weights, AnMode};
use nomasec::channel::{draw_channels, erlang_pdf, LinkGeometry};
use nomasec::experiments::{
    parse_schemes, run_sweep, validate_analytics, Scheme, SweepRow, SweepSpec, SweepVar, ValidationGrid,
};
use nomasec::link::AccessScheme;
use nomasec::montecarlo::{mc_sop, McConfig};
use nomasec::optimizer::ga::ga_pats;
use nomasec::optimizer::{exhaustive_search, GaConfig, Penalty};
use nomasec::par::Execution;
use nomasec::params::LinkLabel;
use nomasec::scenario::{assign_groups, generate_scenario, pair_gpm};
use nomasec::secrecy::quadrature::{gauss_legendre, integrate_to_infinity};
use nomasec::secrecy::{sop_alpha_closed, sop_beta_quadrature, AlphaModel, BetaModel, SopInputs};
use nomasec::SystemParams;

const GATE_LAMBDAS: [f64; 3] = [0.1, 0.3, 0.45];
const GATE_P_BETA: [f64; 4] = [0.0, 10.0, 20.0, 30.0];
const GATE_POSITION: (f64, f64, f64) = (150.0, 400.0, 170.0);

const SWEEP_REPS: usize = 1000;
const SWEEP_SEED: u64 = 42;
const GPM: &str = "gpm-noma-an-eg";
const GPM_NAN: &str = "gpm-noma-nan-eg";
const RPM: &str = "rpm-noma-an-eg";
const OMA: &str = "gpm-oma-an-eg";

/// Criteria known to fail on the shipped model, with the reason. They are
/// still evaluated in full and reported as FAIL.
const EXPECTED_FAILURES: [(u32, &str); 1] = [(
    5,
    "edge outage under GPM and RPM differs by less than one standard error above 10 dBm",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn gate_inputs(params: &SystemParams, lambda: f64, p_beta_dbm: f64) -> SopInputs {
    let p = params.with_edge_power_dbm(p_beta_dbm);
    let (la, lb, le) = GATE_POSITION;
    let g = LinkGeometry::from_positions(la, lb, le, &p);
    SopInputs::new(&p, g, lambda, AccessScheme::Noma, AnMode::Model)
}

/// Outage frequencies of the NOMA relay link, sampled directly from the
/// fading model: exponential link gains and a Gamma-distributed AN leakage
/// `H_be / (K - 1)`.
fn oracle_outage(p: &SystemParams, g: &LinkGeometry, lambda: f64, trials: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exp = |l: LinkLabel| Exp::new(1.0 / p.variance(l)).unwrap();
    let (e_ba, e_ab, e_be, e_ae, e_aa) = (
        exp(LinkLabel::BetaAlpha),
        exp(LinkLabel::AlphaB),
        exp(LinkLabel::BetaE),
        exp(LinkLabel::AlphaE),
        exp(LinkLabel::AlphaAlpha),
    );
    let k1 = (p.bs_antennas - 1) as f64;
    let h_be = Gamma::new(k1, p.variance(LinkLabel::Be)).unwrap();
    let pl = |d: f64| d.powf(-p.path_loss_exp);
    let dbm = |x: f64| 10f64.powf(x / 10.0) * 1e-3;
    let (pa, pb, psi, pan) = (dbm(p.p_center_dbm), dbm(p.p_edge_dbm), dbm(p.p_si_dbm), dbm(p.p_an_dbm));
    let n0 = dbm(p.noise_density_dbm_hz) * p.bandwidth_hz;
    let rs = p.secrecy_rate_target;
    let (mut out_a, mut out_b) = (0usize, 0usize);
    for _ in 0..trials {
        let g_ba = e_ba.sample(&mut rng) * pl(g.d_beta_alpha);
        let g_ab = e_ab.sample(&mut rng) * pl(g.d_alpha_b);
        let g_be = e_be.sample(&mut rng) * pl(g.d_beta_e);
        let g_ae = e_ae.sample(&mut rng) * pl(g.d_alpha_e);
        let h_aa = e_aa.sample(&mut rng);
        let jam = pan * pl(g.d_b_e) * h_be.sample(&mut rng) / k1;
        let r_ba = pb * g_ba / (psi * h_aa + n0);
        let r_bb = (1.0 - lambda) * pa * g_ab / (lambda * pa * g_ab + n0);
        let r_ab = lambda * pa * g_ab / n0;
        let r_be = (pb * g_be + (1.0 - lambda) * pa * g_ae) / (lambda * pa * g_ae + jam + n0);
        let r_ae = lambda * pa * g_ae / (jam + n0);
        let c = |x: f64| (1.0 + x).log2();
        out_a += (c(r_ab) - c(r_ae) < rs) as usize;
        out_b += (c(r_ba).min(c(r_bb)) - c(r_be) < rs) as usize;
    }
    (out_a as f64 / trials as f64, out_b as f64 / trials as f64)
}

fn criterion_1(params: &SystemParams) -> Outcome {
    let grid = ValidationGrid::default();
    let tol = |mc: f64| grid.abs_tol.max(grid.rel_tol * mc);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    let mut seed = 1000;
    for &pb in &GATE_P_BETA {
        for &lam in &GATE_LAMBDAS {
            let inp = gate_inputs(params, lam, pb);
            let a = sop_alpha_closed(&inp).unwrap().value;
            let b = sop_beta_quadrature(&inp).unwrap().value;
            let (ma, mb) = oracle_outage(&params.with_edge_power_dbm(pb), &inp.geometry, lam, grid.trials, seed);
            seed += 1;
            for (x, m) in [(a, ma), (b, mb)] {
                worst = worst.max((x - m).abs());
                pass &= (x - m).abs() <= tol(m);
            }
        }
    }
    let report = validate_analytics(params, &grid).unwrap();
    let shipped = report.points.iter().all(|p| p.pass_alpha && p.pass_beta);
    Outcome {
        pass: pass && shipped,
        detail: format!(
            "max |analytic - oracle mc| = {worst:.5} over {} points, shipped validator {}",
            GATE_LAMBDAS.len() * GATE_P_BETA.len(),
            if shipped { "agrees" } else { "disagrees" }
        ),
    }
}

fn criterion_2(params: &SystemParams) -> Outcome {
    let mut worst: f64 = 0.0;
    for &pb in &GATE_P_BETA {
        for &lam in &GATE_LAMBDAS {
            let mut inp = gate_inputs(params, lam, pb);
            inp.quad_nodes = 500;
            let fine = sop_beta_quadrature(&inp).unwrap().value;
            inp.quad_nodes = 250;
            let coarse = sop_beta_quadrature(&inp).unwrap().value;
            worst = worst.max((fine - coarse).abs());
        }
    }
    Outcome { pass: worst <= 1e-6, detail: format!("max |N=500 - N=250| = {worst:.2e}") }
}

/// Draws pair contexts until `contexts` of them have a feasible grid
/// optimum; contexts without one have no optimum to match.
fn criterion_3(params: &SystemParams) -> Outcome {
    let start = Instant::now();
    let scheme: Scheme = "gpm-noma-an-ga".parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (r_mc, r) = (params.center_radius_m, params.cell_radius_m);
    let contexts = 20;
    let (mut drawn, mut used, mut within) = (0u64, 0, 0);
    let mut misses = Vec::new();
    while used < contexts {
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let la = side * rng.random_range(10.0..r_mc);
        let lb = side * rng.random_range(r_mc + 1.0..r);
        let le = rng.random_range(-r..r);
        let mut p = params.with_edge_power_dbm(rng.random_range(0.0..30.0));
        p.m_tasks = 10;
        let geo = LinkGeometry::from_positions(la, lb, le, &p);
        let ctx = scheme.context(&p, geo, &draw_channels(&p, 5000 + drawn));
        drawn += 1;
        let eg = exhaustive_search(&ctx, 0.005, &Penalty::default()).unwrap();
        if !eg.feasible {
            continue;
        }
        let ga = ga_pats(&ctx, &GaConfig { seed: drawn, lambda_step: Some(0.005), ..GaConfig::default() }).unwrap();
        let close = ga.feasible && (ga.d_beta() - eg.d_beta()).abs() <= 0.01 * eg.d_beta();
        within += close as usize;
        if !close {
            misses.push(format!("#{used} eg {:.4} ga {:.4}", eg.d_beta(), ga.d_beta()));
        }
        used += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: within >= 19 && secs < 120.0,
        detail: format!(
            "{within}/{contexts} contexts within 1% ({drawn} drawn), {secs:.1} s; misses: [{}]",
            misses.join(", ")
        ),
    }
}

fn series(rows: &[SweepRow], scheme: &str, metric: &str) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.scheme == scheme)
        .map(|r| (r.value, r.metric(metric).expect("metric present").mean))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn first_violation<F: Fn(f64, f64) -> bool>(a: &[(f64, f64)], b: &[(f64, f64)], ok: F) -> Option<f64> {
    a.iter().zip(b).find(|(x, y)| !ok(x.1, y.1)).map(|(x, _)| x.0)
}

fn non_increasing(s: &[(f64, f64)]) -> Option<f64> {
    s.windows(2).find(|w| w[1].1 > w[0].1).map(|w| w[1].0)
}

fn at(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x} dBm"))
}

fn criterion_4(rows: &[SweepRow]) -> Outcome {
    let an = series(rows, GPM, "sops");
    let nan = series(rows, GPM_NAN, "sops");
    let mono = non_increasing(&an);
    let gap = first_violation(&nan, &an, |n, a| n > a);
    Outcome {
        pass: mono.is_none() && gap.is_none(),
        detail: format!(
            "sops {:.4} -> {:.4}, first increase at {}, first point with N-AN <= AN at {}",
            an[0].1,
            an[an.len() - 1].1,
            at(mono),
            at(gap)
        ),
    }
}

fn criterion_5(rows: &[SweepRow]) -> Outcome {
    let gb = series(rows, GPM, "sop_beta");
    let rb = series(rows, RPM, "sop_beta");
    let ga = series(rows, GPM, "sop_alpha");
    let ra = series(rows, RPM, "sop_alpha");
    let worse: Vec<String> = gb.iter().zip(&rb).filter(|(g, r)| g.1 >= r.1).map(|(g, r)| format!("{}:{:+.4}", g.0, g.1 - r.1)).collect();
    let alpha_gap = ga.iter().zip(&ra).map(|(g, r)| g.1 - r.1).fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        pass: worse.is_empty() && alpha_gap <= 0.05,
        detail: format!(
            "GPM edge outage not below RPM at [{}], max alpha gap {alpha_gap:.2e}",
            worse.join(" ")
        ),
    }
}

fn criterion_6(rows: &[SweepRow]) -> Outcome {
    let n = series(rows, GPM, "d_beta");
    let o = series(rows, OMA, "d_beta");
    let bad = first_violation(&n, &o, |a, b| a <= b);
    let na = series(rows, GPM, "d_alpha");
    let oa = series(rows, OMA, "d_alpha");
    let da = na.iter().zip(&oa).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max);
    Outcome {
        pass: bad.is_none(),
        detail: format!("first point with NOMA D_beta > OMA at {}, max |D_alpha gap| = {da:.4} s", at(bad)),
    }
}

fn criterion_7(rows: &[SweepRow]) -> Outcome {
    let l = series(rows, GPM, "lambda_star");
    let mono = non_increasing(&l);
    Outcome {
        pass: mono.is_none(),
        detail: format!("lambda* {:.4} -> {:.4}, first increase at {}", l[0].1, l[l.len() - 1].1, at(mono)),
    }
}

fn criterion_8(rows: &[SweepRow]) -> Outcome {
    let n = series(rows, GPM, "offloaded_tasks");
    let o = series(rows, OMA, "offloaded_tasks");
    let bad = first_violation(&n, &o, |a, b| a >= b);
    Outcome { pass: bad.is_none(), detail: format!("first point with NOMA below OMA at {}", at(bad)) }
}

fn gauss_legendre_exactness() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=20 {
        let rule = gauss_legendre(n);
        for deg in 0..2 * n {
            let coef: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (a, b) = (-1.0, 1.0);
            let poly = |x: f64| coef.iter().rev().fold(0.0, |acc, c| acc * x + c);
            let anti = |x: f64| coef.iter().enumerate().map(|(i, c)| c * x.powi(i as i32 + 1) / (i + 1) as f64).sum::<f64>();
            let err = (rule.integrate(a, b, poly) - (anti(b) - anti(a))).abs();
            if err > 1e-12 {
                return Err(format!("n={n} degree {deg}: error {err:e}"));
            }
        }
    }
    Ok(())
}

fn erlang_normalisation() -> Result<(), String> {
    for shape in 1..=12 {
        for rate in [0.05, 1.0, 7.5, 3e4] {
            let scale = shape as f64 / rate;
            let total =
                integrate_to_infinity(|u| scale * erlang_pdf(scale * u, shape, rate).unwrap(), 0.0, 1e-12).unwrap();
            if (total - 1.0).abs() > 1e-8 {
                return Err(format!("shape {shape} rate {rate}: {total}"));
            }
        }
    }
    Ok(())
}

fn density_matches_distribution(params: &SystemParams) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut checked = 0;
    while checked < 200 {
        let lam = rng.random_range(0.02..0.48);
        let p = params.with_edge_power_dbm(rng.random_range(0.0..30.0));
        let le = rng.random_range(-500.0..500.0);
        let g = LinkGeometry::from_positions(150.0, 400.0, le, &p);
        let inp = SopInputs::new(&p, g, lam, AccessScheme::Noma, AnMode::Model);
        let alpha = AlphaModel::new(&inp);
        let beta = BetaModel::new(&inp);
        let scale = 1.0 / (alpha.b + (alpha.k - 1) as f64 * alpha.q);
        let ya = scale * rng.random_range(0.01..5.0);
        let yb = rng.random_range(0.0..1.5 * beta.tau1());
        let checks: [(&str, f64, &dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64); 2] = [
            ("alpha", ya, &|y| alpha.survival_y(y), &|y| alpha.pdf_y(y)),
            ("beta", yb, &|y| beta.survival_y(y), &|y| beta.pdf_y(y)),
        ];
        for (name, y, s, f) in checks {
            let fy = f(y);
            if fy < 1e-250 || y == 0.0 {
                continue;
            }
            let h = 1e-5 * y.min((beta.tau1() - y).abs().max(1e-3 * y));
            let fd = (s(y - h) - s(y + h)) / (2.0 * h);
            if (fd - fy).abs() > 1e-5 * fy {
                return Err(format!("{name} at y={y:e}: {fd:e} vs {fy:e}"));
            }
            checked += 1;
        }
    }
    Ok(())
}

fn nulling(params: &SystemParams) -> Result<(), String> {
    for seed in 0..200 {
        let d = draw_channels(params, seed);
        let w = solve_an_weights(&d).w;
        for (name, h) in [("h_b_alpha", d.h_b_alpha.clone()), ("h_bb column 0", d.h_bb_column(0))] {
            let r = inner(&w, &h).norm();
            if r > 1e-10 {
                return Err(format!("seed {seed}: |w^H {name}| = {r:e}"));
            }
        }
    }
    Ok(())
}

fn mc_determinism(params: &SystemParams) -> Result<(), String> {
    let geo = LinkGeometry::from_positions(150.0, 400.0, 170.0, params);
    let base = McConfig { exec: Execution::Serial, ..McConfig::new(20_000, 5) };
    let reference = mc_sop(&geo, 0.3, AccessScheme::Noma, params, &base).unwrap();
    for (exec, batch) in [(Execution::Parallel, base.batch_size), (Execution::Parallel, 7), (Execution::Serial, 999)] {
        let run = mc_sop(&geo, 0.3, AccessScheme::Noma, params, &McConfig { exec, batch_size: batch, ..base }).unwrap();
        let bits = |m: &nomasec::montecarlo::McSop| [m.alpha.mean, m.beta.mean, m.sops.mean, m.alpha.std_error].map(f64::to_bits);
        if bits(&run) != bits(&reference) {
            return Err(format!("{exec:?} with batch {batch} differs"));
        }
    }
    Ok(())
}

fn elitism(params: &SystemParams) -> Result<(), String> {
    let scheme: Scheme = "gpm-noma-an-ga".parse().unwrap();
    for seed in 0..8 {
        let geo = LinkGeometry::from_positions(120.0, 380.0 + 10.0 * seed as f64, -60.0, params);
        let ctx = scheme.context(params, geo, &draw_channels(params, 70 + seed));
        let r = ga_pats(&ctx, &GaConfig { seed, iterations: 80, ..GaConfig::default() }).unwrap();
        if let Some(w) = r.history.windows(2).find(|w| w[1] < w[0]) {
            return Err(format!("seed {seed}: best fitness fell from {} to {}", w[0], w[1]));
        }
    }
    Ok(())
}

fn pairing_invariance(params: &SystemParams) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for seed in 0..100 {
        let sc = generate_scenario(params, seed);
        let reference = pair_gpm(&assign_groups(&sc.vehicles, params), &sc.vehicles);
        let mut shuffled = sc.vehicles.clone();
        shuffled.shuffle(&mut rng);
        let again = pair_gpm(&assign_groups(&shuffled, params), &shuffled);
        if again != reference {
            return Err(format!("scenario {seed}: pairing depends on input order"));
        }
    }
    Ok(())
}

fn criterion_9(params: &SystemParams) -> Outcome {
    let suites: [(&str, Result<(), String>); 7] = [
        ("gauss-legendre exactness", gauss_legendre_exactness()),
        ("erlang normalisation", erlang_normalisation()),
        ("density vs distribution", density_matches_distribution(params)),
        ("null steering", nulling(params)),
        ("monte carlo determinism", mc_determinism(params)),
        ("ga elitism", elitism(params)),
        ("pairing permutation invariance", pairing_invariance(params)),
    ];
    let failed: Vec<String> = suites.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
    Outcome {
        pass: failed.is_empty(),
        detail: if failed.is_empty() { format!("{} suites", suites.len()) } else { failed.join("; ") },
    }
}

fn main() -> ExitCode {
    // `cargo test -- --list` probes every test binary.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    // Numeric arguments select criteria; none runs all of them.
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let params = SystemParams::default();
    let start = Instant::now();
    let mut spec = SweepSpec::new(
        SweepVar::PBetaDbm,
        (0..=15).map(|i| 2.0 * i as f64).collect(),
        parse_schemes(&[GPM, GPM_NAN, RPM, OMA].join(",")).unwrap(),
        SWEEP_REPS,
        SWEEP_SEED,
    );
    spec.lambda_step = 0.005;
    let criteria: Vec<(u32, &str, Box<dyn Fn(&[SweepRow]) -> Outcome>)> = vec![
        (1, "analytic outage vs monte carlo", Box::new(|_| criterion_1(&params))),
        (2, "quadrature self-convergence", Box::new(|_| criterion_2(&params))),
        (3, "genetic vs exhaustive search", Box::new(|_| criterion_3(&params))),
        (4, "system outage trend and AN gain", Box::new(criterion_4)),
        (5, "GPM vs RPM outage", Box::new(criterion_5)),
        (6, "NOMA vs OMA edge delay", Box::new(criterion_6)),
        (7, "power split trend", Box::new(criterion_7)),
        (8, "NOMA vs OMA offloaded tasks", Box::new(criterion_8)),
        (9, "property suites", Box::new(|_| criterion_9(&params))),
    ];
    let mut rows: Option<Vec<SweepRow>> = None;
    let mut unexpected = 0;
    for (id, name, check) in &criteria {
        if !only.is_empty() && !only.contains(id) {
            continue;
        }
        let t = Instant::now();
        let needs_sweep = (4..=8).contains(id);
        if needs_sweep && rows.is_none() {
            rows = Some(run_sweep(&spec, &params).expect("sweep runs"));
        }
        let out = check(rows.as_deref().unwrap_or(&[]));
        let expected = EXPECTED_FAILURES.iter().find(|(e, _)| e == id).map(|(_, why)| *why);
        let status = match (out.pass, expected) {
            (true, None) => "PASS".to_string(),
            (true, Some(_)) => "PASS (listed as an expected failure)".to_string(),
            (false, Some(why)) => format!("FAIL (expected: {why})"),
            (false, None) => {
                unexpected += 1;
                "FAIL".to_string()
            }
        };
        println!("criterion {id} {name}: {status} | {} [{:.1} s]", out.detail, t.elapsed().as_secs_f64());
    }
    println!("acceptance finished in {:.1} s, {unexpected} unexpected failure(s)", start.elapsed().as_secs_f64());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
