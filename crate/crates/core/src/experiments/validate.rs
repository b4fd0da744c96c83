//! Analytic outage probabilities against Monte Carlo on a grid of
//! `(λ, P_β, geometry)` points.
//!
//! Enforced: shipped analytic vs model-mode MC within
//! `max(abs_tol, rel_tol · mc)`, semianalytic vs MC within `abs_tol`, and
//! Gauss-Legendre self-convergence. The literal published closed forms and
//! geometric-mode MC are reported without a tolerance.

use std::fmt::Write as _;

use crate::beamforming::AnMode;
use crate::channel::LinkGeometry;
use crate::error::Result;
use crate::link::AccessScheme;
use crate::montecarlo::{mc_sop, McConfig};
use crate::params::SystemParams;
use crate::secrecy::{
    sop_alpha_as_printed, sop_alpha_closed, sop_alpha_semianalytic, sop_beta_as_printed, sop_beta_quadrature,
    sop_beta_semianalytic, EiBranch, SopInputs,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationGrid {
    pub lambdas: Vec<f64>,
    pub p_beta_dbm: Vec<f64>,
    /// `(l_α, l_β, l_e)` in meters.
    pub positions: Vec<(f64, f64, f64)>,
    pub trials: usize,
    /// Trials of the geometric-mode run; zero skips it.
    pub geometric_trials: usize,
    pub seed: u64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub convergence_tol: f64,
    /// Node count compared against `quad_nodes`.
    pub coarse_nodes: usize,
}

impl Default for ValidationGrid {
    fn default() -> Self {
        Self {
            lambdas: vec![0.1, 0.3, 0.45],
            p_beta_dbm: vec![0.0, 10.0, 20.0, 30.0],
            positions: vec![(150.0, 400.0, 170.0)],
            trials: 1_000_000,
            geometric_trials: 100_000,
            seed: 7,
            abs_tol: 0.02,
            rel_tol: 0.05,
            convergence_tol: 1e-6,
            coarse_nodes: 250,
        }
    }
}

impl ValidationGrid {
    /// A small grid for smoke runs.
    pub fn quick() -> Self {
        Self {
            lambdas: vec![0.3],
            p_beta_dbm: vec![10.0],
            trials: 100_000,
            geometric_trials: 10_000,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationPoint {
    pub lambda: f64,
    pub p_beta_dbm: f64,
    pub position: (f64, f64, f64),
    pub alpha_analytic: f64,
    pub alpha_semi: f64,
    pub alpha_mc: f64,
    pub alpha_mc_se: f64,
    pub alpha_printed_pv: f64,
    pub alpha_printed_reflected: f64,
    pub alpha_geometric_mc: f64,
    pub beta_analytic: f64,
    pub beta_coarse: f64,
    pub beta_semi: f64,
    pub beta_mc: f64,
    pub beta_mc_se: f64,
    pub beta_printed: f64,
    pub beta_geometric_mc: f64,
    pub pass_alpha: bool,
    pub pass_beta: bool,
    pub pass_semi: bool,
    pub pass_convergence: bool,
}

impl ValidationPoint {
    pub fn passed(&self) -> bool {
        self.pass_alpha && self.pass_beta && self.pass_semi && self.pass_convergence
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub grid: ValidationGrid,
    pub points: Vec<ValidationPoint>,
}

fn within(analytic: f64, mc: f64, abs_tol: f64, rel_tol: f64) -> bool {
    (analytic - mc).abs() <= abs_tol.max(rel_tol * mc.abs())
}

fn max_mean(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    let max = v.iter().copied().fold(0.0, f64::max);
    let mean = if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    (max, mean)
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(ValidationPoint::passed)
    }

    /// Fixed-precision text table; identical for identical inputs.
    pub fn render(&self) -> String {
        let g = &self.grid;
        let mut s = String::new();
        let _ = writeln!(s, "# analytic validation: seed {} trials {} geometric trials {}", g.seed, g.trials, g.geometric_trials);
        let _ = writeln!(
            s,
            "# tolerances: max({}, {} rel) analytic, {} semianalytic, {:e} quadrature ({} vs reference nodes)",
            g.abs_tol, g.rel_tol, g.abs_tol, g.convergence_tol, g.coarse_nodes
        );
        let _ = writeln!(
            s,
            "{:>5} {:>6} {:>22} | {:>8} {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8} {:>8} {:>9} | {}",
            "lam", "pb", "position", "a_ana", "a_semi", "a_mc", "a_geo", "b_ana", "b_semi", "b_mc", "b_geo", "b_conv", "status"
        );
        for p in &self.points {
            let pos = format!("({:.0},{:.0},{:.0})", p.position.0, p.position.1, p.position.2);
            let _ = writeln!(
                s,
                "{:>5.3} {:>6.1} {:>22} | {:>8.5} {:>8.5} {:>8.5} {:>8.5} | {:>8.5} {:>8.5} {:>8.5} {:>8.5} {:>9.2e} | {}",
                p.lambda,
                p.p_beta_dbm,
                pos,
                p.alpha_analytic,
                p.alpha_semi,
                p.alpha_mc,
                p.alpha_geometric_mc,
                p.beta_analytic,
                p.beta_semi,
                p.beta_mc,
                p.beta_geometric_mc,
                (p.beta_analytic - p.beta_coarse).abs(),
                if p.passed() { "pass" } else { "FAIL" }
            );
        }
        let pts = &self.points;
        let rows: [(&str, (f64, f64)); 6] = [
            ("alpha analytic - mc", max_mean(pts.iter().map(|p| (p.alpha_analytic - p.alpha_mc).abs()))),
            ("alpha semianalytic - mc", max_mean(pts.iter().map(|p| (p.alpha_semi - p.alpha_mc).abs()))),
            ("beta analytic - mc", max_mean(pts.iter().map(|p| (p.beta_analytic - p.beta_mc).abs()))),
            ("beta semianalytic - mc", max_mean(pts.iter().map(|p| (p.beta_semi - p.beta_mc).abs()))),
            ("alpha geometric mc - mc", max_mean(pts.iter().map(|p| (p.alpha_geometric_mc - p.alpha_mc).abs()))),
            ("beta geometric mc - mc", max_mean(pts.iter().map(|p| (p.beta_geometric_mc - p.beta_mc).abs()))),
        ];
        let _ = writeln!(s, "\n# deviation summary (max, mean)");
        for (name, (mx, mean)) in rows {
            let _ = writeln!(s, "{name:<28} {mx:.6} {mean:.6}");
        }
        let _ = writeln!(s, "\n# published closed forms evaluated literally (no tolerance)");
        let _ = writeln!(s, "{:>5} {:>6} | {:>12} {:>12} {:>12} | {:>12} {:>12}", "lam", "pb", "a_pv", "a_refl", "a_semi", "b_printed", "b_semi");
        for p in pts {
            let _ = writeln!(
                s,
                "{:>5.3} {:>6.1} | {:>12.5e} {:>12.5e} {:>12.5} | {:>12.5e} {:>12.5}",
                p.lambda, p.p_beta_dbm, p.alpha_printed_pv, p.alpha_printed_reflected, p.alpha_semi, p.beta_printed, p.beta_semi
            );
        }
        let _ = writeln!(s, "\nresult: {}", if self.passed() { "pass" } else { "FAIL" });
        s
    }
}

/// Runs every grid point. Each point uses its own MC stream derived from
/// the grid seed and the point index.
pub fn validate_analytics(params: &SystemParams, grid: &ValidationGrid) -> Result<ValidationReport> {
    params.validate()?;
    let mut points = Vec::new();
    let mut idx = 0u64;
    for &pos in &grid.positions {
        for &pb in &grid.p_beta_dbm {
            let p = params.with_edge_power_dbm(pb);
            let geo = LinkGeometry::from_positions(pos.0, pos.1, pos.2, &p);
            for &lambda in &grid.lambdas {
                let seed = crate::rng::split(grid.seed, idx);
                idx += 1;
                points.push(point(&p, geo, pos, pb, lambda, seed, grid)?);
            }
        }
    }
    Ok(ValidationReport { grid: grid.clone(), points })
}

fn point(
    p: &SystemParams,
    geo: LinkGeometry,
    position: (f64, f64, f64),
    p_beta_dbm: f64,
    lambda: f64,
    seed: u64,
    grid: &ValidationGrid,
) -> Result<ValidationPoint> {
    let inp = SopInputs::new(p, geo, lambda, AccessScheme::Noma, AnMode::Model);
    let coarse = SopInputs { quad_nodes: grid.coarse_nodes, ..inp };
    let alpha_analytic = sop_alpha_closed(&inp)?.value;
    let alpha_semi = sop_alpha_semianalytic(&inp)?.value;
    let beta_analytic = sop_beta_quadrature(&inp)?.value;
    let beta_coarse = sop_beta_quadrature(&coarse)?.value;
    let beta_semi = sop_beta_semianalytic(&inp)?.value;

    let mc = McConfig { an_mode: AnMode::Model, ..McConfig::new(grid.trials, seed) };
    let m = mc_sop(&geo, lambda, AccessScheme::Noma, p, &mc)?;
    let (alpha_geometric_mc, beta_geometric_mc) = if grid.geometric_trials > 0 {
        let gmc = McConfig { an_mode: AnMode::Geometric, ..McConfig::new(grid.geometric_trials, seed) };
        let g = mc_sop(&geo, lambda, AccessScheme::Noma, p, &gmc)?;
        (g.alpha.mean, g.beta.mean)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ValidationPoint {
        lambda,
        p_beta_dbm,
        position,
        alpha_analytic,
        alpha_semi,
        alpha_mc: m.alpha.mean,
        alpha_mc_se: m.alpha.std_error,
        alpha_printed_pv: sop_alpha_as_printed(&inp, EiBranch::PrincipalValue),
        alpha_printed_reflected: sop_alpha_as_printed(&inp, EiBranch::Reflected),
        alpha_geometric_mc,
        beta_analytic,
        beta_coarse,
        beta_semi,
        beta_mc: m.beta.mean,
        beta_mc_se: m.beta.std_error,
        beta_printed: sop_beta_as_printed(&inp),
        beta_geometric_mc,
        pass_alpha: within(alpha_analytic, m.alpha.mean, grid.abs_tol, grid.rel_tol),
        pass_beta: within(beta_analytic, m.beta.mean, grid.abs_tol, grid.rel_tol),
        pass_semi: (alpha_semi - m.alpha.mean).abs() <= grid.abs_tol && (beta_semi - m.beta.mean).abs() <= grid.abs_tol,
        pass_convergence: (beta_analytic - beta_coarse).abs() <= grid.convergence_tol,
    })
}
