//! Analytic secrecy outage probabilities.
//!
//! Notation: `z = 2^{R_s / prelog}` is the outage threshold on
//! `(1 + X) / (1 + Y)`, where `X` is the legitimate SINR and `Y` the
//! eavesdropper SINR of the vehicle in question. Gains `|h_j|^2` are
//! exponential with rate `γ_j = 1 / σ_j^2` and the AN leakage `H_be` is
//! Erlang(`K - 1`, `γ_be`).
//!
//! The shipped evaluators are [`sop_alpha_closed`] (scaled generalised
//! exponential integrals) and [`sop_beta_quadrature`] (Gauss-Legendre over
//! the finite support `[0, τ₂]`). [`sop_alpha_semianalytic`] and
//! [`sop_beta_semianalytic`] integrate the same densities adaptively. The
//! `*_as_printed` functions reproduce the published expressions verbatim,
//! typos included, for deviation reports only.

pub mod quadrature;
pub mod special;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::beamforming::AnMode;
use crate::channel::{path_loss, LinkGeometry};
use crate::error::{Error, Result};
use crate::link::AccessScheme;
use crate::params::{LinkLabel, SystemParams};
use quadrature::{gauss_legendre, integrate_graded, integrate_to_infinity};
use special::{exp_integral_ei, expn_scaled, exprel, exprel_prime, log1prel, log1prel_prime};

/// Absolute tolerance of the adaptive integrals.
pub const SEMI_ANALYTIC_TOL: f64 = 1e-8;
/// Slack outside `[0, 1]` that is clamped rather than reported as an error.
pub const CLAMP_SLACK: f64 = 1e-9;
/// Below this `|α₂ - α₁| / α₁`, and while the exponent gap stays within
/// one, the hypoexponential survival uses the cancellation-free form.
const COINCIDENCE_BAND: f64 = 1e-3;

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of probabilities clamped into `[0, 1]` since process start.
pub fn clamp_events() -> u64 {
    CLAMP_EVENTS.load(Ordering::Relaxed)
}

pub fn clamp_probability(context: &'static str, value: f64) -> Result<f64> {
    if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&value) {
        return Err(Error::ProbabilityOutOfRange { context, value });
    }
    if !(0.0..=1.0).contains(&value) {
        CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
    }
    Ok(value.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SopMethod {
    ClosedForm,
    GaussLegendre,
    SemiAnalytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sop {
    pub value: f64,
    pub method: SopMethod,
}

/// Exponential rates `γ_j = 1 / σ_j^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRates {
    pub alpha_b: f64,
    pub alpha_e: f64,
    pub be: f64,
    pub beta_alpha: f64,
    pub beta_e: f64,
    pub alpha_alpha: f64,
}

impl GainRates {
    pub fn new(params: &SystemParams) -> Self {
        Self {
            alpha_b: params.gain_rate(LinkLabel::AlphaB),
            alpha_e: params.gain_rate(LinkLabel::AlphaE),
            be: params.gain_rate(LinkLabel::Be),
            beta_alpha: params.gain_rate(LinkLabel::BetaAlpha),
            beta_e: params.gain_rate(LinkLabel::BetaE),
            alpha_alpha: params.gain_rate(LinkLabel::AlphaAlpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SopInputs {
    pub lambda: f64,
    pub p_alpha: f64,
    pub p_beta: f64,
    /// Per-antenna AN power; zero without AN.
    pub p_b: f64,
    pub geometry: LinkGeometry,
    pub path_loss_exp: f64,
    pub rates: GainRates,
    pub noise: f64,
    pub p_si: f64,
    pub k: usize,
    pub rs: f64,
    pub quad_nodes: usize,
    pub scheme: AccessScheme,
}

impl SopInputs {
    pub fn new(
        params: &SystemParams,
        geometry: LinkGeometry,
        lambda: f64,
        scheme: AccessScheme,
        an: AnMode,
    ) -> Self {
        Self {
            lambda,
            p_alpha: params.p_center_w(),
            p_beta: params.p_edge_w(),
            p_b: if an == AnMode::Off {
                0.0
            } else {
                params.p_an_per_antenna_w()
            },
            geometry,
            path_loss_exp: params.path_loss_exp,
            rates: GainRates::new(params),
            noise: params.noise_power(),
            p_si: params.p_si_w(),
            k: params.bs_antennas,
            rs: params.secrecy_rate_target,
            quad_nodes: params.quad_nodes,
            scheme,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scheme == AccessScheme::Noma && !(self.lambda > 0.0 && self.lambda < 0.5) {
            return Err(Error::invalid("lambda", format!("must lie in (0, 0.5), got {}", self.lambda)));
        }
        if self.k < 3 {
            return Err(Error::invalid("bs_antennas", "must be >= 3"));
        }
        if self.quad_nodes < 2 {
            return Err(Error::invalid("quad_nodes", "must be >= 2"));
        }
        if !(self.rs >= 0.0) {
            return Err(Error::invalid("secrecy_rate_target", "must be >= 0"));
        }
        let positive = [
            ("p_alpha", self.p_alpha),
            ("p_beta", self.p_beta),
            ("noise", self.noise),
            ("gamma_alpha_b", self.rates.alpha_b),
            ("gamma_alpha_e", self.rates.alpha_e),
            ("gamma_be", self.rates.be),
            ("gamma_beta_alpha", self.rates.beta_alpha),
            ("gamma_beta_e", self.rates.beta_e),
            ("gamma_alpha_alpha", self.rates.alpha_alpha),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.p_b >= 0.0 && self.p_si >= 0.0) {
            return Err(Error::invalid("p_b", "powers must be nonnegative"));
        }
        self.geometry.validate()
    }

    pub fn z(&self) -> f64 {
        (self.rs / self.scheme.prelog()).exp2()
    }

    fn gd(&self, d: f64) -> f64 {
        path_loss(d, self.path_loss_exp)
    }

    /// `(λ_α, λ_β)` seen by each vehicle's SINRs.
    fn lambdas(&self) -> (f64, f64) {
        self.scheme.effective_lambdas(self.lambda)
    }
}

/// `P_sop = p_α + p_β - p_α p_β`.
pub fn sops(p_alpha: f64, p_beta: f64) -> f64 {
    p_alpha + p_beta - p_alpha * p_beta
}

// ---------------------------------------------------------------- V_α ----

/// Constants of `F_X(x) = 1 - e^{-a x}` and
/// `1 - F_Y(y) = e^{-b y} (1 + q y)^{1-K}`.
#[derive(Debug, Clone, Copy)]
pub struct AlphaModel {
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub k: usize,
    pub z: f64,
}

impl AlphaModel {
    pub fn new(inp: &SopInputs) -> Self {
        let (lam, _) = inp.lambdas();
        let g = &inp.geometry;
        let sig = lam * inp.p_alpha;
        let gd_ab = inp.gd(g.d_alpha_b);
        let gd_ae = inp.gd(g.d_alpha_e);
        let gd_be = inp.gd(g.d_b_e);
        let c = inp.rates.alpha_e * inp.p_b * gd_be / (sig * gd_ae);
        Self {
            a: inp.rates.alpha_b * inp.noise / (sig * gd_ab),
            b: inp.rates.alpha_e * inp.noise / (sig * gd_ae),
            q: c / inp.rates.be,
            k: inp.k,
            z: inp.z(),
        }
    }

    pub fn cdf_x(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.a * x).exp_m1()
        }
    }

    pub fn survival_y(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        (-self.b * y - (self.k - 1) as f64 * (self.q * y).ln_1p()).exp()
    }

    pub fn cdf_y(&self, y: f64) -> f64 {
        1.0 - self.survival_y(y)
    }

    pub fn pdf_y(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let n = (self.k - 1) as f64;
        self.survival_y(y) * (self.b + n * self.q / (1.0 + self.q * y))
    }
}

fn alpha_closed_value(m: &AlphaModel) -> Result<f64> {
    let psi1 = m.a * (m.z - 1.0);
    let s = m.a * m.z;
    if m.q == 0.0 {
        return Ok(1.0 - (-psi1).exp() * m.b / (s + m.b));
    }
    let kappa = 1.0 / m.q;
    let mu = (s + m.b) * kappa;
    let e_k = expn_scaled(m.k, mu)?;
    let e_km1 = expn_scaled(m.k - 1, mu)?;
    Ok(1.0 - (-psi1).exp() * ((m.k - 1) as f64 * e_k + m.b * kappa * e_km1))
}

/// Closed form `1 - e^{-ψ₁}[(K-1) e^μ E_K(μ) + bκ e^μ E_{K-1}(μ)]` with
/// `μ = (a z + b) / q`, `κ = 1 / q`. Falls back to the adaptive integral if
/// the special functions fail.
pub fn sop_alpha_closed(inp: &SopInputs) -> Result<Sop> {
    inp.validate()?;
    let m = AlphaModel::new(inp);
    match alpha_closed_value(&m) {
        Ok(v) if v.is_finite() => Ok(Sop {
            value: clamp_probability("sop_alpha_closed", v)?,
            method: SopMethod::ClosedForm,
        }),
        _ => sop_alpha_semianalytic(inp),
    }
}

/// `∫_0^∞ F_X(z y + z - 1) f_Y(y) dy` by adaptive quadrature, evaluated as
/// one minus the integral of the complementary integrand.
pub fn sop_alpha_semianalytic(inp: &SopInputs) -> Result<Sop> {
    inp.validate()?;
    let m = AlphaModel::new(inp);
    let scale = 1.0 / (m.a * m.z + m.b + (m.k - 1) as f64 * m.q);
    let v = 1.0
        - integrate_to_infinity(
            |u| {
                let y = scale * u;
                scale * (1.0 - m.cdf_x(m.z * y + m.z - 1.0)) * m.pdf_y(y)
            },
            0.0,
            SEMI_ANALYTIC_TOL,
        )?;
    Ok(Sop {
        value: clamp_probability("sop_alpha_semianalytic", v)?,
        method: SopMethod::SemiAnalytic,
    })
}

/// Branch used for `Ei` at the negative argument of the printed expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EiBranch {
    /// `Ei(x) = -E_1(-x)`.
    PrincipalValue,
    /// `-Ei(|x|)`.
    Reflected,
}

/// The published closed form for `V_α`, evaluated literally. May return
/// values outside `[0, 1]` or non-finite values.
pub fn sop_alpha_as_printed(inp: &SopInputs, branch: EiBranch) -> f64 {
    let g = &inp.geometry;
    let (lam, _) = inp.lambdas();
    let gd_ab = inp.gd(g.d_alpha_b);
    let gd_ae = inp.gd(g.d_alpha_e);
    let gd_be = inp.gd(g.d_b_e);
    let r = &inp.rates;
    let z = inp.z();
    let k = inp.k as i32;
    let psi1 = inp.noise * r.alpha_b * (z - 1.0) / (lam * inp.p_alpha * gd_ab);
    let psi2 = -r.alpha_e / gd_ae - r.alpha_b * z / gd_ab;
    let psi3 = inp.noise * gd_ae * r.be / (inp.p_b * gd_be * r.alpha_e);
    let fact = |n: i32| (1..=n).map(f64::from).product::<f64>();
    let sum: f64 = (1..=k - 2)
        .map(|i| fact(i - 1) * psi1.powi(k - i - 2) * psi2.powi(-i))
        .sum();
    let x = psi1 * psi2;
    // e^{-x} Ei(x), kept in scaled form where possible.
    let tail = match branch {
        EiBranch::PrincipalValue if x < 0.0 => -expn_scaled(1, -x).unwrap_or(f64::NAN),
        EiBranch::PrincipalValue => (-x).exp() * exp_integral_ei(x).unwrap_or(f64::NAN),
        EiBranch::Reflected => -(-x).exp() * exp_integral_ei(x.abs()).unwrap_or(f64::NAN),
    };
    let bracket = sum - psi1.powi(k - 2) * tail;
    let pref = (-psi3).exp() * z / fact(k - 2)
        * (r.alpha_b / gd_ab)
        * (inp.p_b * gd_be * r.alpha_e / (inp.noise * gd_ae * r.be)).powi(1 - k);
    1.0 - (-psi3).exp() + pref * bracket
}

// ---------------------------------------------------------------- V_β ----

/// Distribution pieces for `V_β`: `X = min(r_βα, r_βb)` and the MRC
/// eavesdropper SINR `Y = r_βe`.
#[derive(Debug, Clone, Copy)]
pub struct BetaModel {
    /// `γ_βe / (P_β g_βe)`.
    pub alpha1: f64,
    /// `P_α g_αe`.
    pub bc: f64,
    pub lam: f64,
    pub gamma_ae: f64,
    /// `P_b g_be / γ_be`.
    pub c_an: f64,
    pub sigma2: f64,
    pub k: usize,
    pub z: f64,
    /// Legitimate-link constants.
    pub pb_gd_ba: f64,
    pub pa_gd_ab: f64,
    pub p_si: f64,
    pub gamma_ba: f64,
    pub gamma_aa: f64,
    pub gamma_ab: f64,
}

impl BetaModel {
    pub fn new(inp: &SopInputs) -> Self {
        let (_, lam) = inp.lambdas();
        let g = &inp.geometry;
        let r = &inp.rates;
        Self {
            alpha1: r.beta_e / (inp.p_beta * inp.gd(g.d_beta_e)),
            bc: inp.p_alpha * inp.gd(g.d_alpha_e),
            lam,
            gamma_ae: r.alpha_e,
            c_an: inp.p_b * inp.gd(g.d_b_e) / r.be,
            sigma2: inp.noise,
            k: inp.k,
            z: inp.z(),
            pb_gd_ba: inp.p_beta * inp.gd(g.d_beta_alpha),
            pa_gd_ab: inp.p_alpha * inp.gd(g.d_alpha_b),
            p_si: inp.p_si,
            gamma_ba: r.beta_alpha,
            gamma_aa: r.alpha_alpha,
            gamma_ab: r.alpha_b,
        }
    }

    /// `(1 - λ) / λ`; infinite when `λ = 0`.
    pub fn tau1(&self) -> f64 {
        if self.lam == 0.0 {
            f64::INFINITY
        } else {
            (1.0 - self.lam) / self.lam
        }
    }

    /// Upper end of the outage integral, `(1 - zλ) / (zλ)`.
    pub fn tau2(&self) -> f64 {
        if self.lam == 0.0 {
            f64::INFINITY
        } else {
            (1.0 - self.z * self.lam) / (self.z * self.lam)
        }
    }

    fn n(&self) -> f64 {
        (self.k - 1) as f64
    }

    /// `G(α; y) = E[e^{-α y (J + σ²)}]`.
    fn g(&self, alpha: f64, y: f64) -> f64 {
        (-alpha * y * self.sigma2 - self.n() * (alpha * y * self.c_an).ln_1p()).exp()
    }

    /// `-∂_y ln G / α = -∂_α ln G / y`.
    fn t(&self, alpha: f64, y: f64) -> f64 {
        self.sigma2 + self.n() * self.c_an / (1.0 + alpha * y * self.c_an)
    }

    fn u(&self, y: f64) -> f64 {
        (1.0 - self.lam - y * self.lam) * self.bc
    }

    /// `P(Y > y)`.
    pub fn survival_y(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        let a1 = self.alpha1;
        let g1 = self.g(a1, y);
        let u = self.u(y);
        if u <= 0.0 {
            return g1 * self.gamma_ae / (self.gamma_ae - a1 * u);
        }
        let a2 = self.gamma_ae / u;
        let delta = a2 - a1;
        if delta.abs() <= COINCIDENCE_BAND * a1 {
            let r = y * self.c_an / (1.0 + a1 * y * self.c_an);
            let q = y * self.sigma2 + self.n() * r * log1prel(delta * r);
            if (delta * q).abs() <= 1.0 {
                return g1 * (1.0 + a1 * q * exprel(-delta * q));
            }
        }
        (a2 * g1 - a1 * self.g(a2, y)) / delta
    }

    pub fn cdf_y(&self, y: f64) -> f64 {
        1.0 - self.survival_y(y)
    }

    /// `f_Y = -dS/dy`, differentiated analytically.
    pub fn pdf_y(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let a1 = self.alpha1;
        let g1 = self.g(a1, y);
        let t1 = self.t(a1, y);
        let dg1 = -g1 * a1 * t1;
        let u = self.u(y);
        let lb = self.lam * self.bc;
        if u <= 0.0 {
            let den = self.gamma_ae - a1 * u;
            let ratio = self.gamma_ae / den;
            let dratio = -self.gamma_ae * a1 * lb / (den * den);
            return -(dg1 * ratio + g1 * dratio);
        }
        let a2 = self.gamma_ae / u;
        let da2 = a2 * lb / u;
        let delta = a2 - a1;
        if delta.abs() <= COINCIDENCE_BAND * a1 {
            let c = self.c_an;
            let n = self.n();
            let den = 1.0 + a1 * y * c;
            let r = y * c / den;
            let dr = c / (den * den);
            let x = delta * r;
            let dx = da2 * r + delta * dr;
            let q = y * self.sigma2 + n * r * log1prel(x);
            let w = delta * q;
            if w.abs() <= 1.0 {
                let dq = self.sigma2 + n * (dr * log1prel(x) + r * log1prel_prime(x) * dx);
                let dw = da2 * q + delta * dq;
                let qe = q * exprel(-w);
                let dqe = dq * exprel(-w) - q * exprel_prime(-w) * dw;
                return -(dg1 * (1.0 + a1 * qe) + g1 * a1 * dqe);
            }
        }
        let g2 = self.g(a2, y);
        let t2 = self.t(a2, y);
        let s = (a2 * g1 - a1 * g2) / delta;
        -(da2 * (g1 - s) - a1 * a2 * (g1 * t1 - g2 * t2) + a1 * da2 * y * g2 * t2) / delta
    }

    /// `P(r_βα > x)`.
    pub fn survival_beta_alpha(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let s = self.pb_gd_ba * self.gamma_aa;
        s / (s + self.p_si * self.gamma_ba * x) * (-self.gamma_ba * self.sigma2 * x / self.pb_gd_ba).exp()
    }

    /// `P(r_βb > x)`; zero at and beyond `τ₁`.
    pub fn survival_beta_b(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let head = 1.0 - self.lam - x * self.lam;
        if head <= 0.0 {
            return 0.0;
        }
        (-self.gamma_ab * self.sigma2 * x / (head * self.pa_gd_ab)).exp()
    }

    /// `Φ(x) = P(X > x) = 1 - F_X(x)`.
    pub fn phi(&self, x: f64) -> f64 {
        self.survival_beta_alpha(x) * self.survival_beta_b(x)
    }

    /// The published `φ`: the `r_βα` survival alone, with its rational
    /// factor missing `x`.
    pub fn phi_as_printed(&self, x: f64) -> f64 {
        let s = self.pb_gd_ba * self.gamma_aa;
        s / (s + self.p_si * self.gamma_ba) * (-self.gamma_ba * self.sigma2 * x / self.pb_gd_ba).exp()
    }

    fn integrand(&self, y: f64) -> f64 {
        self.phi(self.z * y + self.z - 1.0) * self.pdf_y(y)
    }
}

/// Power of the node-clustering map `y = τ₂ s^p`, `s ∈ [0, 1]`.
pub const GL_CLUSTER_POWER: i32 = 3;

/// `1 - ∫_0^{τ₂} g`, with Gauss-Legendre nodes on `s` where `y = τ₂ s^p`.
/// The map concentrates nodes near `y = 0`, where `f_Y` peaks sharply when
/// the eavesdropper sees a strong relay signal.
fn gl_outage<F: Fn(f64) -> f64>(tau2: f64, nodes: usize, integrand: F) -> f64 {
    let p = GL_CLUSTER_POWER;
    let pf = f64::from(p);
    1.0 - gauss_legendre(nodes).integrate(0.0, 1.0, |s| {
        tau2 * pf * s.powi(p - 1) * integrand(tau2 * s.powi(p))
    })
}

/// `1 - ∫_0^{τ₂} Φ(z y + z - 1) f_Y(y) dy` by an `N_β`-node Gauss-Legendre
/// rule (see [`gl_outage`] for the node placement). The orthogonal-slot scheme has unbounded support and is integrated
/// adaptively instead.
pub fn sop_beta_quadrature(inp: &SopInputs) -> Result<Sop> {
    inp.validate()?;
    let m = BetaModel::new(inp);
    if m.lam == 0.0 {
        return sop_beta_semianalytic(inp);
    }
    let tau2 = m.tau2();
    if tau2 <= 0.0 {
        return Ok(Sop {
            value: 1.0,
            method: SopMethod::GaussLegendre,
        });
    }
    let v = gl_outage(tau2, inp.quad_nodes, |y| m.integrand(y));
    Ok(Sop {
        value: clamp_probability("sop_beta_quadrature", v)?,
        method: SopMethod::GaussLegendre,
    })
}

/// Geometric bin ratio and bin count of [`sop_beta_lower_bound`]; the bins
/// cover `[τ₂ r^{-n}, τ₂]`.
const LOWER_BOUND_RATIO: f64 = 1.5;
const LOWER_BOUND_BINS: i32 = 70;

/// Cheap lower bound on `P_sop,β`: the outage integral is replaced by its
/// upper Riemann-Stieltjes sum `Σ Φ(z yᵢ + z - 1) (F_Y(yᵢ₊₁) - F_Y(yᵢ))`
/// over geometric bins below `τ₂` plus `[0, y₀]`, which is valid because
/// `Φ` is non-increasing. Shifted down by [`CLAMP_SLACK`] so it also bounds
/// the quadrature value.
pub fn sop_beta_lower_bound(inp: &SopInputs) -> f64 {
    let m = BetaModel::new(inp);
    let tau2 = m.tau2();
    if tau2 <= 0.0 {
        return 1.0 - CLAMP_SLACK;
    }
    if !tau2.is_finite() {
        return (1.0 - m.phi(m.z - 1.0) - CLAMP_SLACK).clamp(0.0, 1.0);
    }
    let phi_at = |y: f64| m.phi(m.z * y + m.z - 1.0);
    let mut y = tau2 * LOWER_BOUND_RATIO.powi(-LOWER_BOUND_BINS);
    let mut s_prev = m.survival_y(y);
    let mut upper = phi_at(0.0) * (1.0 - s_prev);
    for _ in 0..LOWER_BOUND_BINS {
        let y_next = (y * LOWER_BOUND_RATIO).min(tau2);
        let s_next = m.survival_y(y_next);
        upper += phi_at(y) * (s_prev - s_next).max(0.0);
        s_prev = s_next;
        y = y_next;
    }
    (1.0 - upper - CLAMP_SLACK).clamp(0.0, 1.0)
}

/// `1 - ∫_0^{τ₂} Φ(z y + z - 1) f_Y(y) dy` by adaptive quadrature.
pub fn sop_beta_semianalytic(inp: &SopInputs) -> Result<Sop> {
    inp.validate()?;
    let m = BetaModel::new(inp);
    let tau2 = m.tau2();
    let value = if tau2 <= 0.0 {
        1.0
    } else {
        1.0 - integrate_graded(|y| m.integrand(y), tau2, SEMI_ANALYTIC_TOL)?
    };
    Ok(Sop {
        value: clamp_probability("sop_beta_semianalytic", value)?,
        method: SopMethod::SemiAnalytic,
    })
}

/// Gauss-Legendre evaluation with the published `φ`. Raw value.
pub fn sop_beta_as_printed(inp: &SopInputs) -> f64 {
    let m = BetaModel::new(inp);
    let tau2 = m.tau2();
    if tau2 <= 0.0 {
        return 1.0;
    }
    if !tau2.is_finite() {
        return f64::NAN;
    }
    gl_outage(tau2, inp.quad_nodes, |y| {
        m.phi_as_printed(m.z * y + m.z - 1.0) * m.pdf_y(y)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyReport {
    pub p_sop_alpha: f64,
    pub p_sop_beta: f64,
    pub p_sops: f64,
    pub method_alpha: SopMethod,
    pub method_beta: SopMethod,
}

/// Shipped analytic path.
pub fn analytic_report(inp: &SopInputs) -> Result<SecrecyReport> {
    let a = sop_alpha_closed(inp)?;
    let b = sop_beta_quadrature(inp)?;
    Ok(SecrecyReport {
        p_sop_alpha: a.value,
        p_sop_beta: b.value,
        p_sops: sops(a.value, b.value),
        method_alpha: a.method,
        method_beta: b.method,
    })
}
