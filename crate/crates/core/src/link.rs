//! SINRs, achievable and secure rates, and the task delay model.

use serde::{Deserialize, Serialize};

use crate::beamforming::{self, AnMode};
use crate::channel::{path_loss, ChannelDraw, LinkGeometry};
use crate::params::SystemParams;

/// How the relay forwards `x_β` alongside its own `x_α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessScheme {
    /// Superposition with power split `λ` (own) / `1 - λ` (forwarded).
    #[default]
    Noma,
    /// Two equal orthogonal slots, each at full relay power; rates carry a
    /// prelog of 1/2.
    Oma,
}

impl AccessScheme {
    pub fn prelog(self) -> f64 {
        match self {
            AccessScheme::Noma => 1.0,
            AccessScheme::Oma => 0.5,
        }
    }

    /// Effective power ratios `(λ_α, λ_β)` applied to the `α` and `β` SINRs.
    pub fn effective_lambdas(self, lambda: f64) -> (f64, f64) {
        match self {
            AccessScheme::Noma => (lambda, lambda),
            AccessScheme::Oma => (1.0, 0.0),
        }
    }
}

/// Powers in watts, resolved once per parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConstants {
    pub p_alpha: f64,
    pub p_beta: f64,
    pub p_si: f64,
    pub noise: f64,
    /// Total AN power `P_B`.
    pub p_an: f64,
    /// Per-antenna AN power `P_b = P_B / (K - 1)`.
    pub p_an_per_antenna: f64,
    pub path_loss_exp: f64,
}

impl LinkConstants {
    pub fn new(params: &SystemParams) -> Self {
        Self {
            p_alpha: params.p_center_w(),
            p_beta: params.p_edge_w(),
            p_si: params.p_si_w(),
            noise: params.noise_power(),
            p_an: params.p_an_w(),
            p_an_per_antenna: params.p_an_per_antenna_w(),
            path_loss_exp: params.path_loss_exp,
        }
    }
}

/// Path-loss-weighted gains of one realisation plus the AN power received
/// by the eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkGains {
    pub g_beta_alpha: f64,
    pub g_alpha_b: f64,
    pub g_beta_e: f64,
    pub g_alpha_e: f64,
    /// `|h_αα|^2` (no path loss).
    pub h_alpha_alpha_sq: f64,
    /// `P_B d_be^-v |wᴴh_be|^2` in watts.
    pub jamming_w: f64,
}

impl LinkGains {
    pub fn from_draw(
        draw: &ChannelDraw,
        geometry: &LinkGeometry,
        consts: &LinkConstants,
        mode: AnMode,
    ) -> Self {
        let v = consts.path_loss_exp;
        let k = draw.an_antennas() + 1;
        let jamming_w = match mode {
            AnMode::Off => 0.0,
            _ => {
                consts.p_an
                    * path_loss(geometry.d_b_e, v)
                    * beamforming::leakage(draw, k, mode)
            }
        };
        Self {
            g_beta_alpha: draw.h_beta_alpha.norm_sqr() * path_loss(geometry.d_beta_alpha, v),
            g_alpha_b: draw.h_alpha_b.norm_sqr() * path_loss(geometry.d_alpha_b, v),
            g_beta_e: draw.h_beta_e.norm_sqr() * path_loss(geometry.d_beta_e, v),
            g_alpha_e: draw.h_alpha_e.norm_sqr() * path_loss(geometry.d_alpha_e, v),
            h_alpha_alpha_sq: draw.h_alpha_alpha.norm_sqr(),
            jamming_w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sinrs {
    pub r_beta_alpha: f64,
    pub r_beta_b: f64,
    pub r_alpha_b: f64,
    pub r_beta_e: f64,
    pub r_alpha_e: f64,
}

pub fn compute_sinrs(
    gains: &LinkGains,
    lambda: f64,
    scheme: AccessScheme,
    consts: &LinkConstants,
) -> Sinrs {
    let n = consts.noise;
    let pa = consts.p_alpha;
    let (la, lb) = scheme.effective_lambdas(lambda);
    let j = gains.jamming_w;
    let r_beta_alpha =
        consts.p_beta * gains.g_beta_alpha / (consts.p_si * gains.h_alpha_alpha_sq + n);
    let r_beta_b = (1.0 - lb) * pa * gains.g_alpha_b / (lb * pa * gains.g_alpha_b + n);
    let r_alpha_b = la * pa * gains.g_alpha_b / n;
    let r_beta_e = (consts.p_beta * gains.g_beta_e + (1.0 - lb) * pa * gains.g_alpha_e)
        / (lb * pa * gains.g_alpha_e + j + n);
    let r_alpha_e = la * pa * gains.g_alpha_e / (j + n);
    Sinrs {
        r_beta_alpha,
        r_beta_b,
        r_alpha_b,
        r_beta_e,
        r_alpha_e,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkReport {
    pub sinr: Sinrs,
    pub prelog: f64,
    pub rate_beta_alpha: f64,
    pub rate_beta_b: f64,
    pub rate_alpha_b: f64,
    pub rate_beta_e: f64,
    pub rate_alpha_e: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub c_beta_alpha: f64,
    pub c_beta_b: f64,
}

impl LinkReport {
    /// End-to-end legitimate rate of `V_β`.
    pub fn rate_beta(&self) -> f64 {
        self.rate_beta_alpha.min(self.rate_beta_b)
    }
}

pub fn rate(prelog: f64, sinr: f64) -> f64 {
    prelog * sinr.log2_1p()
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

pub fn secure_rates(sinr: Sinrs, scheme: AccessScheme) -> LinkReport {
    let pl = scheme.prelog();
    let rate_beta_alpha = rate(pl, sinr.r_beta_alpha);
    let rate_beta_b = rate(pl, sinr.r_beta_b);
    let rate_alpha_b = rate(pl, sinr.r_alpha_b);
    let rate_beta_e = rate(pl, sinr.r_beta_e);
    let rate_alpha_e = rate(pl, sinr.r_alpha_e);
    let pos = |x: f64| x.max(0.0);
    let c_beta_alpha = pos(rate_beta_alpha - rate_beta_e);
    let c_beta_b = pos(rate_beta_b - rate_beta_e);
    LinkReport {
        sinr,
        prelog: pl,
        rate_beta_alpha,
        rate_beta_b,
        rate_alpha_b,
        rate_beta_e,
        rate_alpha_e,
        c_alpha: pos(rate_alpha_b - rate_alpha_e),
        c_beta: c_beta_alpha.min(c_beta_b),
        c_beta_alpha,
        c_beta_b,
    }
}

pub fn link_report(
    gains: &LinkGains,
    lambda: f64,
    scheme: AccessScheme,
    consts: &LinkConstants,
) -> LinkReport {
    secure_rates(compute_sinrs(gains, lambda, scheme, consts), scheme)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffloadPlan {
    pub lambda: f64,
    /// Tasks kept local by `V_α`.
    pub m_alpha: usize,
    /// Tasks kept local by `V_β`.
    pub m_beta: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DelayReport {
    pub d_local_alpha: f64,
    pub d_local_beta: f64,
    pub d_off_alpha: f64,
    pub d_off_beta_alpha: f64,
    pub d_off_beta_b: f64,
    pub d_exe_alpha: f64,
    pub d_exe_beta: f64,
    pub d_mec_alpha: f64,
    pub d_mec_beta_alpha: f64,
    pub d_mec_beta_b: f64,
    pub d_beta: f64,
    pub d_alpha: f64,
}

/// Task timing constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskModel {
    pub m_tasks: usize,
    pub cycles_per_bit: f64,
    pub task_bits: f64,
    pub f_local_hz: f64,
    pub f_mec_hz: f64,
    pub bandwidth_hz: f64,
}

impl TaskModel {
    pub fn new(params: &SystemParams) -> Self {
        Self {
            m_tasks: params.m_tasks,
            cycles_per_bit: params.cycles_per_bit,
            task_bits: params.task_bits,
            f_local_hz: params.f_local_hz,
            f_mec_hz: params.f_mec_hz,
            bandwidth_hz: params.bandwidth_hz,
        }
    }

    pub fn local(&self, m: usize) -> f64 {
        m as f64 * self.cycles_per_bit * self.task_bits / self.f_local_hz
    }

    /// `+inf` when tasks remain and the secure rate is zero.
    pub fn offload(&self, m: usize, secure_rate: f64) -> f64 {
        let n = self.m_tasks.saturating_sub(m);
        if n == 0 {
            0.0
        } else if secure_rate <= 0.0 {
            f64::INFINITY
        } else {
            n as f64 * self.task_bits / (self.bandwidth_hz * secure_rate)
        }
    }

    pub fn execute(&self, m: usize) -> f64 {
        self.m_tasks.saturating_sub(m) as f64 * self.cycles_per_bit * self.task_bits / self.f_mec_hz
    }

    /// `D_β` alone, without building the full report.
    pub fn d_beta(&self, m_beta: usize, c_beta_alpha: f64, c_beta_b: f64) -> f64 {
        let exe = self.execute(m_beta);
        let c = c_beta_alpha.min(c_beta_b);
        self.local(m_beta).max(self.offload(m_beta, c) + exe)
    }
}

pub fn delays(plan: &OffloadPlan, report: &LinkReport, tasks: &TaskModel) -> DelayReport {
    let d_local_alpha = tasks.local(plan.m_alpha);
    let d_local_beta = tasks.local(plan.m_beta);
    let d_off_alpha = tasks.offload(plan.m_alpha, report.c_alpha);
    let d_off_beta_alpha = tasks.offload(plan.m_beta, report.c_beta_alpha);
    let d_off_beta_b = tasks.offload(plan.m_beta, report.c_beta_b);
    let d_exe_alpha = tasks.execute(plan.m_alpha);
    let d_exe_beta = tasks.execute(plan.m_beta);
    let d_mec_alpha = d_off_alpha + d_exe_alpha;
    let d_mec_beta_alpha = d_off_beta_alpha + d_exe_beta;
    let d_mec_beta_b = d_off_beta_b + d_exe_beta;
    DelayReport {
        d_local_alpha,
        d_local_beta,
        d_off_alpha,
        d_off_beta_alpha,
        d_off_beta_b,
        d_exe_alpha,
        d_exe_beta,
        d_mec_alpha,
        d_mec_beta_alpha,
        d_mec_beta_b,
        d_beta: d_local_beta.max(d_mec_beta_alpha.max(d_mec_beta_b)),
        d_alpha: d_local_alpha.max(d_mec_alpha),
    }
}
