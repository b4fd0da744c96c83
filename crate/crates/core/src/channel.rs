//! Quasi-static Rayleigh channels, link distances and gain distributions.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::params::{LinkLabel, SystemParams};
use crate::rng;

/// One channel realisation for a (center, edge, eavesdropper) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub h_beta_alpha: Complex64,
    pub h_alpha_b: Complex64,
    pub h_beta_e: Complex64,
    pub h_alpha_e: Complex64,
    pub h_alpha_alpha: Complex64,
    /// BS transmit antennas to the relay, length `K - 1`.
    pub h_b_alpha: Vec<Complex64>,
    /// BS transmit antennas to the eavesdropper, length `K - 1`.
    pub h_b_e: Vec<Complex64>,
    /// BS self-interference, row-major `(K - 1) x (K - 1)`.
    pub h_bb: Vec<Complex64>,
}

impl ChannelDraw {
    pub fn an_antennas(&self) -> usize {
        self.h_b_e.len()
    }

    /// Column `j` of the self-interference matrix.
    pub fn h_bb_column(&self, j: usize) -> Vec<Complex64> {
        let n = self.an_antennas();
        (0..n).map(|i| self.h_bb[i * n + j]).collect()
    }

    /// `H_be = sum_k |h_be,k|^2`.
    pub fn h_be_energy(&self) -> f64 {
        self.h_b_e.iter().map(|h| h.norm_sqr()).sum()
    }
}

/// `CN(0, variance)` sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `|h|^2` for `h ~ CN(0, variance)`, i.e. an exponential with mean `variance`.
pub fn gain_sample<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> f64 {
    complex_gaussian(rng, variance).norm_sqr()
}

pub fn sample_channels<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ChannelDraw {
    let n = params.bs_antennas - 1;
    let var = |l| params.variance(l);
    let h_beta_alpha = complex_gaussian(rng, var(LinkLabel::BetaAlpha));
    let h_alpha_b = complex_gaussian(rng, var(LinkLabel::AlphaB));
    let h_beta_e = complex_gaussian(rng, var(LinkLabel::BetaE));
    let h_alpha_e = complex_gaussian(rng, var(LinkLabel::AlphaE));
    let h_alpha_alpha = complex_gaussian(rng, var(LinkLabel::AlphaAlpha));
    let h_b_alpha = (0..n)
        .map(|_| complex_gaussian(rng, var(LinkLabel::BAlpha)))
        .collect();
    let h_b_e = (0..n)
        .map(|_| complex_gaussian(rng, var(LinkLabel::Be)))
        .collect();
    let h_bb = (0..n * n)
        .map(|_| complex_gaussian(rng, var(LinkLabel::Bb)))
        .collect();
    ChannelDraw {
        h_beta_alpha,
        h_alpha_b,
        h_beta_e,
        h_alpha_e,
        h_alpha_alpha,
        h_b_alpha,
        h_b_e,
        h_bb,
    }
}

pub fn draw_channels(params: &SystemParams, seed: u64) -> ChannelDraw {
    sample_channels(params, &mut rng::stream(seed, 0))
}

/// Distances for one pair and the eavesdropper, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub d_beta_alpha: f64,
    pub d_alpha_b: f64,
    pub d_beta_e: f64,
    pub d_alpha_e: f64,
    pub d_b_e: f64,
}

impl LinkGeometry {
    /// Road positions `l` of the relay, the edge vehicle and the eavesdropper.
    /// Vehicle-to-vehicle distances are clamped below at the configured minimum.
    pub fn from_positions(l_alpha: f64, l_beta: f64, l_e: f64, params: &SystemParams) -> Self {
        let h = params.bs_height_m;
        let dmin = params.min_link_distance_m;
        let road = |a: f64, b: f64| (a - b).abs().max(dmin);
        Self {
            d_beta_alpha: road(l_beta, l_alpha),
            d_alpha_b: l_alpha.hypot(h),
            d_beta_e: road(l_beta, l_e),
            d_alpha_e: road(l_alpha, l_e),
            d_b_e: l_e.hypot(h),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("d_beta_alpha", self.d_beta_alpha),
            ("d_alpha_b", self.d_alpha_b),
            ("d_beta_e", self.d_beta_e),
            ("d_alpha_e", self.d_alpha_e),
            ("d_b_e", self.d_b_e),
        ];
        for (field, d) in all {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::invalid(field, format!("distance must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

/// `d^-v`.
pub fn path_loss(d: f64, v: f64) -> f64 {
    d.powf(-v)
}

/// `|h|^2 d^-v`.
pub fn effective_gain(h: Complex64, d: f64, v: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidArgument(format!("distance must be positive, got {d}")));
    }
    Ok(h.norm_sqr() * path_loss(d, v))
}

pub fn gain_cdf_exponential(x: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-rate * x).exp_m1()
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Erlang density with integer `shape >= 1`.
pub fn erlang_pdf(x: f64, shape: usize, rate: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::InvalidArgument(format!("erlang_pdf needs x >= 0, got {x}")));
    }
    if shape == 0 || !(rate > 0.0) {
        return Err(Error::InvalidArgument("erlang_pdf needs shape >= 1 and rate > 0".into()));
    }
    let k = shape as f64;
    if x == 0.0 {
        return Ok(if shape == 1 { rate } else { 0.0 });
    }
    Ok((k * rate.ln() + (k - 1.0) * x.ln() - rate * x - ln_factorial(shape - 1)).exp())
}

pub fn erlang_cdf(x: f64, shape: usize, rate: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let t = rate * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..shape {
        term *= t / n as f64;
        sum += term;
    }
    (1.0 - (-t).exp() * sum).clamp(0.0, 1.0)
}
