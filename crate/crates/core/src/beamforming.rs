//! Null-steering artificial-noise weights.
//!
//! In [`AnMode::Geometric`] the weight vector is the normalised projection of
//! `h_be` onto the orthogonal complement of the constraint columns (`h_bα`
//! and the self-interference path into the BS receive antenna). In
//! [`AnMode::Model`] the leakage takes its statistical value
//! `|wᴴh_be|^2 = H_be / (K - 1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelDraw;

/// Relative rank tolerance of the Gram-Schmidt factorisation.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnMode {
    #[default]
    Model,
    Geometric,
    /// No artificial noise is transmitted.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnWeights {
    pub w: Vec<Complex64>,
    /// `|wᴴh_be|^2`.
    pub leakage: f64,
    pub mode: AnMode,
    /// Set when `h_be` lies in the constraint span; `w` is then zero.
    pub degenerate: bool,
}

/// `aᴴ b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis of the span of `columns` by modified Gram-Schmidt with
/// one re-orthogonalisation pass. Columns whose residual falls below
/// `RANK_TOL` times the largest column norm are dropped.
pub fn orthonormal_basis(columns: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let scale = columns.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    if scale == 0.0 {
        return basis;
    }
    for col in columns {
        let mut v = col.clone();
        for _ in 0..2 {
            for q in &basis {
                let p = inner(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= p * qi);
            }
        }
        let n = norm(&v);
        if n > RANK_TOL * scale {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

/// `Λ x` where `Λ` projects onto the orthogonal complement of `columns`.
pub fn project_out(columns: &[Vec<Complex64>], x: &[Complex64]) -> Vec<Complex64> {
    let basis = orthonormal_basis(columns);
    let mut v = x.to_vec();
    for _ in 0..2 {
        for q in &basis {
            let p = inner(q, &v);
            v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= p * qi);
        }
    }
    v
}

/// Maximises `|wᴴh_be|^2` subject to `wᴴc = 0` for every constraint column
/// and `‖w‖ <= 1`.
pub fn null_steer(constraints: &[Vec<Complex64>], h_be: &[Complex64]) -> AnWeights {
    let v = project_out(constraints, h_be);
    let n = norm(&v);
    let scale = norm(h_be);
    if n <= RANK_TOL * scale || n == 0.0 {
        return AnWeights {
            w: vec![Complex64::new(0.0, 0.0); h_be.len()],
            leakage: 0.0,
            mode: AnMode::Geometric,
            degenerate: true,
        };
    }
    let w: Vec<Complex64> = v.iter().map(|x| x / n).collect();
    let leakage = inner(&w, h_be).norm_sqr();
    AnWeights {
        w,
        leakage,
        mode: AnMode::Geometric,
        degenerate: false,
    }
}

/// Geometric-mode weights for one draw: nulls `h_bα` and column 0 of `h_bb`.
pub fn solve_an_weights(draw: &ChannelDraw) -> AnWeights {
    let constraints = [draw.h_b_alpha.clone(), draw.h_bb_column(0)];
    null_steer(&constraints, &draw.h_b_e)
}

/// Statistical leakage `H_be / (K - 1)`.
pub fn an_leakage_model(draw: &ChannelDraw, k_antennas: usize) -> f64 {
    draw.h_be_energy() / (k_antennas - 1) as f64
}

/// `|wᴴh_be|^2` for the requested mode.
pub fn leakage(draw: &ChannelDraw, k_antennas: usize, mode: AnMode) -> f64 {
    match mode {
        AnMode::Model => an_leakage_model(draw, k_antennas),
        AnMode::Geometric => solve_an_weights(draw).leakage,
        AnMode::Off => 0.0,
    }
}
