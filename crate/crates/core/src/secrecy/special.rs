//! Exponential integrals.

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAXIT: usize = 10_000;

/// `E_n(x) = ∫_1^∞ e^{-xt} t^{-n} dt` multiplied by `e^x`.
///
/// Defined for `x > 0`, and for `x = 0` when `n >= 2`.
pub fn expn_scaled(n: usize, x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() || (x == 0.0 && n <= 1) {
        return Err(Error::InvalidArgument(format!("E_{n}({x}) is not defined")));
    }
    if n == 0 {
        return Ok(1.0 / x);
    }
    if x == 0.0 {
        return Ok(1.0 / (n - 1) as f64);
    }
    let nm1 = n - 1;
    if x > 1.0 {
        // Modified Lentz evaluation of the continued fraction.
        let mut b = x + n as f64;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAXIT {
            let an = -(i as f64) * (nm1 + i) as f64;
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                return Ok(h);
            }
        }
        return Err(Error::numerical("expn", "continued fraction did not converge"));
    }
    let mut ans = if nm1 != 0 {
        1.0 / nm1 as f64
    } else {
        -x.ln() - EULER_GAMMA
    };
    let mut fact = 1.0;
    for i in 1..MAXIT {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i as f64 - nm1 as f64)
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * EPS {
            return Ok(ans * x.exp());
        }
    }
    Err(Error::numerical("expn", "series did not converge"))
}

/// Generalised exponential integral `E_n(x)`.
pub fn expn(n: usize, x: f64) -> Result<f64> {
    let s = expn_scaled(n, x)?;
    Ok(if x > 700.0 {
        (s.ln() - x).exp()
    } else {
        s * (-x).exp()
    })
}

/// `E_1(x)` for `x > 0`. For `x < 0` returns the principal value `-Ei(-x)`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if x == 0.0 || x.is_nan() {
        return Err(Error::InvalidArgument(format!("E_1({x}) diverges")));
    }
    if x > 0.0 {
        expn(1, x)
    } else {
        Ok(-exp_integral_ei(-x)?)
    }
}

/// Principal-value exponential integral `Ei(x) = -PV ∫_{-x}^∞ e^{-t}/t dt`.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if x == 0.0 || x.is_nan() {
        return Err(Error::InvalidArgument(format!("Ei({x}) diverges")));
    }
    if x < 0.0 {
        return Ok(-expn(1, -x)?);
    }
    if x < FPMIN {
        return Ok(x.ln() + EULER_GAMMA);
    }
    if x <= -EPS.ln() {
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 1..MAXIT {
            fact *= x / k as f64;
            let term = fact / k as f64;
            sum += term;
            if term < EPS * sum {
                return Ok(sum + x.ln() + EULER_GAMMA);
            }
        }
        return Err(Error::numerical("ei", "series did not converge"));
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAXIT {
        let prev = term;
        term *= k as f64 / x;
        if term < EPS {
            break;
        }
        if term < prev {
            sum += term;
        } else {
            sum -= prev;
            break;
        }
    }
    Ok(x.exp() * (1.0 + sum) / x)
}

/// Two-argument form `∫_1^∞ e^{-xb} x^{-a} dx`, which equals `E_a(b)`.
pub fn exp_integral_two_arg(a: usize, b: f64) -> Result<f64> {
    expn(a, b)
}

/// `expm1(x) / x`, continuous at 0.
pub fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x / 2.0 + x * x / 6.0
    } else {
        x.exp_m1() / x
    }
}

/// Derivative of [`exprel`].
pub fn exprel_prime(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        0.5 + x / 3.0 + x * x / 8.0 + x * x * x / 30.0
    } else {
        (x.exp() * (x - 1.0) + 1.0) / (x * x)
    }
}

/// `ln(1 + x) / x`, continuous at 0.
pub fn log1prel(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x / 2.0 + x * x / 3.0
    } else {
        x.ln_1p() / x
    }
}

/// Derivative of [`log1prel`].
pub fn log1prel_prime(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        -0.5 + 2.0 * x / 3.0 - 0.75 * x * x + 0.8 * x * x * x
    } else {
        (x / (1.0 + x) - x.ln_1p()) / (x * x)
    }
}
