//! Jacobi theta function `θ3(e^{-t})` and its derivatives in `t`.
//!
//! For `t >= π` the defining series `Σ_j e^{-j² t}` is summed directly. Below
//! the switch point the modular identity
//! `θ3(e^{-t}) = sqrt(π/t) θ3(e^{-π²/t})` is used instead; its derivatives are
//! assembled analytically with the Leibniz rule. Either way at most a handful
//! of terms are needed for full double precision.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Argument at which evaluation switches from the direct to the transformed series.
pub const MODULAR_SWITCH: f64 = PI;

/// Highest derivative order supported.
pub const MAX_DERIVATIVE: usize = 4;

const TERM_CUTOFF: f64 = 1e-18;
const MAX_TERMS: usize = 10_000;

fn check_argument(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("theta argument must be positive and finite, got {t}")));
    }
    Ok(())
}

/// `Σ_{j∈Z} (-j²)^n e^{-j² t}` for `n = 0..=MAX_DERIVATIVE`, summed directly.
///
/// Only accurate and cheap for moderately large `t`; callers below
/// [`MODULAR_SWITCH`] should go through the transformed form.
pub fn direct_derivatives(t: f64) -> [f64; MAX_DERIVATIVE + 1] {
    let mut out = [1.0, 0.0, 0.0, 0.0, 0.0];
    for j in 1..MAX_TERMS {
        let j2 = (j * j) as f64;
        let e = (-j2 * t).exp();
        let mut p = 2.0 * e;
        let mut done = true;
        for (n, slot) in out.iter_mut().enumerate() {
            if n > 0 {
                p *= -j2;
            }
            *slot += p;
            if p.abs() > TERM_CUTOFF * slot.abs() {
                done = false;
            }
        }
        if done && j2 * t > MAX_DERIVATIVE as f64 {
            break;
        }
    }
    out
}

/// `φ(t) = θ3(e^{-t}) - 1 = 2 Σ_{j≥1} e^{-j² t}`, summed directly.
pub fn direct_tail(t: f64) -> f64 {
    let mut sum = 0.0;
    for j in 1..MAX_TERMS {
        let term = 2.0 * (-((j * j) as f64) * t).exp();
        sum += term;
        if term <= TERM_CUTOFF * sum || term == 0.0 {
            break;
        }
    }
    sum
}

/// Derivatives `dⁿ/dtⁿ` of `h(t) = Σ_j e^{-j² π²/t}` for `n = 0..=4`.
///
/// For each `j` the derivative of `e^{-c/t}` is `e^{-c/t} q_n(1/t)` with
/// `q_0 = 1` and `q_{n+1}(s) = -s² q_n'(s) + c s² q_n(s)`.
fn transformed_inner_derivatives(t: f64) -> [f64; MAX_DERIVATIVE + 1] {
    let s = 1.0 / t;
    let mut out = [1.0, 0.0, 0.0, 0.0, 0.0];
    for j in 1..MAX_TERMS {
        let c = (j * j) as f64 * PI * PI;
        let e = (-c * s).exp();
        if e == 0.0 {
            break;
        }
        // q[n][p]: coefficient of s^p in q_n, p <= 2n.
        let mut q = [[0.0_f64; 2 * MAX_DERIVATIVE + 1]; MAX_DERIVATIVE + 1];
        q[0][0] = 1.0;
        for n in 0..MAX_DERIVATIVE {
            for p in 0..=(2 * n) {
                let a = q[n][p];
                if a == 0.0 {
                    continue;
                }
                q[n + 1][p + 1] -= p as f64 * a;
                q[n + 1][p + 2] += c * a;
            }
        }
        let mut done = true;
        for n in 0..=MAX_DERIVATIVE {
            let poly = q[n].iter().rev().fold(0.0, |acc, &a| acc * s + a);
            let term = 2.0 * e * poly;
            out[n] += term;
            if term.abs() > TERM_CUTOFF * out[n].abs() {
                done = false;
            }
        }
        if done && c * s > 2.0 * MAX_DERIVATIVE as f64 {
            break;
        }
    }
    out
}

/// Derivatives of `θ3(e^{-t})` for `t < π` via the Leibniz rule applied to
/// `sqrt(π) t^{-1/2} · h(t)`.
fn transformed_derivatives(t: f64) -> [f64; MAX_DERIVATIVE + 1] {
    let h = transformed_inner_derivatives(t);
    // g^{(k)} = sqrt(π) (-1/2)(-3/2)...(-1/2-k+1) t^{-1/2-k}
    let mut g = [0.0; MAX_DERIVATIVE + 1];
    let mut coef = PI.sqrt();
    for (k, slot) in g.iter_mut().enumerate() {
        *slot = coef * t.powf(-0.5 - k as f64);
        coef *= -0.5 - k as f64;
    }
    let mut out = [0.0; MAX_DERIVATIVE + 1];
    for n in 0..=MAX_DERIVATIVE {
        let mut binom = 1.0;
        for k in 0..=n {
            out[n] += binom * g[k] * h[n - k];
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
    }
    out
}

/// All derivatives `θ3^{(n)}(t)`, `n = 0..=4`, choosing the representation by `t`.
pub fn theta3_derivatives(t: f64) -> Result<[f64; MAX_DERIVATIVE + 1]> {
    check_argument(t)?;
    Ok(if t >= MODULAR_SWITCH { direct_derivatives(t) } else { transformed_derivatives(t) })
}

/// `θ3(e^{-t}) = Σ_{j∈Z} e^{-j² t}`.
pub fn theta3(t: f64) -> Result<f64> {
    check_argument(t)?;
    Ok(if t >= MODULAR_SWITCH {
        1.0 + direct_tail(t)
    } else {
        (PI / t).sqrt() * (1.0 + direct_tail(PI * PI / t))
    })
}

/// `dⁿ/dtⁿ θ3(e^{-t}) = Σ_j (-j²)ⁿ e^{-j² t}` for `0 <= n <= 4`.
pub fn theta3_deriv(t: f64, n: usize) -> Result<f64> {
    if n > MAX_DERIVATIVE {
        return Err(Error::Domain(format!("theta derivative order {n} exceeds {MAX_DERIVATIVE}")));
    }
    if n == 0 {
        return theta3(t);
    }
    Ok(theta3_derivatives(t)?[n])
}

/// Theta value and derivatives at a single argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEval {
    pub t: f64,
    pub values: Vec<f64>,
}

impl ThetaEval {
    pub fn new(t: f64, max_order: usize) -> Result<Self> {
        if max_order > MAX_DERIVATIVE {
            return Err(Error::Domain(format!("theta derivative order {max_order} exceeds {MAX_DERIVATIVE}")));
        }
        let mut d = theta3_derivatives(t)?;
        d[0] = theta3(t)?;
        Ok(ThetaEval { t, values: d[..=max_order].to_vec() })
    }

    /// `t θ θ' + t² θ θ'' − t² (θ')²`; see [`curvature_bracket`].
    pub fn curvature_bracket(&self) -> f64 {
        curvature_bracket(self.t)
    }
}

fn curvature_bracket_direct(t: f64) -> f64 {
    let v = direct_derivatives(t);
    t * v[0] * v[1] + t * t * v[0] * v[2] - t * t * v[1] * v[1]
}

/// `t θ θ' + t² θ θ'' − t² (θ')²`, positive for every `t > 0`.
///
/// The three terms cancel to an exponentially small remainder as `t → 0`, so
/// below the switch point the bracket is evaluated through the exact identity
/// `B(t) = (π/t) B(π²/t)` inherited from the theta product.
pub fn curvature_bracket(t: f64) -> f64 {
    if t >= MODULAR_SWITCH {
        curvature_bracket_direct(t)
    } else {
        PI / t * curvature_bracket_direct(PI * PI / t)
    }
}
