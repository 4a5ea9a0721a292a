//! Lattice energy per particle of the rectangular lattice
//! `√A [Z(Δ^{-1/2}, 0) ⊕ Z(0, Δ^{1/2})]`, `Δ = e^ε`.
//!
//! The energy is evaluated from the theta-function representation
//! `E = ½ ∫₀^∞ [P(t, ε) − 1] ρ_f(t/A) dt/A` with the theta product
//! `P(t, ε) = θ3(e^{-t e^{-ε}}) θ3(e^{-t e^{ε}})`.
//!
//! The product obeys `P(t, ε) = (π/t) P(π²/t, ε)` exactly. Below the split
//! point the integrand is rewritten through this identity and the variable
//! `u = π²/t`, so every theta series is summed at arguments `u ≥ π` where a
//! few terms suffice, and the only non-decaying pieces (`π/t − 1`, and the
//! background term `π/t` for a Coulomb tail) are integrated in closed form.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::potential::{Family, PotentialSpec};
use crate::quadrature::{integrate, Integral, Interval, QuadratureConfig};
use crate::theta::direct_tail;

/// Inverse density and log aspect ratio of a rectangular lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeState {
    pub area: f64,
    pub eps: f64,
}

impl LatticeState {
    pub fn new(area: f64, eps: f64) -> Result<Self> {
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::Domain(format!("inverse density A must be positive, got {area}")));
        }
        if !eps.is_finite() {
            return Err(Error::Domain(format!("log aspect ratio must be finite, got {eps}")));
        }
        Ok(LatticeState { area, eps })
    }

    pub fn from_delta(area: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Domain(format!("aspect ratio must be positive, got {delta}")));
        }
        Self::new(area, delta.ln())
    }

    pub fn square(area: f64) -> Result<Self> {
        Self::new(area, 0.0)
    }

    pub fn delta(&self) -> f64 {
        self.eps.exp()
    }

    /// Representative on the branch `ε ≥ 0`.
    pub fn canonical(&self) -> Self {
        LatticeState { area: self.area, eps: self.eps.abs() }
    }
}

/// `P(u, ε) − 1` from the direct series (`u` large enough for fast decay).
pub(crate) fn product_tail(u: f64, eps: f64) -> f64 {
    let a = direct_tail(u * (-eps).exp());
    let b = direct_tail(u * eps.exp());
    a + b + a * b
}

/// `P(u, ε) − P(u, 0)` without cancellation for small `ε`.
///
/// With `φ = θ3 − 1`, `α = φ(u e^{-ε}) − φ(u)`, `β = φ(u e^{ε}) − φ(u)`, the
/// difference is `(1 + φ(u))(α + β) + αβ`. The sum `α + β` is formed termwise
/// from `expm1(x + y) − expm1(x) expm1(y)`, where `x + y = −j² u · 4 sinh²(ε/2)`
/// carries no first-order cancellation.
pub(crate) fn product_shift(u: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    if eps.abs() > 0.5 {
        return product_tail(u, eps) - product_tail(u, 0.0);
    }
    let em = (-eps).exp_m1();
    let ep = eps.exp_m1();
    let sh = (0.5 * eps).sinh();
    let even = 4.0 * sh * sh;
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut sum = 0.0;
    for j in 1..10_000u32 {
        let j2u = (j * j) as f64 * u;
        let base = (-j2u).exp();
        if base == 0.0 {
            break;
        }
        let x = -j2u * em;
        let y = -j2u * ep;
        let ex = x.exp_m1();
        let ey = y.exp_m1();
        alpha += 2.0 * base * ex;
        beta += 2.0 * base * ey;
        let term = 2.0 * base * ((-j2u * even).exp_m1() - ex * ey);
        sum += term;
        // e^{-j² u e^{-|ε|}} bounds every remaining term
        if (-j2u * (-eps.abs()).exp()).exp() < 1e-18 * sum.abs() || term == 0.0 {
            break;
        }
    }
    (1.0 + direct_tail(u)) * sum + alpha * beta
}

/// Integration panels covering `[min(s, π²/s), ∞)`.
pub(crate) fn modular_panels(split: f64) -> Vec<Interval> {
    let lo = split.min(PI * PI / split);
    let hi = split.max(PI * PI / split);
    let mut panels = Vec::new();
    if hi > lo * (1.0 + 1e-15) {
        panels.push(Interval::Finite(lo, hi));
    }
    let mut a = hi;
    for _ in 0..6 {
        panels.push(Interval::Finite(a, 2.0 * a));
        a *= 2.0;
    }
    panels.push(Interval::ToInfinity(a));
    panels
}

/// Weight multiplying a modular-invariant bracket `F(u)`, combining the
/// direct branch (`u ≥ s`) with the image of `t ∈ (0, s)` under `u = π²/t`.
#[inline]
pub(crate) fn modular_weight<W: Fn(f64) -> f64>(u: f64, split: f64, weight: &W) -> f64 {
    let mut w = 0.0;
    if u >= split {
        w += weight(u);
    }
    if u >= PI * PI / split {
        w += PI / u * weight(PI * PI / u);
    }
    w
}

/// `∫₀^∞ F(t) w(t) dt` for brackets with `F(t) = (π/t) F(π²/t)`, where `bracket`
/// returns `F(u)` for `u ≥ min(s, π²/s)`.
pub(crate) fn modular_integral<const N: usize, B, W>(
    mut bracket: B,
    weight: W,
    q: &QuadratureConfig,
) -> Result<Integral<N>>
where
    B: FnMut(f64) -> [f64; N],
    W: Fn(f64) -> f64,
{
    let split = q.split_point;
    let f = |u: f64| {
        let w = modular_weight(u, split, &weight);
        if w == 0.0 {
            return [0.0; N];
        }
        let mut v = bracket(u);
        for c in v.iter_mut() {
            *c *= w;
        }
        v
    };
    integrate(f, &modular_panels(split), q)
}

/// `t ↦ ρ_f(t/A)/A`, the measure density in the theta variable.
pub(crate) fn scaled_density(spec: &PotentialSpec, area: f64) -> impl Fn(f64) -> f64 + '_ {
    move |t| spec.density(t / area) / area
}

/// Closed-form part of the energy integral: `∫₀^s (π/t − 1) ρ(t/A) dt/A`, plus
/// the background subtraction `−∫₀^∞ (π/t) ρ_C(t/A) dt/A` of a Coulomb tail.
fn analytic_remainder(spec: &PotentialSpec, area: f64, split: f64) -> Result<f64> {
    if let Some(s) = spec.riesz_exponent() {
        let sigma = s / 2.0;
        if (sigma - 1.0).abs() < 1e-12 {
            return Err(Error::Domain(
                "Riesz energy diverges at s = 2 (no regularized value)".into(),
            ));
        }
        let pref = area.powf(-sigma) / libm::tgamma(sigma);
        return Ok(pref * (PI * split.powf(sigma - 1.0) / (sigma - 1.0) - split.powf(sigma) / sigma));
    }
    let norm = 1.0 / (PI * area).sqrt();
    let mut total = 0.0;
    for term in spec.yukawa_terms() {
        if term.kappa == 0.0 {
            // bracket P − 1 − π/t: −∫₀^s ρ and −∫_s^∞ (π/t) ρ
            total -= term.v * norm * (2.0 * split.sqrt() + 2.0 * PI / split.sqrt());
            continue;
        }
        let c = term.kappa * term.kappa * area / 4.0;
        let x = (c / split).sqrt();
        let erfc = libm::erfc(x);
        // ∫₀^s t^{-3/2} e^{-c/t} dt and ∫₀^s t^{-1/2} e^{-c/t} dt
        let i32 = (PI / c).sqrt() * erfc;
        let i12 = 2.0 * split.sqrt() * (-c / split).exp() - 2.0 * (PI * c).sqrt() * erfc;
        total += term.v * norm * (PI * i32 - i12);
    }
    Ok(total)
}

/// Lattice energy per particle `E(A, e^ε)`.
pub fn lattice_energy(spec: &PotentialSpec, state: LatticeState, q: &QuadratureConfig) -> Result<f64> {
    let state = LatticeState::new(state.area, state.eps)?.canonical();
    let eps = state.eps;
    let weight = scaled_density(spec, state.area);
    let integral = modular_integral(|u| [product_tail(u, eps)], weight, q)?;
    let remainder = analytic_remainder(spec, state.area, q.split_point)?;
    Ok(0.5 * (integral.value[0] + remainder))
}

/// `E(A, e^ε) − E(A, 1)`, integrated directly from the product difference.
pub fn energy_difference(spec: &PotentialSpec, area: f64, eps: f64, q: &QuadratureConfig) -> Result<f64> {
    let state = LatticeState::new(area, eps)?.canonical();
    let weight = scaled_density(spec, state.area);
    let integral = modular_integral(|u| [product_shift(u, state.eps)], weight, q)?;
    Ok(0.5 * integral.value[0])
}

/// Energy landscape `ε ↦ E(A, e^ε) − E(A, 1)` at fixed `A`, evaluated with a
/// fixed composite rule, which makes it a smooth function of `ε`.
#[derive(Debug, Clone)]
pub struct EnergyProfile {
    pub area: f64,
    nodes: Vec<(f64, f64)>,
}

/// Log aspect ratios used to adapt the profile's quadrature rule.
const PROFILE_PROBES: [f64; 4] = [0.01, 0.1, 0.4, 1.4];

impl EnergyProfile {
    pub fn new(spec: &PotentialSpec, area: f64, q: &QuadratureConfig) -> Result<Self> {
        LatticeState::new(area, 0.0)?;
        let weight = scaled_density(spec, area);
        let integral = modular_integral(
            |u| PROFILE_PROBES.map(|e| product_shift(u, e)),
            &weight,
            q,
        )?;
        let split = q.split_point;
        let nodes = integral.partition.nodes()
            .into_iter()
            .map(|(u, w)| (u, w * modular_weight(u, split, &weight)))
            .filter(|&(_, w)| w != 0.0)
            .collect();
        Ok(EnergyProfile { area, nodes })
    }

    /// `E(A, e^ε) − E(A, 1)`.
    pub fn delta(&self, eps: f64) -> f64 {
        let eps = eps.abs();
        0.5 * self.nodes.iter().map(|&(u, w)| w * product_shift(u, eps)).sum::<f64>()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Brute-force lattice sum `½ Σ' f(√(A (j²/Δ + k² Δ)))` over square shells,
/// truncated once the tail bound of all remaining shells drops below `cutoff_tol`.
pub fn direct_lattice_sum(spec: &PotentialSpec, state: LatticeState, cutoff_tol: f64) -> Result<f64> {
    let state = LatticeState::new(state.area, state.eps)?;
    if !(cutoff_tol > 0.0) {
        return Err(Error::Domain(format!("cutoff tolerance must be positive, got {cutoff_tol}")));
    }
    let (area, delta) = (state.area, state.delta());
    let rho = (area * delta.min(1.0 / delta)).sqrt();
    // tail bound of shells m, m+1, ... given |f(r)| ≤ g(r)
    let tail: Box<dyn Fn(u64) -> f64> = match spec.family() {
        Family::YukawaCoulomb => {
            return Err(Error::UnsupportedOracle(
                "Yukawa-Coulomb lattice sum is only conditionally convergent".into(),
            ))
        }
        Family::Riesz => {
            let s = spec.riesz_exponent().unwrap_or(0.0);
            if s <= 2.0 {
                return Err(Error::UnsupportedOracle(format!("Riesz lattice sum diverges for s = {s} <= 2")));
            }
            Box::new(move |m| 8.0 * rho.powf(-s) * ((m as f64) - 1.0).max(0.5).powf(2.0 - s) / (s - 2.0))
        }
        _ => {
            let terms = spec.yukawa_terms();
            Box::new(move |m| {
                terms
                    .iter()
                    .map(|t| {
                        let q = (-t.kappa * rho).exp();
                        8.0 / rho * t.v.abs() * q.powf(m as f64) / (1.0 - q)
                    })
                    .sum()
            })
        }
    };
    let f = |j: i64, k: i64| {
        let r2 = area * ((j * j) as f64 / delta + (k * k) as f64 * delta);
        spec.value(r2.sqrt()).unwrap_or(0.0)
    };
    const MAX_SHELLS: i64 = 200_000;
    let mut total = 0.0;
    for m in 1..=MAX_SHELLS {
        let mut shell = 0.0;
        for j in -m..=m {
            shell += f(j, m) + f(j, -m);
        }
        for k in (-m + 1)..m {
            shell += f(m, k) + f(-m, k);
        }
        total += shell;
        if tail((m + 1) as u64) < cutoff_tol {
            return Ok(0.5 * total);
        }
    }
    Err(Error::NonConvergence(format!(
        "lattice sum tail above {cutoff_tol:e} after {MAX_SHELLS} shells"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::derive_double_yukawa;

    fn naive_product(u: f64, eps: f64) -> f64 {
        let th = |x: f64| 1.0 + direct_tail(x);
        th(u * (-eps).exp()) * th(u * eps.exp())
    }

    #[test]
    fn product_shift_matches_naive_difference() {
        for &u in &[PI, 4.0, 9.0] {
            for &e in &[0.3, 0.45, 0.7, 1.2] {
                let naive = naive_product(u, e) - naive_product(u, 0.0);
                let got = product_shift(u, e);
                assert!((got - naive).abs() < 1e-13 * naive.abs() + 1e-15, "u={u} e={e}");
            }
        }
    }

    #[test]
    fn product_shift_small_eps_is_quadratic() {
        // leading behaviour ε² · B2(u) with B2 = u θθ' + u² θθ'' − u² θ'²
        let u = 4.0;
        let d = crate::theta::direct_derivatives(u);
        let b2 = u * d[0] * d[1] + u * u * d[0] * d[2] - u * u * d[1] * d[1];
        for &e in &[1e-3, 1e-5, 1e-7] {
            let ratio = product_shift(u, e) / (e * e);
            assert!((ratio - b2).abs() < 1e-4 * b2.abs().max(e), "eps={e}: {ratio} vs {b2}");
        }
    }

    #[test]
    fn modular_identity_of_the_product() {
        for &t in &[0.3, 1.0, 2.5] {
            for &e in &[0.0f64, 0.2, 0.9] {
                let lhs = crate::theta::theta3(t * (-e).exp()).unwrap() * crate::theta::theta3(t * e.exp()).unwrap();
                let rhs = PI / t * naive_product(PI * PI / t, e);
                assert!((lhs - rhs).abs() < 1e-13 * lhs);
            }
        }
    }

    #[test]
    fn state_validation() {
        assert!(LatticeState::new(0.0, 0.0).is_err());
        assert!(LatticeState::new(1.0, f64::NAN).is_err());
        assert!(LatticeState::from_delta(1.0, -1.0).is_err());
        let s = LatticeState::from_delta(2.0, 1.3).unwrap();
        assert!((s.delta() - 1.3).abs() < 1e-15);
        assert_eq!(LatticeState::new(2.0, -0.3).unwrap().canonical().eps, 0.3);
    }

    #[test]
    fn energy_is_mirror_symmetric() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let q = QuadratureConfig::default();
        let a = lattice_energy(&spec, LatticeState::from_delta(3.0, 1.3).unwrap(), &q).unwrap();
        let b = lattice_energy(&spec, LatticeState::from_delta(3.0, 1.0 / 1.3).unwrap(), &q).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn integral_matches_direct_sum_double_yukawa() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let q = QuadratureConfig::default();
        let state = LatticeState::square(2.6).unwrap();
        let integral = lattice_energy(&spec, state, &q).unwrap();
        let direct = direct_lattice_sum(&spec, state, 1e-17).unwrap();
        assert!((integral - direct).abs() < 1e-10 * direct.abs(), "{integral} vs {direct}");
    }

    #[test]
    fn yukawa_nearest_shells() {
        // κ = 5, A = 4, Δ = 1: neighbours at r = 2, 2√2, 4, ... up to r = 8, summed by hand
        let spec = PotentialSpec::yukawa(5.0, 1.0).unwrap();
        let y = |r: f64| (-5.0 * r).exp() / r;
        let oracle = 0.5
            * (4.0 * y(2.0) + 4.0 * y(8f64.sqrt()) + 4.0 * y(4.0) + 8.0 * y(20f64.sqrt()) + 4.0 * y(32f64.sqrt())
                + 4.0 * y(6.0) + 8.0 * y(40f64.sqrt()) + 8.0 * y(52f64.sqrt()) + 4.0 * y(8.0));
        let direct = direct_lattice_sum(&spec, LatticeState::square(4.0).unwrap(), 1e-20).unwrap();
        assert!((direct - oracle).abs() < 1e-16, "{direct} vs {oracle}");
        let integral = lattice_energy(&spec, LatticeState::square(4.0).unwrap(), &QuadratureConfig::default()).unwrap();
        assert!((integral - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn direct_sum_symmetry_and_errors() {
        let spec = derive_double_yukawa(6.0, 1.7).unwrap();
        let a = direct_lattice_sum(&spec, LatticeState::from_delta(2.2, 1.4).unwrap(), 1e-16).unwrap();
        let b = direct_lattice_sum(&spec, LatticeState::from_delta(2.2, 1.0 / 1.4).unwrap(), 1e-16).unwrap();
        assert!((a - b).abs() < 1e-14 * a.abs());
        let yc = crate::potential::derive_yukawa_coulomb(2.0).unwrap();
        assert!(matches!(
            direct_lattice_sum(&yc, LatticeState::square(2.0).unwrap(), 1e-10),
            Err(Error::UnsupportedOracle(_))
        ));
        let r = PotentialSpec::riesz(1.0).unwrap();
        assert!(matches!(
            direct_lattice_sum(&r, LatticeState::square(2.0).unwrap(), 1e-10),
            Err(Error::UnsupportedOracle(_))
        ));
    }

    #[test]
    fn riesz_energy_matches_direct_sum() {
        let spec = PotentialSpec::riesz(8.0).unwrap();
        let state = LatticeState::from_delta(1.7, 1.2).unwrap();
        let integral = lattice_energy(&spec, state, &QuadratureConfig::default()).unwrap();
        let direct = direct_lattice_sum(&spec, state, 1e-13).unwrap();
        assert!((integral - direct).abs() < 1e-11 * direct);
    }

    #[test]
    fn split_point_does_not_change_the_energy() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let state = LatticeState::from_delta(2.4, 1.1).unwrap();
        let base = lattice_energy(&spec, state, &QuadratureConfig::default()).unwrap();
        for &s in &[1.0, 2.0, 5.0] {
            let q = QuadratureConfig { split_point: s, ..Default::default() };
            let e = lattice_energy(&spec, state, &q).unwrap();
            assert!((e - base).abs() < 1e-12 * base.abs(), "split {s}: {e} vs {base}");
        }
        let yc = crate::potential::derive_yukawa_coulomb(2.0).unwrap();
        let base = lattice_energy(&yc, state, &QuadratureConfig::default()).unwrap();
        let q = QuadratureConfig { split_point: 1.5, ..Default::default() };
        let e = lattice_energy(&yc, state, &q).unwrap();
        assert!((e - base).abs() < 1e-12 * base.abs());
    }

    #[test]
    fn coulomb_background_bracket_tends_to_minus_one() {
        // (π/t)(P(π²/t) − 1) − 1 at t = 1e-6
        let t: f64 = 1e-6;
        let bracket = PI / t * product_tail(PI * PI / t, 0.0) - 1.0;
        assert!((bracket + 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_difference_paths_agree() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let q = QuadratureConfig::default();
        let area = 2.65;
        let profile = EnergyProfile::new(&spec, area, &q).unwrap();
        let e0 = lattice_energy(&spec, LatticeState::square(area).unwrap(), &q).unwrap();
        for &eps in &[0.05, 0.2, 0.8] {
            let e = lattice_energy(&spec, LatticeState::new(area, eps).unwrap(), &q).unwrap();
            let d = energy_difference(&spec, area, eps, &q).unwrap();
            let p = profile.delta(eps);
            assert!((e - e0 - d).abs() < 1e-11 * e.abs(), "eps={eps}");
            assert!((p - d).abs() < 1e-11 * d.abs().max(1e-8), "eps={eps}: {p} vs {d}");
        }
    }
}
