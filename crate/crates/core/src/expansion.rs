//! Landau coefficients `E₀, E₂, E₄, E₆` of `E(A, e^ε) = Σ E_{2n}(A) ε^{2n}`.
//!
//! Two routes: closed theta-derivative integrands for `E₂` and `E₄`, and a
//! series route that expands every lattice term `e^{−(j² e^{−ε} + k² e^{ε}) t}`
//! as a truncated power series in `ε` and integrates coefficientwise.

use serde::{Deserialize, Serialize};

use crate::energy::{lattice_energy, modular_integral, scaled_density, LatticeState};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::powerseries::PowerSeries;
use crate::quadrature::QuadratureConfig;
use crate::theta::direct_derivatives;

/// Highest ε order produced by the series route.
pub const SERIES_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionMethod {
    ClosedForm,
    Series,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub area: f64,
    pub e0: f64,
    pub e2: f64,
    pub e4: f64,
    /// Only the series route produces `E₆`.
    pub e6: Option<f64>,
    /// `E₁, E₃, E₅`; identically zero up to rounding (series route only).
    pub odd: Option<[f64; 3]>,
    pub method: ExpansionMethod,
}

/// ε² coefficient of `θ3(e^{−u e^{−ε}}) θ3(e^{−u e^{ε}})`.
pub fn e2_bracket(u: f64) -> f64 {
    bracket2(u, &direct_derivatives(u))
}

/// ε⁴ coefficient of the theta product.
pub fn e4_bracket(u: f64) -> f64 {
    bracket4(u, &direct_derivatives(u))
}

/// `E(A, 1)`.
pub fn e0(spec: &PotentialSpec, area: f64, q: &QuadratureConfig) -> Result<f64> {
    lattice_energy(spec, LatticeState::square(area)?, q)
}

pub fn e2_closed(spec: &PotentialSpec, area: f64, q: &QuadratureConfig) -> Result<f64> {
    LatticeState::square(area)?;
    let r = modular_integral(|u| [e2_bracket(u)], scaled_density(spec, area), q)?;
    Ok(0.5 * r.value[0])
}

pub fn e4_closed(spec: &PotentialSpec, area: f64, q: &QuadratureConfig) -> Result<f64> {
    LatticeState::square(area)?;
    let r = modular_integral(|u| [e4_bracket(u)], scaled_density(spec, area), q)?;
    Ok(0.5 * r.value[0])
}

/// `(E₂, E₄)` from the closed integrands on a shared partition.
pub fn landau_pair(spec: &PotentialSpec, area: f64, q: &QuadratureConfig) -> Result<(f64, f64)> {
    LatticeState::square(area)?;
    let r = modular_integral(
        |u| {
            let d = direct_derivatives(u);
            [bracket2(u, &d), bracket4(u, &d)]
        },
        scaled_density(spec, area),
        q,
    )?;
    Ok((0.5 * r.value[0], 0.5 * r.value[1]))
}

fn bracket2(u: f64, d: &[f64; 5]) -> f64 {
    u * d[0] * d[1] - u * u * d[1] * d[1] + u * u * d[0] * d[2]
}

fn bracket4(u: f64, d: &[f64; 5]) -> f64 {
    let (u2, u3, u4) = (u * u, u * u * u, u * u * u * u);
    (u * d[0] * d[1] - u2 * d[1] * d[1] + 7.0 * u2 * d[0] * d[2] + 6.0 * u3 * d[0] * d[3]
        - 6.0 * u3 * d[1] * d[2]
        + u4 * d[0] * d[4]
        - 4.0 * u4 * d[1] * d[3]
        + 3.0 * u4 * d[2] * d[2])
        / 12.0
}

/// Closed-form route: `E₀`, `E₂`, `E₄`.
pub fn expansion_closed(spec: &PotentialSpec, area: f64, q: &QuadratureConfig) -> Result<ExpansionCoefficients> {
    let (e2, e4) = landau_pair(spec, area, q)?;
    Ok(ExpansionCoefficients {
        area,
        e0: e0(spec, area, q)?,
        e2,
        e4,
        e6: None,
        odd: None,
        method: ExpansionMethod::ClosedForm,
    })
}

/// ε-series of `Σ_{j,k} e^{−(j² e^{−ε} + k² e^{ε}) u}` through order 6, summed
/// over square shells `max(|j|, |k|) = m`.
pub fn product_series(u: f64) -> Result<PowerSeries> {
    let order = SERIES_ORDER;
    // e^{±ε} coefficients
    let mut inv_fact = [1.0; SERIES_ORDER + 1];
    for n in 1..=order {
        inv_fact[n] = inv_fact[n - 1] / n as f64;
    }
    let term = |j: i64, k: i64| -> PowerSeries {
        let (j2, k2) = ((j * j) as f64, (k * k) as f64);
        let coeffs: Vec<f64> = (0..=order)
            .map(|n| {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                -u * (j2 * sign + k2) * inv_fact[n]
            })
            .collect();
        PowerSeries::from_coeffs(&coeffs, order).exp()
    };
    let mut total = PowerSeries::one(order);
    const MAX_SHELLS: i64 = 10_000;
    for m in 1..=MAX_SHELLS {
        let mut shell = PowerSeries::zero(order);
        for j in -m..=m {
            shell.add_scaled(&term(j, m), 1.0)?;
            shell.add_scaled(&term(j, -m), 1.0)?;
        }
        for k in (-m + 1)..m {
            shell.add_scaled(&term(m, k), 1.0)?;
            shell.add_scaled(&term(-m, k), 1.0)?;
        }
        total.add_scaled(&shell, 1.0)?;
        let past_peak = (m * m) as f64 * u > 2.0 * order as f64;
        if past_peak && shell.max_abs() <= 1e-18 * total.max_abs() {
            return Ok(total);
        }
    }
    Err(Error::NonConvergence(format!("theta product series at u = {u} did not converge")))
}

/// Series route: all coefficients through `ε⁶`.
pub fn expansion_series(spec: &PotentialSpec, area: f64, q: &QuadratureConfig) -> Result<ExpansionCoefficients> {
    LatticeState::square(area)?;
    let mut failure = None;
    let r = modular_integral(
        |u| match product_series(u) {
            Ok(p) => {
                let mut c = [0.0; SERIES_ORDER];
                c.copy_from_slice(&p.coeffs()[1..]);
                c
            }
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; SERIES_ORDER]
            }
        },
        scaled_density(spec, area),
        q,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let c = r?.value;
    Ok(ExpansionCoefficients {
        area,
        e0: e0(spec, area, q)?,
        e2: 0.5 * c[1],
        e4: 0.5 * c[3],
        e6: Some(0.5 * c[5]),
        odd: Some([0.5 * c[0], 0.5 * c[2], 0.5 * c[4]]),
        method: ExpansionMethod::Series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::derive_double_yukawa;

    #[test]
    fn series_product_matches_theta_brackets() {
        for &u in &[1.0, std::f64::consts::PI, 6.0] {
            let p = product_series(u).unwrap();
            let d = direct_derivatives(u);
            assert!((p.coeff(0) - d[0] * d[0]).abs() < 1e-14);
            assert!((p.coeff(2) - e2_bracket(u)).abs() < 1e-13 * e2_bracket(u).abs().max(1e-3));
            assert!((p.coeff(4) - e4_bracket(u)).abs() < 1e-13 * e4_bracket(u).abs().max(1e-3), "u={u}");
            assert!(p.coeff(1).abs() < 1e-15 && p.coeff(3).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_and_series_agree() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let q = QuadratureConfig::default();
        let c = expansion_closed(&spec, 2.7, &q).unwrap();
        let s = expansion_series(&spec, 2.7, &q).unwrap();
        assert!((c.e2 - s.e2).abs() < 1e-10 * c.e2.abs());
        assert!((c.e4 - s.e4).abs() < 1e-10 * c.e4.abs());
        assert_eq!(c.e0, s.e0);
        let scale = s.e2.abs();
        for o in s.odd.unwrap() {
            assert!(o.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn single_coefficient_paths_match_pair() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let q = QuadratureConfig::default();
        let (e2, e4) = landau_pair(&spec, 2.5, &q).unwrap();
        assert!((e2 - e2_closed(&spec, 2.5, &q).unwrap()).abs() < 1e-12 * e2.abs());
        assert!((e4 - e4_closed(&spec, 2.5, &q).unwrap()).abs() < 1e-12 * e4.abs());
    }

    #[test]
    fn e2_vanishes_near_published_critical_density() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let q = QuadratureConfig::default();
        let lo = e2_closed(&spec, 2.61449322978 * (1.0 - 1e-8), &q).unwrap();
        let hi = e2_closed(&spec, 2.61449322978 * (1.0 + 1e-8), &q).unwrap();
        assert!(lo > 0.0 && hi < 0.0, "{lo} {hi}");
        assert!(e4_closed(&spec, 2.61449322978, &q).unwrap() > 0.0);
        assert!(e0(&spec, 2.61449322978, &q).unwrap() < 0.0);
    }
}
