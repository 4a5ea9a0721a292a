//! Pair-potential families with a Gaussian-superposition (Laplace) representation
//! `f(r) = ∫₀^∞ e^{-r² t} ρ_f(t) dt`.
//!
//! The two-term families are normalized so that the attractive well sits at
//! `r = 1` with depth `f(1) = -1`; their remaining parameters are derived at
//! construction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|f(1) + 1|` and `|f'(1)|` for the normalized families.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

/// Free parameters of a potential, as read from and written to JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PotentialParams {
    Riesz { s: f64 },
    Yukawa { kappa: f64, v: f64 },
    DoubleYukawa { v1: f64, kappa1: f64 },
    YukawaCoulomb { kappa1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Riesz,
    Yukawa,
    DoubleYukawa,
    YukawaCoulomb,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Riesz => "riesz",
            Family::Yukawa => "yukawa",
            Family::DoubleYukawa => "double-yukawa",
            Family::YukawaCoulomb => "yukawa-coulomb",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "riesz" => Ok(Family::Riesz),
            "yukawa" => Ok(Family::Yukawa),
            "double-yukawa" => Ok(Family::DoubleYukawa),
            "yukawa-coulomb" => Ok(Family::YukawaCoulomb),
            other => Err(Error::Domain(format!("unknown potential family '{other}'"))),
        }
    }
}

/// One screened-Coulomb term `v e^{-κ r}/r`; `kappa == 0` is the bare Coulomb tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YukawaTerm {
    pub v: f64,
    pub kappa: f64,
}

impl YukawaTerm {
    fn value(&self, r: f64) -> f64 {
        self.v * (-self.kappa * r).exp() / r
    }

    fn derivative(&self, r: f64) -> f64 {
        -self.v * (-self.kappa * r).exp() * (1.0 + self.kappa * r) / (r * r)
    }

    /// `v (πt)^{-1/2} e^{-κ²/(4t)}`
    fn density(&self, t: f64) -> f64 {
        self.v * (-self.kappa * self.kappa / (4.0 * t)).exp() / (PI * t).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Riesz { s: f64, inv_gamma: f64 },
    Yukawa(YukawaTerm),
    DoubleYukawa {
        repulsive: YukawaTerm,
        attractive: YukawaTerm,
        // κ1 − κ2 and v1 − v2, kept separately to avoid cancellation for large v1
        kappa_gap: f64,
        amplitude_gap: f64,
    },
    YukawaCoulomb { repulsive: YukawaTerm, attractive: YukawaTerm },
}

/// A validated pair potential with its derived parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialParams", into = "PotentialParams")]
pub struct PotentialSpec {
    params: PotentialParams,
    kind: Kind,
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

/// Lower bound `e^{κ1}/κ1` on `v1` for the double Yukawa family.
pub fn double_yukawa_v1_bound(kappa1: f64) -> f64 {
    kappa1.exp() / kappa1
}

impl PotentialSpec {
    pub fn riesz(s: f64) -> Result<Self> {
        require_positive("Riesz exponent s", s)?;
        Ok(PotentialSpec {
            params: PotentialParams::Riesz { s },
            kind: Kind::Riesz { s, inv_gamma: 1.0 / libm::tgamma(s / 2.0) },
        })
    }

    pub fn yukawa(kappa: f64, v: f64) -> Result<Self> {
        require_positive("Yukawa screening kappa", kappa)?;
        require_positive("Yukawa amplitude v", v)?;
        Ok(PotentialSpec {
            params: PotentialParams::Yukawa { kappa, v },
            kind: Kind::Yukawa(YukawaTerm { v, kappa }),
        })
    }

    /// Double Yukawa potential `v1 e^{-κ1 r}/r − v2 e^{-κ2 r}/r` normalized to
    /// `f(1) = -1`, `f'(1) = 0`, which fixes
    /// `κ2 = (κ1 v1 − e^{κ1})/(v1 + e^{κ1})` and
    /// `v2 = e^{κ2−κ1}(1+κ1) v1/(1+κ2)`.
    pub fn double_yukawa(v1: f64, kappa1: f64) -> Result<Self> {
        require_positive("v1", v1)?;
        require_positive("kappa1", kappa1)?;
        let e1 = kappa1.exp();
        let bound = e1 / kappa1;
        let kappa2 = (kappa1 * v1 - e1) / (v1 + e1);
        if v1 <= bound || !(kappa2 > 0.0) {
            return Err(Error::Domain(format!(
                "double Yukawa requires v1 > e^kappa1/kappa1 = {bound:.15} (got v1 = {v1}, kappa1 = {kappa1})"
            )));
        }
        let kappa_gap = (1.0 + kappa1) * e1 / (v1 + e1);
        let v2 = (-kappa_gap).exp() * (1.0 + kappa1) * v1 / (1.0 + kappa2);
        let amplitude_gap = v1 * (-(1.0 + kappa1) * (-kappa_gap).exp_m1() - kappa_gap) / (1.0 + kappa2);
        let spec = PotentialSpec {
            params: PotentialParams::DoubleYukawa { v1, kappa1 },
            kind: Kind::DoubleYukawa {
                repulsive: YukawaTerm { v: v1, kappa: kappa1 },
                attractive: YukawaTerm { v: -v2, kappa: kappa2 },
                kappa_gap,
                amplitude_gap,
            },
        };
        spec.check_normalization()?;
        Ok(spec)
    }

    /// Yukawa-Coulomb potential `v1 e^{-κ1 r}/r − v2/r` with
    /// `v1 = e^{κ1}/κ1`, `v2 = (1+κ1)/κ1`.
    pub fn yukawa_coulomb(kappa1: f64) -> Result<Self> {
        require_positive("kappa1", kappa1)?;
        let v1 = kappa1.exp() / kappa1;
        let v2 = (1.0 + kappa1) / kappa1;
        let spec = PotentialSpec {
            params: PotentialParams::YukawaCoulomb { kappa1 },
            kind: Kind::YukawaCoulomb {
                repulsive: YukawaTerm { v: v1, kappa: kappa1 },
                attractive: YukawaTerm { v: -v2, kappa: 0.0 },
            },
        };
        spec.check_normalization()?;
        Ok(spec)
    }

    pub fn from_params(params: PotentialParams) -> Result<Self> {
        match params {
            PotentialParams::Riesz { s } => Self::riesz(s),
            PotentialParams::Yukawa { kappa, v } => Self::yukawa(kappa, v),
            PotentialParams::DoubleYukawa { v1, kappa1 } => Self::double_yukawa(v1, kappa1),
            PotentialParams::YukawaCoulomb { kappa1 } => Self::yukawa_coulomb(kappa1),
        }
    }

    pub fn params(&self) -> PotentialParams {
        self.params
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Riesz { .. } => Family::Riesz,
            Kind::Yukawa(_) => Family::Yukawa,
            Kind::DoubleYukawa { .. } => Family::DoubleYukawa,
            Kind::YukawaCoulomb { .. } => Family::YukawaCoulomb,
        }
    }

    /// True iff the Coulomb tail needs a neutralizing background.
    pub fn needs_background(&self) -> bool {
        matches!(self.kind, Kind::YukawaCoulomb { .. })
    }

    /// Nonnegative measure (completely monotone potential).
    pub fn is_completely_monotone(&self) -> bool {
        match self.kind {
            Kind::Riesz { s, .. } => s > 2.0,
            Kind::Yukawa(_) => true,
            _ => false,
        }
    }

    /// Screened-Coulomb terms making up the potential (empty for Riesz).
    pub fn yukawa_terms(&self) -> Vec<YukawaTerm> {
        match self.kind {
            Kind::Riesz { .. } => vec![],
            Kind::Yukawa(y) => vec![y],
            Kind::DoubleYukawa { repulsive, attractive, .. }
            | Kind::YukawaCoulomb { repulsive, attractive } => vec![repulsive, attractive],
        }
    }

    /// `(v1, κ1, v2, κ2)` for the two-term families, with `v2 > 0` as the
    /// attractive amplitude and `κ2 = 0` for Yukawa-Coulomb.
    pub fn two_term_parameters(&self) -> Option<(f64, f64, f64, f64)> {
        match self.kind {
            Kind::DoubleYukawa { repulsive, attractive, .. }
            | Kind::YukawaCoulomb { repulsive, attractive } => {
                Some((repulsive.v, repulsive.kappa, -attractive.v, attractive.kappa))
            }
            _ => None,
        }
    }

    pub fn riesz_exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::Riesz { s, .. } => Some(s),
            _ => None,
        }
    }

    /// `(|f(1) + 1|, |f'(1)|)` for the normalized families.
    pub fn normalization_residuals(&self) -> Option<(f64, f64)> {
        match self.kind {
            Kind::DoubleYukawa { .. } | Kind::YukawaCoulomb { .. } => {
                Some(((self.eval(1.0) + 1.0).abs(), self.eval_derivative(1.0).abs()))
            }
            _ => None,
        }
    }

    fn check_normalization(&self) -> Result<()> {
        if let Some((value, slope)) = self.normalization_residuals() {
            if value > NORMALIZATION_TOLERANCE || slope > NORMALIZATION_TOLERANCE {
                return Err(Error::Contract(format!(
                    "normalization residuals |f(1)+1| = {value:e}, |f'(1)| = {slope:e}"
                )));
            }
        }
        Ok(())
    }

    fn eval(&self, r: f64) -> f64 {
        match self.kind {
            Kind::Riesz { s, .. } => r.powf(-s),
            Kind::Yukawa(y) => y.value(r),
            Kind::DoubleYukawa { repulsive, attractive, .. }
            | Kind::YukawaCoulomb { repulsive, attractive } => repulsive.value(r) + attractive.value(r),
        }
    }

    fn eval_derivative(&self, r: f64) -> f64 {
        match self.kind {
            Kind::Riesz { s, .. } => -s * r.powf(-s - 1.0),
            Kind::Yukawa(y) => y.derivative(r),
            Kind::DoubleYukawa { repulsive, attractive, .. }
            | Kind::YukawaCoulomb { repulsive, attractive } => {
                repulsive.derivative(r) + attractive.derivative(r)
            }
        }
    }

    /// Pair potential `f(r)`. The Yukawa-Coulomb value is the bare potential;
    /// the background enters only the lattice energy.
    pub fn value(&self, r: f64) -> Result<f64> {
        require_positive("distance r", r)?;
        Ok(self.eval(r))
    }

    /// Analytic `f'(r)`.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        require_positive("distance r", r)?;
        Ok(self.eval_derivative(r))
    }

    /// Density `ρ_f(t)` of the measure, `dμ_f = ρ_f dt`.
    pub fn measure_density(&self, t: f64) -> Result<f64> {
        require_positive("measure argument t", t)?;
        Ok(self.density(t))
    }

    /// Unchecked density for quadrature inner loops (`t > 0` assumed).
    pub(crate) fn density(&self, t: f64) -> f64 {
        match self.kind {
            Kind::Riesz { s, inv_gamma } => t.powf(s / 2.0 - 1.0) * inv_gamma,
            Kind::Yukawa(y) => y.density(t),
            Kind::DoubleYukawa { repulsive, attractive, kappa_gap, amplitude_gap } => {
                let k1 = repulsive.kappa;
                let k2 = attractive.kappa;
                let x = kappa_gap * (k1 + k2) / (4.0 * t);
                (-k2 * k2 / (4.0 * t)).exp() * (repulsive.v * (-x).exp_m1() + amplitude_gap) / (PI * t).sqrt()
            }
            Kind::YukawaCoulomb { repulsive, attractive } => {
                (repulsive.v * (-repulsive.kappa * repulsive.kappa / (4.0 * t)).exp() + attractive.v)
                    / (PI * t).sqrt()
            }
        }
    }

    /// Point `t_0` below which the measure density is negative, for the
    /// double Yukawa family: `t_0 = (κ1² − κ2²)/(4 ln(v1/v2))`.
    pub fn measure_sign_change(&self) -> Option<f64> {
        match self.kind {
            Kind::DoubleYukawa { repulsive, attractive, .. } => {
                let (v1, k1, v2, k2) = (repulsive.v, repulsive.kappa, -attractive.v, attractive.kappa);
                Some((k1 * k1 - k2 * k2) / (4.0 * (v1 / v2).ln()))
            }
            _ => None,
        }
    }
}

impl TryFrom<PotentialParams> for PotentialSpec {
    type Error = Error;

    fn try_from(params: PotentialParams) -> Result<Self> {
        PotentialSpec::from_params(params)
    }
}

impl From<PotentialSpec> for PotentialParams {
    fn from(spec: PotentialSpec) -> Self {
        spec.params
    }
}

/// Double Yukawa spec from its free parameters.
pub fn derive_double_yukawa(v1: f64, kappa1: f64) -> Result<PotentialSpec> {
    PotentialSpec::double_yukawa(v1, kappa1)
}

/// Yukawa-Coulomb spec from its screening parameter.
pub fn derive_yukawa_coulomb(kappa1: f64) -> Result<PotentialSpec> {
    PotentialSpec::yukawa_coulomb(kappa1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Interval, QuadratureConfig};

    #[test]
    fn double_yukawa_derived_parameters() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let (v1, k1, v2, k2) = spec.two_term_parameters().unwrap();
        // κ2 and v2 straight from the normalization formulas
        let e2 = 2f64.exp();
        let k2_ref = (2.0 * 9.8 - e2) / (9.8 + e2);
        let v2_ref = (k2_ref - 2.0).exp() * 3.0 * 9.8 / (1.0 + k2_ref);
        assert_eq!((v1, k1), (9.8, 2.0));
        assert!((k2 - k2_ref).abs() < 1e-15);
        assert!((v2 - v2_ref).abs() < 1e-13);
        assert!((k2 - 0.7103906014844531).abs() < 1e-14);
        assert!((v2 - 4.7335).abs() < 1e-4);
        let (r0, r1) = spec.normalization_residuals().unwrap();
        assert!(r0 < 1e-12 && r1 < 1e-12);
        assert!((spec.value(1.0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn double_yukawa_bound_is_enforced() {
        let v1 = 2f64.exp() / 2.0;
        match derive_double_yukawa(v1, 2.0) {
            Err(Error::Domain(msg)) => assert!(msg.contains("e^kappa1/kappa1")),
            other => panic!("expected domain error, got {other:?}"),
        }
        assert!(derive_double_yukawa(3.0, 2.0).is_err());
        assert!(derive_double_yukawa(-1.0, 2.0).is_err());
    }

    #[test]
    fn double_yukawa_shape() {
        for &(v1, k1) in &[(9.8, 2.0), (4.0, 2.0), (50.0, 1.5), (8.0, 3.0)] {
            let spec = derive_double_yukawa(v1, k1).unwrap();
            assert!(spec.value(0.05).unwrap() > 0.0);
            assert!(spec.value(0.98).unwrap() < 0.0);
            assert!(spec.value(1.02).unwrap() < 0.0);
            let (v1, k1, v2, k2) = spec.two_term_parameters().unwrap();
            assert!(v1 > v2 && v2 > 0.0 && k1 > k2 && k2 > 0.0);
        }
        assert!(derive_double_yukawa(9.8, 2.0).unwrap().value(0.1).unwrap() > 0.0);
    }

    #[test]
    fn yukawa_coulomb_parameters() {
        let spec = derive_yukawa_coulomb(2.0).unwrap();
        let (v1, _, v2, k2) = spec.two_term_parameters().unwrap();
        assert!((v1 - 3.694528049465325).abs() < 1e-12);
        assert_eq!(v2, 1.5);
        assert_eq!(k2, 0.0);
        assert!(spec.needs_background());
        for &k in &[0.3, 1.0, 2.036517758847, 7.0] {
            let spec = derive_yukawa_coulomb(k).unwrap();
            assert!((spec.value(1.0).unwrap() + 1.0).abs() < 1e-12);
            assert!(spec.derivative(1.0).unwrap().abs() < 1e-12);
        }
        assert!(derive_yukawa_coulomb(0.0).is_err());
        assert!(derive_yukawa_coulomb(-2.0).is_err());
    }

    #[test]
    fn point_values() {
        let riesz = PotentialSpec::riesz(2.0).unwrap();
        assert_eq!(riesz.value(2.0).unwrap(), 0.25);
        assert!(riesz.value(0.0).is_err());
        assert!(PotentialSpec::riesz(0.0).is_err());
    }

    #[test]
    fn measure_densities() {
        let riesz = PotentialSpec::riesz(4.0).unwrap();
        for &t in &[0.1, 1.0, 7.5] {
            assert!((riesz.measure_density(t).unwrap() - t).abs() < 1e-15 * t);
        }
        let yukawa = PotentialSpec::yukawa(2.0, 1.0).unwrap();
        assert_eq!(yukawa.measure_density(1e-4).unwrap(), 0.0);
        assert!(yukawa.measure_density(0.0).is_err());
    }

    #[test]
    fn sign_change_matches_closed_form() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let t0 = spec.measure_sign_change().unwrap();
        let (v1, k1, v2, k2) = spec.two_term_parameters().unwrap();
        let naive = |t: f64| v1 * (-k1 * k1 / (4.0 * t)).exp() - v2 * (-k2 * k2 / (4.0 * t)).exp();
        assert!(naive(t0 * (1.0 - 1e-9)) < 0.0);
        assert!(naive(t0 * (1.0 + 1e-9)) > 0.0);
        assert!(spec.measure_density(t0 * 0.999).unwrap() < 0.0);
        assert!(spec.measure_density(t0 * 1.001).unwrap() > 0.0);
        // bisection on the stable density reproduces t0
        let (mut lo, mut hi) = (t0 * 0.5, t0 * 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if spec.measure_density(mid).unwrap() < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi) - t0).abs() < 1e-12 * t0);
    }

    #[test]
    fn stable_density_matches_naive_form() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let (v1, k1, v2, k2) = spec.two_term_parameters().unwrap();
        for &t in &[0.05, 0.3, 1.0, 4.0, 40.0] {
            let naive = (v1 * (-k1 * k1 / (4.0 * t)).exp() - v2 * (-k2 * k2 / (4.0 * t)).exp()) / (PI * t).sqrt();
            let stable = spec.measure_density(t).unwrap();
            assert!((naive - stable).abs() < 1e-13 * naive.abs().max(1e-3), "t = {t}");
        }
    }

    #[test]
    fn completely_monotone_densities_are_nonnegative() {
        for spec in [
            PotentialSpec::riesz(3.0).unwrap(),
            PotentialSpec::riesz(6.5).unwrap(),
            PotentialSpec::yukawa(0.7, 2.0).unwrap(),
        ] {
            assert!(spec.is_completely_monotone());
            for i in 0..200 {
                let t = 1e-4 * 1.1f64.powi(i);
                assert!(spec.measure_density(t).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn laplace_representation_reproduces_potential() {
        let cfg = QuadratureConfig { rel_tol: 1e-13, abs_tol: 0.0, ..Default::default() };
        for spec in [derive_double_yukawa(9.8, 2.0).unwrap(), PotentialSpec::yukawa(1.3, 0.8).unwrap()] {
            for &r in &[0.5, 1.0, 2.0] {
                let f = |t: f64| [(-r * r * t).exp() * spec.density(t)];
                let panels: Vec<Interval> = (-12..6)
                    .map(|k| Interval::Finite(2f64.powi(k), 2f64.powi(k + 1)))
                    .chain([Interval::Finite(0.0, 2f64.powi(-12)), Interval::ToInfinity(64.0)])
                    .collect();
                let got = integrate(f, &panels, &cfg).unwrap().value[0];
                let expected = spec.value(r).unwrap();
                assert!((got - expected).abs() < 1e-10 * expected.abs(), "r = {r}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = derive_double_yukawa(9.8, 2.0).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"family":"double-yukawa","v1":9.8,"kappa1":2.0}"#);
        let back: PotentialSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let bad: std::result::Result<PotentialSpec, _> =
            serde_json::from_str(r#"{"family":"double-yukawa","v1":3.0,"kappa1":2.0}"#);
        assert!(bad.is_err());
        let yc: PotentialSpec = serde_json::from_str(r#"{"family":"yukawa-coulomb","kappa1":2.0}"#).unwrap();
        assert!(yc.needs_background());
    }
}
