//! Adaptive Gauss–Kronrod (10/21) quadrature for vector-valued integrands.
//!
//! Intervals are bisected in order of decreasing scaled error until every
//! component satisfies `error_k <= max(abs_tol, rel_tol * ∫|f_k|)`. Node
//! placement depends only on the integrand values, so results are
//! bit-reproducible. Semi-infinite intervals are mapped onto `(0, 1]` by
//! `t = a + (1 - x)/x`.
//!
//! The converged [`Partition`] can be kept and reused as a fixed rule, which
//! gives integrals that vary smoothly with a parameter of the integrand.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

/// Accuracy settings shared by every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Where the theta representation switches between the direct and the
    /// modular-transformed series.
    pub split_point: f64,
    /// Maximum number of bisections per integral.
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-12, abs_tol: 1e-14, split_point: PI, max_refinements: 4000 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be positive (rel_tol = {}, abs_tol = {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_refinements < 1 {
            return Err(Error::Domain("max_refinements must be at least 1".into()));
        }
        if !(self.split_point > 0.0) {
            return Err(Error::Domain(format!("split point must be positive, got {}", self.split_point)));
        }
        Ok(())
    }
}

/// An integration range in the original variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Finite(f64, f64),
    ToInfinity(f64),
}

/// A panel of the final partition. Mapped panels cover `x ∈ [lo, hi] ⊂ (0, 1]`
/// with `t = origin + (1 - x)/x`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Panel {
    Direct { lo: f64, hi: f64 },
    Mapped { origin: f64, lo: f64, hi: f64 },
}

impl Panel {
    fn split(self) -> (Panel, Panel) {
        match self {
            Panel::Direct { lo, hi } => {
                let mid = 0.5 * (lo + hi);
                (Panel::Direct { lo, hi: mid }, Panel::Direct { lo: mid, hi })
            }
            Panel::Mapped { origin, lo, hi } => {
                let mid = 0.5 * (lo + hi);
                (Panel::Mapped { origin, lo, hi: mid }, Panel::Mapped { origin, lo: mid, hi })
            }
        }
    }

    fn width(self) -> f64 {
        match self {
            Panel::Direct { lo, hi } | Panel::Mapped { lo, hi, .. } => hi - lo,
        }
    }

    /// Integrand value at panel coordinate `x`, including the Jacobian.
    fn eval<const N: usize, F: FnMut(f64) -> [f64; N]>(self, f: &mut F, x: f64) -> [f64; N] {
        match self {
            Panel::Direct { .. } => f(x),
            Panel::Mapped { origin, .. } => {
                let t = origin + (1.0 - x) / x;
                let jac = 1.0 / (x * x);
                let mut v = f(t);
                for c in v.iter_mut() {
                    *c = if *c == 0.0 { 0.0 } else { *c * jac };
                }
                v
            }
        }
    }

    fn rule<const N: usize, F: FnMut(f64) -> [f64; N]>(self, f: &mut F) -> PanelEstimate<N> {
        let (lo, hi) = match self {
            Panel::Direct { lo, hi } | Panel::Mapped { lo, hi, .. } => (lo, hi),
        };
        let center = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let fc = self.eval(f, center);
        let mut kronrod = [0.0; N];
        let mut gauss = [0.0; N];
        let mut abs = [0.0; N];
        for k in 0..N {
            kronrod[k] = WGK[10] * fc[k];
            abs[k] = WGK[10] * fc[k].abs();
        }
        for i in 0..10 {
            let dx = half * XGK[i];
            let f1 = self.eval(f, center - dx);
            let f2 = self.eval(f, center + dx);
            for k in 0..N {
                let s = f1[k] + f2[k];
                kronrod[k] += WGK[i] * s;
                abs[k] += WGK[i] * (f1[k].abs() + f2[k].abs());
                if i % 2 == 1 {
                    gauss[k] += WG[i / 2] * s;
                }
            }
        }
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        for k in 0..N {
            value[k] = kronrod[k] * half;
            abs[k] *= half;
            error[k] = ((kronrod[k] - gauss[k]) * half).abs();
            // below this the difference is rounding noise
            error[k] = error[k].max(50.0 * f64::EPSILON * abs[k]);
        }
        PanelEstimate { panel: self, value, error, abs }
    }
}

#[derive(Debug, Clone, Copy)]
struct PanelEstimate<const N: usize> {
    panel: Panel,
    value: [f64; N],
    error: [f64; N],
    abs: [f64; N],
}

/// A converged set of panels, reusable as a fixed composite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    panels: Vec<Panel>,
}

impl Partition {
    /// Applies the 21-point Kronrod rule on every panel.
    pub fn integrate<const N: usize, F: FnMut(f64) -> [f64; N]>(&self, mut f: F) -> [f64; N] {
        let mut total = [0.0; N];
        for p in &self.panels {
            let est = p.rule(&mut f);
            for k in 0..N {
                total[k] += est.value[k];
            }
        }
        total
    }

    /// Abscissae in the original variable with their weights (Jacobians included).
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(21 * self.panels.len());
        for p in &self.panels {
            let (lo, hi) = match *p {
                Panel::Direct { lo, hi } | Panel::Mapped { lo, hi, .. } => (lo, hi),
            };
            let center = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let mut push = |x: f64, w: f64| match *p {
                Panel::Direct { .. } => out.push((x, w * half)),
                Panel::Mapped { origin, .. } => out.push((origin + (1.0 - x) / x, w * half / (x * x))),
            };
            push(center, WGK[10]);
            for i in 0..10 {
                let dx = half * XGK[i];
                push(center - dx, WGK[i]);
                push(center + dx, WGK[i]);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    /// Estimate of `∫|f_k|`, the scale the relative tolerance refers to.
    pub l1: [f64; N],
    pub evaluations: usize,
    pub partition: Partition,
}

fn initial_panels(intervals: &[Interval]) -> Vec<Panel> {
    intervals
        .iter()
        .map(|iv| match *iv {
            Interval::Finite(a, b) => Panel::Direct { lo: a, hi: b },
            Interval::ToInfinity(a) => Panel::Mapped { origin: a, lo: 0.0, hi: 1.0 },
        })
        .collect()
}

/// Adaptive integration of `f` over the union of `intervals`.
pub fn integrate<const N: usize, F: FnMut(f64) -> [f64; N]>(
    mut f: F,
    intervals: &[Interval],
    cfg: &QuadratureConfig,
) -> Result<Integral<N>> {
    cfg.validate()?;
    let mut estimates: Vec<PanelEstimate<N>> =
        initial_panels(intervals).into_iter().map(|p| p.rule(&mut f)).collect();
    let mut evaluations = 21 * estimates.len();
    let mut refinements = 0;
    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        let mut l1 = [0.0; N];
        for e in &estimates {
            for k in 0..N {
                value[k] += e.value[k];
                error[k] += e.error[k];
                l1[k] += e.abs[k];
            }
        }
        let tol: [f64; N] = std::array::from_fn(|k| cfg.abs_tol.max(cfg.rel_tol * l1[k]));
        let converged = (0..N).all(|k| error[k] <= tol[k]);
        if converged {
            let partition = Partition { panels: estimates.iter().map(|e| e.panel).collect() };
            return Ok(Integral { value, error, l1, evaluations, partition });
        }
        // worst panel by error relative to its component tolerance
        let scaled = |e: &PanelEstimate<N>| {
            (0..N).fold(0.0_f64, |m, k| {
                let denom = if tol[k] > 0.0 { tol[k] } else { f64::MIN_POSITIVE };
                m.max(e.error[k] / denom)
            })
        };
        let (worst, _) = estimates
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bs), (i, e)| {
                let s = scaled(e);
                if s > bs { (i, s) } else { (bi, bs) }
            });
        let worst_panel = estimates[worst].panel;
        if refinements >= cfg.max_refinements || worst_panel.width() < 1e-14 {
            let (k, ratio) = (0..N).fold((0, 0.0), |(bk, br), k| {
                let r = error[k] / tol[k].max(f64::MIN_POSITIVE);
                if r > br { (k, r) } else { (bk, br) }
            });
            let _ = ratio;
            return Err(Error::Quadrature { error: error[k], tolerance: tol[k] });
        }
        let (left, right) = worst_panel.split();
        estimates[worst] = left.rule(&mut f);
        estimates.insert(worst + 1, right.rule(&mut f));
        evaluations += 42;
        refinements += 1;
    }
}
