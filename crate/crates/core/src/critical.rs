//! Structural transitions of the rectangular lattice: zeros of `E₂`, joint
//! zeros of `E₂` and `E₄`, first-order coexistence, constrained minimization
//! over the aspect ratio, the large-`v1` limit of the critical density, and
//! power-law fits of the order parameter.

use serde::{Deserialize, Serialize};

use crate::energy::{lattice_energy, modular_integral, EnergyProfile, LatticeState};
use crate::error::{Error, Result};
use crate::expansion::{e2_bracket, e2_closed, expansion_series, landau_pair};
use crate::potential::{double_yukawa_v1_bound, PotentialSpec};
use crate::quadrature::QuadratureConfig;
use crate::roots::{brent_minimize, brent_root, Root};

/// Default upper limit of the log aspect ratio searched (`Δ ≤ 4`).
pub const DEFAULT_EPS_CAP: f64 = 1.386_294_361_119_890_6;

/// Divergence threshold on `v1ᵗ` that defines the lower end of the tricritical locus.
pub const V1_DIVERGENCE_THRESHOLD: f64 = 1e4;

const MAX_ITER: usize = 200;
const A_SCAN: (f64, f64, usize) = (0.2, 60.0, 90);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionOrder {
    Second,
    First,
}

impl TransitionOrder {
    pub fn name(self) -> &'static str {
        match self {
            TransitionOrder::Second => "second",
            TransitionOrder::First => "first",
        }
    }
}

/// Zero of `E₂` in `A`, classified by the sign of `E₄` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub a_star: f64,
    pub order: TransitionOrder,
    pub e2_residual: f64,
    pub e4_at_a_star: f64,
    pub bracket: (f64, f64),
}

/// Joint zero of `E₂` and `E₄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TricriticalPoint {
    pub family: TricriticalFamily,
    pub a_t: f64,
    /// `v1ᵗ` for double Yukawa, `κ1ᵗ` for Yukawa-Coulomb.
    pub param_t: f64,
    pub residuals: (f64, f64),
    pub jacobian_condition: f64,
}

/// Curve family along which tricritical points are sought.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TricriticalFamily {
    /// Fixed `κ1`, free `v1`.
    DoubleYukawa { kappa1: f64 },
    /// Free `κ1`.
    YukawaCoulomb,
}

impl TricriticalFamily {
    pub fn spec(&self, param: f64) -> Result<PotentialSpec> {
        match *self {
            TricriticalFamily::DoubleYukawa { kappa1 } => PotentialSpec::double_yukawa(param, kappa1),
            TricriticalFamily::YukawaCoulomb => PotentialSpec::yukawa_coulomb(param),
        }
    }

    /// Range of the free parameter scanned when no initial guess is given.
    fn default_range(&self) -> (f64, f64) {
        match *self {
            TricriticalFamily::DoubleYukawa { kappa1 } => {
                (double_yukawa_v1_bound(kappa1) * (1.0 + 1e-9), V1_DIVERGENCE_THRESHOLD)
            }
            TricriticalFamily::YukawaCoulomb => (0.3, 10.0),
        }
    }

    /// Grid in the free parameter, dense towards the lower end.
    fn scan_grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.default_range();
        match *self {
            TricriticalFamily::DoubleYukawa { kappa1 } => {
                let bound = double_yukawa_v1_bound(kappa1);
                let (xl, xh) = ((lo / bound - 1.0).ln(), (hi / bound - 1.0).ln());
                (0..n).map(|i| bound * (1.0 + (xl + (xh - xl) * i as f64 / (n - 1) as f64).exp())).collect()
            }
            TricriticalFamily::YukawaCoulomb => log_grid(lo, hi, n),
        }
    }
}

/// Power-law fit of `Δ − 1` against `A − a_ref`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: Vec<(f64, f64)>,
}

/// First-order coexistence of the square and rectangular branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderTransition {
    pub a_trans: f64,
    pub eps_jump: f64,
    pub eps_floor: f64,
    pub energy_square: f64,
    pub energy_rect: f64,
    /// `E₂` zero next to the coexistence point.
    pub a_star: f64,
    pub bracket: (f64, f64),
}

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n).map(|i| (l + (h - l) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `b = −dE₂/dA` by central differences with step `10⁻⁵ A`.
pub fn e2_slope(spec: &PotentialSpec, area: f64, q: &QuadratureConfig) -> Result<f64> {
    let h = 1e-5 * area;
    let up = e2_closed(spec, area + h, q)?;
    let down = e2_closed(spec, area - h, q)?;
    Ok(-(up - down) / (2.0 * h))
}

/// First bracket `[lo, hi]` with `E₂(lo) > 0 > E₂(hi)` on a logarithmic grid of `A`.
pub fn bracket_transition(spec: &PotentialSpec, q: &QuadratureConfig) -> Result<(f64, f64)> {
    let grid = log_grid(A_SCAN.0, A_SCAN.1, A_SCAN.2);
    let mut prev = (grid[0], e2_closed(spec, grid[0], q)?);
    for &a in &grid[1..] {
        let e = e2_closed(spec, a, q)?;
        if prev.1 > 0.0 && e < 0.0 {
            return Ok((prev.0, a));
        }
        prev = (a, e);
    }
    let f_lo = e2_closed(spec, grid[0], q)?;
    Err(Error::Bracket { lo: grid[0], hi: A_SCAN.1, f_lo, f_hi: prev.1 })
}

/// Bracket around a guess, widened geometrically; falls back to the full scan.
fn bracket_near(spec: &PotentialSpec, guess: f64, q: &QuadratureConfig) -> Result<(f64, f64)> {
    let mut s = 0.005;
    let e_mid = e2_closed(spec, guess, q)?;
    while s < 0.5 {
        if e_mid > 0.0 {
            let hi = guess * (1.0 + s);
            if e2_closed(spec, hi, q)? < 0.0 {
                return Ok((guess, hi));
            }
        } else {
            let lo = guess / (1.0 + s);
            if e2_closed(spec, lo, q)? > 0.0 {
                return Ok((lo, guess));
            }
        }
        s *= 2.0;
    }
    bracket_transition(spec, q)
}

fn e2_root(spec: &PotentialSpec, bracket: (f64, f64), q: &QuadratureConfig) -> Result<Root> {
    brent_root(|a| e2_closed(spec, a, q), bracket.0, bracket.1, 0.0, 1e-13, MAX_ITER)
}

/// Zero of `E₂` inside `a_bracket` (or the first one found by scanning).
pub fn find_transition(
    spec: &PotentialSpec,
    a_bracket: Option<(f64, f64)>,
    q: &QuadratureConfig,
) -> Result<TransitionPoint> {
    let bracket = match a_bracket {
        Some(b) => b,
        None => bracket_transition(spec, q)?,
    };
    transition_from_bracket(spec, bracket, q)
}

fn transition_from_bracket(spec: &PotentialSpec, bracket: (f64, f64), q: &QuadratureConfig) -> Result<TransitionPoint> {
    let root = e2_root(spec, bracket, q)?;
    let (e2, e4) = landau_pair(spec, root.x, q)?;
    Ok(TransitionPoint {
        a_star: root.x,
        order: if e4 > 0.0 { TransitionOrder::Second } else { TransitionOrder::First },
        e2_residual: e2,
        e4_at_a_star: e4,
        bracket: (root.lo, root.hi),
    })
}

/// Transition point seeded by a nearby `A` (warm start for sweeps).
pub fn find_transition_near(spec: &PotentialSpec, guess: f64, q: &QuadratureConfig) -> Result<TransitionPoint> {
    let bracket = bracket_near(spec, guess, q)?;
    transition_from_bracket(spec, bracket, q)
}

/// `E₄` along the critical curve: `(A*(p), E₄(A*(p)))`.
fn critical_e4(family: &TricriticalFamily, param: f64, guess: Option<f64>, q: &QuadratureConfig) -> Result<(f64, f64)> {
    let spec = family.spec(param)?;
    let t = match guess {
        Some(g) => find_transition_near(&spec, g, q)?,
        None => find_transition(&spec, None, q)?,
    };
    Ok((t.a_star, t.e4_at_a_star))
}

/// Joint zero of `E₂` and `E₄` in `(A, p)`.
///
/// With a guess, damped Newton on a finite-difference Jacobian is tried first.
/// Otherwise, or if Newton fails, `E₄` is followed along the critical curve
/// and its sign change is refined by nested root finding.
pub fn find_tricritical(
    family: TricriticalFamily,
    initial_guess: Option<(f64, f64)>,
    q: &QuadratureConfig,
) -> Result<TricriticalPoint> {
    if let Some(guess) = initial_guess {
        if let Ok(p) = newton_tricritical(&family, guess, q) {
            return Ok(p);
        }
    }
    let (a, p) = nested_tricritical(&family, initial_guess, q)?;
    newton_tricritical(&family, (a, p), q).or_else(|_| finish_point(&family, a, p, q))
}

fn nested_tricritical(
    family: &TricriticalFamily,
    initial_guess: Option<(f64, f64)>,
    q: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let grid = family.scan_grid(40);
    let mut warm: Option<f64> = None;
    let mut prev: Option<(f64, f64, f64)> = None;
    let mut bracket = None;
    // walk from large to small parameter so the sign change is met from the second-order side
    let order: Vec<f64> = match initial_guess {
        Some((_, p)) => {
            let mut g = grid.clone();
            g.sort_by(|x, y| (x - p).abs().total_cmp(&(y - p).abs()));
            g.truncate(6);
            g.sort_by(|x, y| y.total_cmp(x));
            g
        }
        None => grid.iter().rev().copied().collect(),
    };
    for &p in &order {
        let (a, e4) = match critical_e4(family, p, warm, q) {
            Ok(v) => v,
            Err(_) => {
                prev = None;
                continue;
            }
        };
        warm = Some(a);
        if let Some((pp, pa, pe)) = prev {
            if pe.signum() != e4.signum() {
                bracket = Some((p, pp, pa));
                break;
            }
        }
        prev = Some((p, a, e4));
    }
    let Some((lo, hi, a_warm)) = bracket else {
        return Err(Error::NonConvergence(format!(
            "no sign change of E4 along the critical curve for {family:?}"
        )));
    };
    let mut warm = a_warm;
    let root = brent_root(
        |p| {
            let (a, e4) = critical_e4(family, p, Some(warm), q)?;
            warm = a;
            Ok(e4)
        },
        lo,
        hi,
        0.0,
        1e-14,
        MAX_ITER,
    )?;
    let (a, _) = critical_e4(family, root.x, Some(warm), q)?;
    Ok((a, root.x))
}

fn finish_point(family: &TricriticalFamily, a: f64, p: f64, q: &QuadratureConfig) -> Result<TricriticalPoint> {
    let spec = family.spec(p)?;
    let (e2, e4) = landau_pair(&spec, a, q)?;
    let jac = tricritical_jacobian(family, a, p, (e2, e4), q)?;
    Ok(TricriticalPoint {
        family: *family,
        a_t: a,
        param_t: p,
        residuals: (e2, e4),
        jacobian_condition: scaled_condition(&jac, a, p),
    })
}

fn residual(family: &TricriticalFamily, a: f64, p: f64, q: &QuadratureConfig) -> Result<(f64, f64)> {
    landau_pair(&family.spec(p)?, a, q)
}

fn tricritical_jacobian(
    family: &TricriticalFamily,
    a: f64,
    p: f64,
    f0: (f64, f64),
    q: &QuadratureConfig,
) -> Result<[[f64; 2]; 2]> {
    let (ha, hp) = (1e-6 * a, 1e-6 * p);
    let fa = residual(family, a + ha, p, q)?;
    let fp = residual(family, a, p + hp, q)?;
    Ok([
        [(fa.0 - f0.0) / ha, (fp.0 - f0.0) / hp],
        [(fa.1 - f0.1) / ha, (fp.1 - f0.1) / hp],
    ])
}

/// Condition number of the Jacobian in relative variables with unit-norm rows.
fn scaled_condition(j: &[[f64; 2]; 2], a: f64, p: f64) -> f64 {
    let mut m = [[j[0][0] * a, j[0][1] * p], [j[1][0] * a, j[1][1] * p]];
    for row in m.iter_mut() {
        let n = row[0].hypot(row[1]);
        if n > 0.0 {
            row[0] /= n;
            row[1] /= n;
        }
    }
    let fro2 = m.iter().flatten().map(|x| x * x).sum::<f64>();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let smax = (0.5 * (fro2 + disc)).sqrt();
    let smin = (0.5 * (fro2 - disc)).max(0.0).sqrt();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

fn newton_tricritical(family: &TricriticalFamily, guess: (f64, f64), q: &QuadratureConfig) -> Result<TricriticalPoint> {
    let (mut a, mut p) = guess;
    let mut f = residual(family, a, p, q)?;
    let mut trace = Vec::new();
    for _ in 0..40 {
        let j = tricritical_jacobian(family, a, p, f, q)?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NonConvergence(format!("singular Jacobian at A = {a}, p = {p}")));
        }
        let da = -(j[1][1] * f.0 - j[0][1] * f.1) / det;
        let dp = -(-j[1][0] * f.0 + j[0][0] * f.1) / det;
        let s0 = (j[0][0] * a).abs() + (j[0][1] * p).abs();
        let s1 = (j[1][0] * a).abs() + (j[1][1] * p).abs();
        let scale = move |r: (f64, f64)| (r.0 / s0).abs().max((r.1 / s1).abs());
        let norm = scale(f);
        trace.push((a, p, norm));
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-4 {
            let (na, np) = (a + lambda * da, p + lambda * dp);
            if na > 0.0 && np > 0.0 {
                if let Ok(nf) = residual(family, na, np, q) {
                    if scale(nf) < norm || scale(nf) <= 1e-15 {
                        accepted = Some((na, np, nf));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let Some((na, np, nf)) = accepted else {
            if norm < 1e-12 {
                return finish_point(family, a, p, q);
            }
            return Err(Error::NonConvergence(format!("damped Newton stalled; trace {trace:?}")));
        };
        let step = ((na - a) / a).abs().max(((np - p) / p).abs());
        a = na;
        p = np;
        f = nf;
        if step < 1e-14 || scale(f) < 1e-15 {
            return finish_point(family, a, p, q);
        }
    }
    Err(Error::NonConvergence(format!("damped Newton exceeded 40 iterations; trace {trace:?}")))
}

/// `E₄` where the critical curve at fixed `κ1` reaches `v1`.
fn e4_on_curve_dy(kappa1: f64, v1: f64, q: &QuadratureConfig) -> Result<f64> {
    let (_, e4) = critical_e4(&TricriticalFamily::DoubleYukawa { kappa1 }, v1, None, q)?;
    Ok(e4)
}

/// `E₄` on the critical curve at `v1 = `[`V1_DIVERGENCE_THRESHOLD`]; positive
/// once `v1ᵗ(κ1)` has dropped below the threshold.
pub fn lower_indicator(kappa1: f64, q: &QuadratureConfig) -> Result<f64> {
    e4_on_curve_dy(kappa1, V1_DIVERGENCE_THRESHOLD, q)
}

/// `E₄` on the critical curve at the admissibility bound `v1 = e^{κ1}/κ1`;
/// negative while the tricritical point lies inside the admissible region.
pub fn upper_indicator(kappa1: f64, q: &QuadratureConfig) -> Result<f64> {
    e4_on_curve_dy(kappa1, double_yukawa_v1_bound(kappa1) * (1.0 + 1e-12), q)
}

/// Lower end `κ1^L` of the double Yukawa tricritical locus: the `κ1` at which
/// `v1ᵗ(κ1)` reaches [`V1_DIVERGENCE_THRESHOLD`].
pub fn kappa1_lower(bracket: (f64, f64), q: &QuadratureConfig) -> Result<f64> {
    Ok(brent_root(|k| lower_indicator(k, q), bracket.0, bracket.1, 0.0, 1e-10, MAX_ITER)?.x)
}

/// Upper end `κ1^U` of the double Yukawa tricritical locus: the `κ1` at which
/// `v1ᵗ(κ1)` meets the admissibility bound `e^{κ1}/κ1`.
pub fn kappa1_upper(bracket: (f64, f64), q: &QuadratureConfig) -> Result<f64> {
    Ok(brent_root(|k| upper_indicator(k, q), bracket.0, bracket.1, 0.0, 1e-12, MAX_ITER)?.x)
}

/// Free parameter at which `E₂(A) = 0` for fixed `A` (critical curve read
/// along `A`), seeded by `guess` when given.
pub fn critical_parameter(
    family: &TricriticalFamily,
    area: f64,
    guess: Option<f64>,
    q: &QuadratureConfig,
) -> Result<f64> {
    let e2 = |p: f64| -> Result<f64> { e2_closed(&family.spec(p)?, area, q) };
    let mut grid = family.scan_grid(60);
    if let Some(g) = guess {
        grid.sort_by(|x, y| (x - g).abs().total_cmp(&(y - g).abs()));
        let nearest = grid[0];
        grid = family.scan_grid(60);
        let i = grid.iter().position(|&x| x == nearest).unwrap_or(0);
        // walk outwards from the guess
        let mut order = vec![i];
        for k in 1..grid.len() {
            if i + k < grid.len() {
                order.push(i + k);
            }
            if k <= i {
                order.push(i - k);
            }
        }
        let mut seen: Vec<(usize, f64)> = Vec::new();
        for idx in order {
            let v = e2(grid[idx])?;
            for &(j, w) in &seen {
                if j.abs_diff(idx) == 1 && w.signum() != v.signum() {
                    let (lo, hi) = (grid[j.min(idx)], grid[j.max(idx)]);
                    return Ok(brent_root(e2, lo, hi, 0.0, 1e-14, MAX_ITER)?.x);
                }
            }
            seen.push((idx, v));
        }
    } else {
        let mut prev = (grid[0], e2(grid[0])?);
        for &p in &grid[1..] {
            let v = e2(p)?;
            if v.signum() != prev.1.signum() {
                return Ok(brent_root(e2, prev.0, p, 0.0, 1e-14, MAX_ITER)?.x);
            }
            prev = (p, v);
        }
    }
    let (lo, hi) = family.default_range();
    Err(Error::Bracket { lo, hi, f_lo: e2(lo)?, f_hi: e2(hi)? })
}

/// Minimizer of `E(A, e^ε)` over `ε ∈ [eps_floor, eps_cap]` on the canonical
/// branch; returns `(ε_min, E(A, e^{ε_min}))`.
pub fn minimize_aspect(
    spec: &PotentialSpec,
    area: f64,
    q: &QuadratureConfig,
    eps_floor: f64,
) -> Result<(f64, f64)> {
    minimize_aspect_capped(spec, area, q, eps_floor, DEFAULT_EPS_CAP)
}

pub fn minimize_aspect_capped(
    spec: &PotentialSpec,
    area: f64,
    q: &QuadratureConfig,
    eps_floor: f64,
    eps_cap: f64,
) -> Result<(f64, f64)> {
    if !(eps_floor >= 0.0) || !(eps_cap > eps_floor) {
        return Err(Error::Domain(format!("need 0 <= eps_floor < eps_cap, got {eps_floor}, {eps_cap}")));
    }
    let profile = EnergyProfile::new(spec, area, q)?;
    let e0 = lattice_energy(spec, LatticeState::square(area)?, q)?;
    let (eps, delta) = profile_minimum(&profile, eps_floor, eps_cap)?;
    Ok((eps, e0 + delta))
}

/// Minimum of the profile on `[floor, cap]`: `(ε, ΔE)`.
pub(crate) fn profile_minimum(profile: &EnergyProfile, floor: f64, cap: f64) -> Result<(f64, f64)> {
    let mut grid = vec![floor];
    let start = if floor > 0.0 { floor } else { 1e-7 };
    grid.extend(log_grid(start, cap, 90).into_iter().filter(|&e| e > floor));
    let values: Vec<f64> = grid.iter().map(|&e| profile.delta(e)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Search(format!("non-finite energy on the aspect grid at A = {}", profile.area)));
    }
    let (imin, _) = values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .ok_or_else(|| Error::Search("empty aspect grid".into()))?;
    if imin == 0 && values.len() > 1 && values[1] >= values[0] {
        return Ok((grid[0], values[0]));
    }
    if imin == grid.len() - 1 {
        return Ok((grid[imin], values[imin]));
    }
    let lo = grid[imin.saturating_sub(1)];
    let hi = grid[imin + 1];
    let (x, fx) = brent_minimize(|e| Ok(profile.delta(e)), lo, hi, 1e-15, MAX_ITER)?;
    if fx <= values[imin] {
        Ok((x, fx))
    } else {
        Ok((grid[imin], values[imin]))
    }
}

/// First-order transition: `A` at which the best `ε ≥ eps_floor` state has the
/// energy of the square lattice.
pub fn find_first_order(
    spec: &PotentialSpec,
    a_bracket: Option<(f64, f64)>,
    eps_floor: Option<f64>,
    q: &QuadratureConfig,
) -> Result<FirstOrderTransition> {
    let t = find_transition(spec, a_bracket, q)?;
    if t.order != TransitionOrder::First {
        return Err(Error::Classification(format!(
            "E4 = {:e} > 0 at A* = {}; the transition is second order",
            t.e4_at_a_star, t.a_star
        )));
    }
    let a_star = t.a_star;
    let series = expansion_series(spec, a_star, q)?;
    let e4 = series.e4;
    let e6 = series.e6.unwrap_or(f64::NAN);
    let b = e2_slope(spec, a_star, q)?;
    let landau_ok = e6 > 0.0 && b > 0.0;
    let eps_landau = if landau_ok { (-e4 / (2.0 * e6)).sqrt() } else { 0.1 };
    let shift = if landau_ok { e4 * e4 / (4.0 * e6 * b) } else { 1e-6 * a_star };
    let a_est = a_star - shift;

    let floor = match eps_floor {
        Some(f) => f,
        None => {
            let profile = EnergyProfile::new(spec, a_est, q)?;
            barrier_peak(&profile, eps_landau).map(|p| 0.5 * p).unwrap_or(0.25 * eps_landau)
        }
    };
    let g = |a: f64| -> Result<f64> {
        let profile = EnergyProfile::new(spec, a, q)?;
        Ok(-profile_minimum(&profile, floor, DEFAULT_EPS_CAP)?.1)
    };
    let hi = a_star;
    if g(hi)? <= 0.0 {
        return Err(Error::Classification(format!(
            "no rectangular branch below the square energy at A* = {a_star} above eps_floor = {floor}"
        )));
    }
    let mut step = 2.0 * shift.max(1e-14 * a_star);
    let mut lo = a_star - step;
    let mut found = false;
    for _ in 0..60 {
        if g(lo)? < 0.0 {
            found = true;
            break;
        }
        step *= 2.0;
        lo = a_star - step;
        if lo <= 0.0 {
            break;
        }
    }
    if !found {
        return Err(Error::Classification(format!("square branch never prevails below A* = {a_star}")));
    }
    let root = brent_root(g, lo, hi, 0.0, 1e-14, MAX_ITER)?;
    let a_trans = root.x;
    let profile = EnergyProfile::new(spec, a_trans, q)?;
    let (eps_jump, delta) = profile_minimum(&profile, floor, DEFAULT_EPS_CAP)?;
    if !(eps_jump > floor) {
        return Err(Error::Classification(format!("branch minimum sits on eps_floor = {floor}")));
    }
    let energy_square = lattice_energy(spec, LatticeState::square(a_trans)?, q)?;
    Ok(FirstOrderTransition {
        a_trans,
        eps_jump,
        eps_floor: floor,
        energy_square,
        energy_rect: energy_square + delta,
        a_star,
        bracket: (root.lo, root.hi),
    })
}

/// Location of the energy barrier (interior local maximum) below `eps_hint`·4.
fn barrier_peak(profile: &EnergyProfile, eps_hint: f64) -> Option<f64> {
    let n = 200;
    let hi = (4.0 * eps_hint).min(DEFAULT_EPS_CAP);
    let grid: Vec<f64> = (1..=n).map(|i| hi * i as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&e| profile.delta(e)).collect();
    (1..n - 1).find(|&i| vals[i] > 0.0 && vals[i] >= vals[i - 1] && vals[i] > vals[i + 1]).map(|i| grid[i])
}

/// `Δ − 1` at `A = a_ref + δ` for each `δ`, fitted to `amplitude · δ^β`.
pub fn fit_exponent(spec: &PotentialSpec, a_ref: f64, deltas: &[f64], q: &QuadratureConfig) -> Result<FitResult> {
    if deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Domain("fit offsets must be positive".into()));
    }
    let mut samples = Vec::new();
    for &d in deltas {
        let (eps, _) = minimize_aspect(spec, a_ref + d, q, 0.0)?;
        if eps > 0.0 {
            samples.push((d, eps.exp_m1()));
        }
    }
    if samples.len() < 8 {
        return Err(Error::PoorFit { r_squared: f64::NAN, residuals: Vec::new() });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - beta * x).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = 1.0 - ss_res / syy;
    if !(r_squared > 0.999) {
        return Err(Error::PoorFit { r_squared, residuals });
    }
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().copied().fold(0.0, f64::max);
    Ok(FitResult { beta, amplitude: intercept.exp(), r_squared, window: (lo, hi), samples })
}

/// Default fit offsets: 12 geometric values from `10⁻¹⁰ a_ref` to `10⁻⁷ a_ref`.
pub fn default_fit_deltas(a_ref: f64) -> Vec<f64> {
    log_grid(1e-10 * a_ref, 1e-7 * a_ref, 12)
}

/// Second-order amplitude `√(b/(2E₄))` of `ε ≈ amplitude · √(A − A*)`.
pub fn second_order_amplitude(spec: &PotentialSpec, a_star: f64, q: &QuadratureConfig) -> Result<f64> {
    let b = e2_slope(spec, a_star, q)?;
    let (_, e4) = landau_pair(spec, a_star, q)?;
    Ok((b / (2.0 * e4)).sqrt())
}

/// `E₂`-type integral of the large-`v1` limiting measure, scaled by the
/// positive factor `e^{κ1 √A}`.
fn a_star_min_residual(kappa1: f64, area: f64, q: &QuadratureConfig) -> Result<f64> {
    let c = kappa1 * kappa1 * area / 4.0;
    let gap = (1.0 + kappa1) * area / 2.0;
    let lift = kappa1 * area.sqrt();
    let weight = move |t: f64| (lift - c / t).exp() / t.sqrt() * (1.0 - gap / t);
    Ok(modular_integral(|u| [e2_bracket(u)], weight, q)?.value[0])
}

/// Critical inverse density in the limit `v1 → ∞` at fixed `κ1`.
pub fn a_star_min(kappa1: f64, q: &QuadratureConfig) -> Result<f64> {
    if !(kappa1 > 0.0) || !kappa1.is_finite() {
        return Err(Error::Domain(format!("kappa1 must be positive, got {kappa1}")));
    }
    let f = |a: f64| a_star_min_residual(kappa1, a, q);
    // A*_min ≈ 1 + 2/κ1 for large κ1 and stays below 5.72 as κ1 → 0
    let guess = (1.0 + 2.0 / kappa1).min(5.7);
    let f_guess = f(guess)?;
    let mut s = 0.02;
    while s < 4.0 {
        let other = if f_guess > 0.0 { guess * (1.0 + s) } else { guess / (1.0 + s) };
        if f(other)?.signum() != f_guess.signum() {
            let (lo, hi) = if other > guess { (guess, other) } else { (other, guess) };
            return Ok(brent_root(f, lo, hi, 0.0, 1e-14, MAX_ITER)?.x);
        }
        s *= 2.0;
    }
    Err(Error::Bracket { lo: guess / (1.0 + s), hi: guess * (1.0 + s), f_lo: f_guess, f_hi: f_guess })
}

/// `A*_min` as `κ1 → 0⁺`: `2 ∫ B₂ t^{-1/2} dt / ∫ B₂ t^{-3/2} dt`.
pub fn a_star_min_zero_limit(q: &QuadratureConfig) -> Result<f64> {
    let (num, den) = a_star_min_zero_limit_parts(q)?;
    Ok(2.0 * num / den)
}

/// Numerator and denominator integrals of [`a_star_min_zero_limit`].
pub fn a_star_min_zero_limit_parts(q: &QuadratureConfig) -> Result<(f64, f64)> {
    let r = modular_integral(|u| [e2_bracket(u)], |t: f64| 1.0 / t.sqrt(), q)?;
    let s = modular_integral(|u| [e2_bracket(u)], |t: f64| 1.0 / (t * t.sqrt()), q)?;
    Ok((r.value[0], s.value[0]))
}
