//! Parameter sweeps producing phase-diagram rows.
//!
//! Grid points are processed in fixed chunks of [`CHUNK`] consecutive points.
//! Inside a chunk each solve is seeded by its predecessor; chunks run on a
//! worker pool and are reassembled in grid order, so output does not depend
//! on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical::{
    a_star_min, find_first_order, find_transition, find_transition_near, find_tricritical,
    kappa1_lower, kappa1_upper, lower_indicator, upper_indicator, critical_parameter,
    TransitionOrder, TransitionPoint, TricriticalFamily, DEFAULT_EPS_CAP,
};
use crate::error::{Error, Result};
use crate::expansion::landau_pair;
use crate::potential::{double_yukawa_v1_bound, Family};
use crate::quadrature::QuadratureConfig;

/// Consecutive grid points solved sequentially with warm starts.
pub const CHUNK: usize = 8;

/// Default number of points per sweep.
pub const DEFAULT_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub quadrature: QuadratureConfig,
    pub workers: usize,
    /// Insert midpoints next to a detected tricritical point.
    pub refine: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { quadrature: QuadratureConfig::default(), workers: 1, refine: true }
    }
}

/// Row status values.
pub mod status {
    pub const OK: &str = "ok";
    /// `E₂ = 0` inside the first-order region (not a physical transition).
    pub const PROLONGATION: &str = "prolongation";
    pub const TRICRITICAL: &str = "tricritical";
    pub const KAPPA1_LOWER: &str = "kappa1-lower";
    pub const KAPPA1_UPPER: &str = "kappa1-upper";
    pub const OUT_OF_DOMAIN: &str = "out-of-domain";
    /// The rectangular branch minimum sits on the aspect-ratio cap.
    pub const EPS_CAP: &str = "eps-cap";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramRow {
    pub family: Family,
    pub kappa1: f64,
    pub v1: Option<f64>,
    pub a_star: Option<f64>,
    pub order: Option<TransitionOrder>,
    pub eps_jump: Option<f64>,
    pub e2_residual: Option<f64>,
    pub e4_value: Option<f64>,
    pub status: String,
}

impl PhaseDiagramRow {
    fn empty(family: Family, kappa1: f64, v1: Option<f64>, status: String) -> Self {
        PhaseDiagramRow {
            family,
            kappa1,
            v1,
            a_star: None,
            order: None,
            eps_jump: None,
            e2_residual: None,
            e4_value: None,
            status,
        }
    }

    fn failed(family: Family, kappa1: f64, v1: Option<f64>, err: &Error) -> Self {
        Self::empty(family, kappa1, v1, format!("failed: {err}"))
    }
}

/// Sweep axis of a critical-curve scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveGrid {
    /// Free parameter (`v1` for double Yukawa, `κ1` for Yukawa-Coulomb).
    Param(Vec<f64>),
    /// Inverse density `A`; the free parameter is solved for.
    Area(Vec<f64>),
}

impl CurveGrid {
    fn values(&self) -> &[f64] {
        match self {
            CurveGrid::Param(v) | CurveGrid::Area(v) => v,
        }
    }
}

fn check_monotone(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("grid values must be finite".into()));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::Domain("grid must be strictly monotone".into()));
    }
    Ok(())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Contract(format!("worker pool: {e}")))
}

/// Runs `solve` over fixed chunks in parallel and concatenates in grid order.
fn chunked<T: Sync, R: Send, F>(items: &[T], workers: usize, solve: F) -> Result<Vec<R>>
where
    F: Fn(&[T]) -> Vec<R> + Sync,
{
    let pool = pool(workers)?;
    let parts: Vec<Vec<R>> = pool.install(|| items.par_chunks(CHUNK).map(&solve).collect());
    Ok(parts.into_iter().flatten().collect())
}

/// One grid point of a critical curve: `(param, transition)`.
type CurvePoint = (f64, Result<TransitionPoint>);

fn curve_family(family: Family, kappa1: Option<f64>) -> Result<TricriticalFamily> {
    match family {
        Family::DoubleYukawa => {
            let k = kappa1.ok_or_else(|| Error::Domain("double Yukawa scan needs kappa1".into()))?;
            Ok(TricriticalFamily::DoubleYukawa { kappa1: k })
        }
        Family::YukawaCoulomb => Ok(TricriticalFamily::YukawaCoulomb),
        other => Err(Error::Domain(format!("no critical curve for the {other} family"))),
    }
}

fn solve_curve_chunk(fam: &TricriticalFamily, grid: &CurveGrid, chunk: &[f64], q: &QuadratureConfig) -> Vec<CurvePoint> {
    let mut warm: Option<(f64, f64)> = None;
    chunk
        .iter()
        .map(|&x| {
            let res = (|| -> Result<(f64, TransitionPoint)> {
                match grid {
                    CurveGrid::Param(_) => {
                        let spec = fam.spec(x)?;
                        let t = match warm {
                            Some((_, a)) => find_transition_near(&spec, a, q)?,
                            None => find_transition(&spec, None, q)?,
                        };
                        Ok((x, t))
                    }
                    CurveGrid::Area(_) => {
                        let p = critical_parameter(fam, x, warm.map(|w| w.0), q)?;
                        let spec = fam.spec(p)?;
                        let (e2, e4) = landau_pair(&spec, x, q)?;
                        let order = if e4 > 0.0 { TransitionOrder::Second } else { TransitionOrder::First };
                        Ok((p, TransitionPoint { a_star: x, order, e2_residual: e2, e4_at_a_star: e4, bracket: (x, x) }))
                    }
                }
            })();
            match res {
                Ok((p, t)) => {
                    warm = Some((p, t.a_star));
                    (p, Ok(t))
                }
                Err(e) => {
                    warm = None;
                    (if matches!(grid, CurveGrid::Param(_)) { x } else { f64::NAN }, Err(e))
                }
            }
        })
        .collect()
}

fn family_kappa(fam: &TricriticalFamily, param: f64) -> (f64, Option<f64>) {
    match *fam {
        TricriticalFamily::DoubleYukawa { kappa1 } => (kappa1, Some(param)),
        TricriticalFamily::YukawaCoulomb => (param, Some(double_yukawa_v1_bound(param))),
    }
}

/// Expands one curve point into rows: a second-order row, or a prolongation
/// row plus the first-order coexistence row.
fn rows_for_point(fam: &TricriticalFamily, family: Family, point: &CurvePoint, q: &QuadratureConfig) -> Vec<PhaseDiagramRow> {
    let (param, res) = point;
    let (kappa1, v1) = family_kappa(fam, *param);
    let t = match res {
        Ok(t) => t,
        Err(e) => return vec![PhaseDiagramRow::failed(family, kappa1, v1, e)],
    };
    let row = PhaseDiagramRow {
        family,
        kappa1,
        v1,
        a_star: Some(t.a_star),
        order: Some(t.order),
        eps_jump: Some(0.0),
        e2_residual: Some(t.e2_residual),
        e4_value: Some(t.e4_at_a_star),
        status: status::OK.into(),
    };
    if t.order == TransitionOrder::Second {
        return vec![row];
    }
    let mut prolongation = row.clone();
    prolongation.status = status::PROLONGATION.into();
    prolongation.eps_jump = None;
    let first = fam.spec(*param).and_then(|spec| {
        let width = 1e-3 * t.a_star;
        let f = find_first_order(&spec, Some((t.a_star - width, t.a_star + width)), None, q)?;
        let (e2, e4) = landau_pair(&spec, f.a_trans, q)?;
        Ok((f, e2, e4))
    });
    let first_row = match first {
        Ok((f, e2, e4)) => PhaseDiagramRow {
            family,
            kappa1,
            v1,
            a_star: Some(f.a_trans),
            order: Some(TransitionOrder::First),
            eps_jump: Some(f.eps_jump),
            e2_residual: Some(e2),
            e4_value: Some(e4),
            status: if f.eps_jump >= DEFAULT_EPS_CAP * (1.0 - 1e-9) { status::EPS_CAP } else { status::OK }.into(),
        },
        Err(e) => PhaseDiagramRow::failed(family, kappa1, v1, &e),
    };
    vec![prolongation, first_row]
}

fn tricritical_row(fam: &TricriticalFamily, family: Family, a: f64, p: f64, q: &QuadratureConfig) -> PhaseDiagramRow {
    let (kappa1, v1) = family_kappa(fam, p);
    match find_tricritical(*fam, Some((a, p)), q) {
        Ok(t) => {
            let (kappa1, v1) = family_kappa(fam, t.param_t);
            PhaseDiagramRow {
                family,
                kappa1,
                v1,
                a_star: Some(t.a_t),
                order: None,
                eps_jump: Some(0.0),
                e2_residual: Some(t.residuals.0),
                e4_value: Some(t.residuals.1),
                status: status::TRICRITICAL.into(),
            }
        }
        Err(e) => PhaseDiagramRow::failed(family, kappa1, v1, &e),
    }
}

fn sweep_key(fam: &TricriticalFamily, row: &PhaseDiagramRow) -> f64 {
    match fam {
        TricriticalFamily::DoubleYukawa { .. } => row.v1.unwrap_or(f64::NAN),
        TricriticalFamily::YukawaCoulomb => row.kappa1,
    }
}

fn scan_curve(fam: TricriticalFamily, family: Family, grid: &CurveGrid, cfg: &ScanConfig) -> Result<Vec<PhaseDiagramRow>> {
    check_monotone(grid.values())?;
    let q = &cfg.quadrature;
    let mut values: Vec<f64> = grid.values().to_vec();
    let mut points = chunked(&values, cfg.workers, |c| solve_curve_chunk(&fam, grid, c, q))?;

    // E₄ sign change between neighbours marks the end of the second-order line
    let change = points.windows(2).position(|w| match (&w[0].1, &w[1].1) {
        (Ok(a), Ok(b)) => a.e4_at_a_star.signum() != b.e4_at_a_star.signum(),
        _ => false,
    });
    let mut tri_seed = None;
    if let Some(i) = change {
        if let (Ok(a), Ok(b)) = (&points[i].1, &points[i + 1].1) {
            let (wa, wb) = (a.e4_at_a_star.abs(), b.e4_at_a_star.abs());
            let s = wa / (wa + wb);
            tri_seed = Some((
                a.a_star + s * (b.a_star - a.a_star),
                points[i].0 + s * (points[i + 1].0 - points[i].0),
            ));
        }
        if cfg.refine {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(values.len() - 1);
            let mids: Vec<f64> = (lo..hi).map(|k| 0.5 * (values[k] + values[k + 1])).collect();
            let extra = chunked(&mids, cfg.workers, |c| solve_curve_chunk(&fam, grid, c, q))?;
            let mut merged: Vec<(f64, CurvePoint)> = values.iter().copied().zip(points).collect();
            merged.extend(mids.iter().copied().zip(extra));
            let ascending = values.len() < 2 || values[1] > values[0];
            merged.sort_by(|x, y| if ascending { x.0.total_cmp(&y.0) } else { y.0.total_cmp(&x.0) });
            values = merged.iter().map(|m| m.0).collect();
            points = merged.into_iter().map(|m| m.1).collect();
        }
    }
    let expanded = chunked(&points, cfg.workers, |c| {
        c.iter().map(|p| rows_for_point(&fam, family, p, q)).collect::<Vec<_>>()
    })?;
    let mut rows: Vec<PhaseDiagramRow> = expanded.into_iter().flatten().collect();
    if let Some((a, p)) = tri_seed {
        let tri = tricritical_row(&fam, family, a, p, q);
        let key = sweep_key(&fam, &tri);
        let ascending = values.len() < 2 || values[1] > values[0];
        let pos = rows
            .iter()
            .position(|r| {
                let k = sweep_key(&fam, r);
                if ascending { k > key } else { k < key }
            })
            .unwrap_or(rows.len());
        rows.insert(pos, tri);
    }
    Ok(rows)
}

/// Critical curve of the double Yukawa model at fixed `κ1`.
pub fn scan_critical_curve(kappa1: f64, grid: &CurveGrid, cfg: &ScanConfig) -> Result<Vec<PhaseDiagramRow>> {
    let fam = curve_family(Family::DoubleYukawa, Some(kappa1))?;
    scan_curve(fam, Family::DoubleYukawa, grid, cfg)
}

/// Second-order line, first-order locus and tricritical row of the
/// Yukawa-Coulomb model.
pub fn scan_yukawa_coulomb(grid: &CurveGrid, cfg: &ScanConfig) -> Result<Vec<PhaseDiagramRow>> {
    scan_curve(TricriticalFamily::YukawaCoulomb, Family::YukawaCoulomb, grid, cfg)
}

/// Tricritical coordinates along `κ1` with the ends of the locus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TricriticalLocus {
    pub rows: Vec<PhaseDiagramRow>,
    pub kappa1_lower: Option<f64>,
    pub kappa1_upper: Option<f64>,
}

impl TricriticalLocus {
    /// Locus rows followed by one row per located boundary.
    pub fn into_rows(self) -> Vec<PhaseDiagramRow> {
        let mut rows = self.rows;
        if let Some(k) = self.kappa1_lower {
            rows.push(PhaseDiagramRow::empty(Family::DoubleYukawa, k, None, status::KAPPA1_LOWER.into()));
        }
        if let Some(k) = self.kappa1_upper {
            let v1 = Some(double_yukawa_v1_bound(k));
            rows.push(PhaseDiagramRow::empty(Family::DoubleYukawa, k, v1, status::KAPPA1_UPPER.into()));
        }
        rows
    }
}

pub fn scan_tricritical_locus(kappa1_grid: &[f64], cfg: &ScanConfig) -> Result<TricriticalLocus> {
    check_monotone(kappa1_grid)?;
    if kappa1_grid.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::Domain("kappa1 grid must be positive".into()));
    }
    let q = &cfg.quadrature;
    let rows = chunked(kappa1_grid, cfg.workers, |chunk| {
        let mut warm: Option<(f64, f64)> = None;
        chunk
            .iter()
            .map(|&k| {
                let fam = TricriticalFamily::DoubleYukawa { kappa1: k };
                match find_tricritical(fam, warm, q) {
                    Ok(t) => {
                        warm = Some((t.a_t, t.param_t));
                        PhaseDiagramRow {
                            family: Family::DoubleYukawa,
                            kappa1: k,
                            v1: Some(t.param_t),
                            a_star: Some(t.a_t),
                            order: None,
                            eps_jump: Some(0.0),
                            e2_residual: Some(t.residuals.0),
                            e4_value: Some(t.residuals.1),
                            status: status::TRICRITICAL.into(),
                        }
                    }
                    Err(e) => {
                        warm = None;
                        PhaseDiagramRow::empty(Family::DoubleYukawa, k, None, format!("{}: {e}", status::OUT_OF_DOMAIN))
                    }
                }
            })
            .collect()
    })?;
    let lower = boundary(kappa1_grid, cfg, lower_indicator, kappa1_lower, (1.2, 1.9));
    let upper = boundary(kappa1_grid, cfg, upper_indicator, kappa1_upper, (1.9, 2.3));
    Ok(TricriticalLocus { rows, kappa1_lower: lower, kappa1_upper: upper })
}

/// Boundary from a sign change of `indicator` on the grid, else from the
/// default bracket when it lies inside the grid span.
fn boundary(
    grid: &[f64],
    cfg: &ScanConfig,
    indicator: fn(f64, &QuadratureConfig) -> Result<f64>,
    refine: fn((f64, f64), &QuadratureConfig) -> Result<f64>,
    default: (f64, f64),
) -> Option<f64> {
    let q = &cfg.quadrature;
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(0.0, f64::max);
    let bracket = (default.0.max(lo), default.1.min(hi));
    if !(bracket.1 > bracket.0) {
        return None;
    }
    let (a, b) = (indicator(bracket.0, q).ok()?, indicator(bracket.1, q).ok()?);
    if a.signum() == b.signum() {
        return None;
    }
    refine(bracket, q).ok()
}

/// `A*_min(κ1)` along a grid.
pub fn scan_a_star_min(kappa1_grid: &[f64], cfg: &ScanConfig) -> Result<Vec<PhaseDiagramRow>> {
    check_monotone(kappa1_grid)?;
    let q = &cfg.quadrature;
    chunked(kappa1_grid, cfg.workers, |chunk| {
        chunk
            .iter()
            .map(|&k| match a_star_min(k, q) {
                Ok(a) => {
                    let mut r = PhaseDiagramRow::empty(Family::DoubleYukawa, k, None, status::OK.into());
                    r.a_star = Some(a);
                    r
                }
                Err(e) => PhaseDiagramRow::failed(Family::DoubleYukawa, k, None, &e),
            })
            .collect()
    })
}

/// Grid `lo:hi:{lin|log}:N`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Domain(format!("grid must look like lo:hi:lin:N or lo:hi:log:N, got {text:?}"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[3].trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if n > 1 && lo == hi {
        return Err(Error::Domain(format!("grid {text:?} has identical ends")));
    }
    let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    match parts[2].trim() {
        "lin" => Ok((0..n).map(|i| lo + (hi - lo) * t(i)).collect()),
        "log" => {
            if !(lo > 0.0 && hi > 0.0) {
                return Err(Error::Domain(format!("log grid needs positive ends, got {text:?}")));
            }
            let (l, h) = (lo.ln(), hi.ln());
            Ok((0..n).map(|i| (l + (h - l) * t(i)).exp()).collect())
        }
        _ => Err(bad()),
    }
}
