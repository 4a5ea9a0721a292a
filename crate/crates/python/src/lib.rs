//! Python bindings for rectangular-lattice energies and transitions.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rectlattice::critical::{self, TransitionOrder, TricriticalFamily};
use rectlattice::energy::{self, LatticeState};
use rectlattice::expansion;
use rectlattice::phasescan::{self, CurveGrid, PhaseDiagramRow, ScanConfig};
use rectlattice::potential::PotentialSpec;
use rectlattice::quadrature::QuadratureConfig;
use rectlattice::Error;

create_exception!(rectlattice_py, DomainError, PyValueError, "Parameter outside the admissible domain.");
create_exception!(rectlattice_py, NumericalError, PyRuntimeError, "Quadrature, bracketing or fit failure.");
create_exception!(rectlattice_py, NonConvergenceError, PyRuntimeError, "Iterative solver did not converge.");

fn to_py(err: Error) -> PyErr {
    let msg = err.to_string();
    match err.exit_code() {
        2 => DomainError::new_err(msg),
        4 => NonConvergenceError::new_err(msg),
        _ => NumericalError::new_err(msg),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for rectlattice::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Quadrature accuracy settings.
#[pyclass(name = "Quadrature", get_all, set_all, from_py_object)]
#[derive(Clone)]
pub struct PyQuadrature {
    rel_tol: f64,
    abs_tol: f64,
    split_point: f64,
    max_refinements: usize,
}

#[pymethods]
impl PyQuadrature {
    #[new]
    #[pyo3(signature = (rel_tol=None, abs_tol=None, split_point=None, max_refinements=None))]
    fn new(rel_tol: Option<f64>, abs_tol: Option<f64>, split_point: Option<f64>, max_refinements: Option<usize>) -> PyResult<Self> {
        let d = QuadratureConfig::default();
        let q = PyQuadrature {
            rel_tol: rel_tol.unwrap_or(d.rel_tol),
            abs_tol: abs_tol.unwrap_or(d.abs_tol),
            split_point: split_point.unwrap_or(d.split_point),
            max_refinements: max_refinements.unwrap_or(d.max_refinements),
        };
        q.config()?;
        Ok(q)
    }

    fn __repr__(&self) -> String {
        format!(
            "Quadrature(rel_tol={:e}, abs_tol={:e}, split_point={}, max_refinements={})",
            self.rel_tol, self.abs_tol, self.split_point, self.max_refinements
        )
    }
}

impl PyQuadrature {
    fn config(&self) -> PyResult<QuadratureConfig> {
        let q = QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            split_point: self.split_point,
            max_refinements: self.max_refinements,
        };
        q.validate().py()?;
        Ok(q)
    }
}

fn quad(q: Option<PyQuadrature>) -> PyResult<QuadratureConfig> {
    match q {
        Some(q) => q.config(),
        None => Ok(QuadratureConfig::default()),
    }
}

/// A validated pair potential.
#[pyclass(name = "Potential", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyPotential {
    spec: PotentialSpec,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn riesz(s: f64) -> PyResult<Self> {
        Ok(PyPotential { spec: PotentialSpec::riesz(s).py()? })
    }

    #[staticmethod]
    fn yukawa(kappa: f64, v: f64) -> PyResult<Self> {
        Ok(PyPotential { spec: PotentialSpec::yukawa(kappa, v).py()? })
    }

    #[staticmethod]
    fn double_yukawa(v1: f64, kappa1: f64) -> PyResult<Self> {
        Ok(PyPotential { spec: PotentialSpec::double_yukawa(v1, kappa1).py()? })
    }

    #[staticmethod]
    fn yukawa_coulomb(kappa1: f64) -> PyResult<Self> {
        Ok(PyPotential { spec: PotentialSpec::yukawa_coulomb(kappa1).py()? })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.spec.family().name()
    }

    /// `(v1, κ1, v2, κ2)` for the two-term families.
    #[getter]
    fn two_term_parameters(&self) -> Option<(f64, f64, f64, f64)> {
        self.spec.two_term_parameters()
    }

    fn value(&self, r: f64) -> PyResult<f64> {
        self.spec.value(r).py()
    }

    fn derivative(&self, r: f64) -> PyResult<f64> {
        self.spec.derivative(r).py()
    }

    fn measure_density(&self, t: f64) -> PyResult<f64> {
        self.spec.measure_density(t).py()
    }

    fn __repr__(&self) -> String {
        format!("Potential({:?})", self.spec.params())
    }
}

#[pyclass(name = "Expansion", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyExpansion {
    area: f64,
    e0: f64,
    e2: f64,
    e4: f64,
    e6: Option<f64>,
    method: &'static str,
}

#[pyclass(name = "TransitionPoint", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyTransitionPoint {
    a_star: f64,
    order: &'static str,
    e2_residual: f64,
    e4_at_a_star: f64,
    bracket: (f64, f64),
}

#[pyclass(name = "TricriticalPoint", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyTricriticalPoint {
    family: &'static str,
    a_t: f64,
    /// `v1ᵗ` for double Yukawa, `κ1ᵗ` for Yukawa-Coulomb.
    param_t: f64,
    residuals: (f64, f64),
    jacobian_condition: f64,
}

#[pyclass(name = "FirstOrderTransition", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyFirstOrder {
    a_trans: f64,
    eps_jump: f64,
    eps_floor: f64,
    energy_square: f64,
    energy_rect: f64,
    a_star: f64,
}

#[pyclass(name = "FitResult", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyFit {
    beta: f64,
    amplitude: f64,
    r_squared: f64,
    window: (f64, f64),
    samples: Vec<(f64, f64)>,
}

#[pyclass(name = "PhaseDiagramRow", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyRow {
    family: &'static str,
    kappa1: f64,
    v1: Option<f64>,
    a_star: Option<f64>,
    order: Option<&'static str>,
    eps_jump: Option<f64>,
    e2_residual: Option<f64>,
    e4_value: Option<f64>,
    status: String,
}

macro_rules! repr {
    ($($t:ty => $name:literal),*) => {$(
        #[pymethods]
        impl $t {
            fn __repr__(&self) -> String {
                format!(concat!($name, "{:?}"), self)
            }
        }
    )*};
}

macro_rules! debug_fields {
    ($($t:ty { $($f:ident),* }),*) => {$(
        impl std::fmt::Debug for $t {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                let mut s = f.debug_tuple("");
                $( s.field(&format_args!("{}={:?}", stringify!($f), self.$f)); )*
                s.finish()
            }
        }
    )*};
}

debug_fields!(
    PyExpansion { area, e0, e2, e4, e6, method },
    PyTransitionPoint { a_star, order, e2_residual, e4_at_a_star, bracket },
    PyTricriticalPoint { family, a_t, param_t, residuals, jacobian_condition },
    PyFirstOrder { a_trans, eps_jump, eps_floor, energy_square, energy_rect, a_star },
    PyFit { beta, amplitude, r_squared, window },
    PyRow { family, kappa1, v1, a_star, order, eps_jump, status }
);

repr!(
    PyExpansion => "Expansion",
    PyTransitionPoint => "TransitionPoint",
    PyTricriticalPoint => "TricriticalPoint",
    PyFirstOrder => "FirstOrderTransition",
    PyFit => "FitResult",
    PyRow => "PhaseDiagramRow"
);

impl From<PhaseDiagramRow> for PyRow {
    fn from(r: PhaseDiagramRow) -> Self {
        PyRow {
            family: r.family.name(),
            kappa1: r.kappa1,
            v1: r.v1,
            a_star: r.a_star,
            order: r.order.map(TransitionOrder::name),
            eps_jump: r.eps_jump,
            e2_residual: r.e2_residual,
            e4_value: r.e4_value,
            status: r.status,
        }
    }
}

fn curve_family(family: &str, kappa1: Option<f64>) -> PyResult<TricriticalFamily> {
    match family {
        "double-yukawa" => {
            let kappa1 = kappa1.ok_or_else(|| DomainError::new_err("double-yukawa needs kappa1"))?;
            Ok(TricriticalFamily::DoubleYukawa { kappa1 })
        }
        "yukawa-coulomb" => Ok(TricriticalFamily::YukawaCoulomb),
        other => Err(DomainError::new_err(format!("no tricritical family '{other}'"))),
    }
}

fn bracket(lo: Option<f64>, hi: Option<f64>) -> PyResult<Option<(f64, f64)>> {
    match (lo, hi) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(DomainError::new_err("give both a_lo and a_hi or neither")),
    }
}

/// Energy per particle at inverse density `area` and aspect ratio `delta`.
#[pyfunction]
#[pyo3(signature = (potential, area, delta=1.0, quadrature=None))]
fn lattice_energy(potential: &PyPotential, area: f64, delta: f64, quadrature: Option<PyQuadrature>) -> PyResult<f64> {
    let q = quad(quadrature)?;
    energy::lattice_energy(&potential.spec, LatticeState::from_delta(area, delta).py()?, &q).py()
}

/// `E(A, e^ε) − E(A, 1)`.
#[pyfunction]
#[pyo3(signature = (potential, area, eps, quadrature=None))]
fn energy_difference(potential: &PyPotential, area: f64, eps: f64, quadrature: Option<PyQuadrature>) -> PyResult<f64> {
    let q = quad(quadrature)?;
    energy::energy_difference(&potential.spec, area, eps, &q).py()
}

/// Brute-force lattice sum (absolutely summable potentials only).
#[pyfunction]
#[pyo3(signature = (potential, area, delta=1.0, cutoff_tol=1e-16))]
fn direct_lattice_sum(potential: &PyPotential, area: f64, delta: f64, cutoff_tol: f64) -> PyResult<f64> {
    energy::direct_lattice_sum(&potential.spec, LatticeState::from_delta(area, delta).py()?, cutoff_tol).py()
}

/// Landau coefficients by the `"closed"` or `"series"` route.
#[pyfunction]
#[pyo3(signature = (potential, area, method="closed", quadrature=None))]
fn expand(potential: &PyPotential, area: f64, method: &str, quadrature: Option<PyQuadrature>) -> PyResult<PyExpansion> {
    let q = quad(quadrature)?;
    let c = match method {
        "closed" => expansion::expansion_closed(&potential.spec, area, &q).py()?,
        "series" => expansion::expansion_series(&potential.spec, area, &q).py()?,
        other => return Err(DomainError::new_err(format!("unknown method '{other}'"))),
    };
    Ok(PyExpansion { area: c.area, e0: c.e0, e2: c.e2, e4: c.e4, e6: c.e6, method: if method == "closed" { "closed" } else { "series" } })
}

#[pyfunction]
#[pyo3(signature = (potential, a_lo=None, a_hi=None, quadrature=None))]
fn find_transition(potential: &PyPotential, a_lo: Option<f64>, a_hi: Option<f64>, quadrature: Option<PyQuadrature>) -> PyResult<PyTransitionPoint> {
    let q = quad(quadrature)?;
    let t = critical::find_transition(&potential.spec, bracket(a_lo, a_hi)?, &q).py()?;
    Ok(PyTransitionPoint {
        a_star: t.a_star,
        order: t.order.name(),
        e2_residual: t.e2_residual,
        e4_at_a_star: t.e4_at_a_star,
        bracket: t.bracket,
    })
}

/// Joint zero of `E₂` and `E₄`; `family` is `"double-yukawa"` (with `kappa1`)
/// or `"yukawa-coulomb"`.
#[pyfunction]
#[pyo3(signature = (family, kappa1=None, guess=None, quadrature=None))]
fn find_tricritical(family: &str, kappa1: Option<f64>, guess: Option<(f64, f64)>, quadrature: Option<PyQuadrature>) -> PyResult<PyTricriticalPoint> {
    let q = quad(quadrature)?;
    let fam = curve_family(family, kappa1)?;
    let t = critical::find_tricritical(fam, guess, &q).py()?;
    Ok(PyTricriticalPoint {
        family: if matches!(fam, TricriticalFamily::YukawaCoulomb) { "yukawa-coulomb" } else { "double-yukawa" },
        a_t: t.a_t,
        param_t: t.param_t,
        residuals: t.residuals,
        jacobian_condition: t.jacobian_condition,
    })
}

#[pyfunction]
#[pyo3(signature = (potential, a_lo=None, a_hi=None, eps_floor=None, quadrature=None))]
fn find_first_order(
    potential: &PyPotential,
    a_lo: Option<f64>,
    a_hi: Option<f64>,
    eps_floor: Option<f64>,
    quadrature: Option<PyQuadrature>,
) -> PyResult<PyFirstOrder> {
    let q = quad(quadrature)?;
    let f = critical::find_first_order(&potential.spec, bracket(a_lo, a_hi)?, eps_floor, &q).py()?;
    Ok(PyFirstOrder {
        a_trans: f.a_trans,
        eps_jump: f.eps_jump,
        eps_floor: f.eps_floor,
        energy_square: f.energy_square,
        energy_rect: f.energy_rect,
        a_star: f.a_star,
    })
}

/// Best `(ε, E)` with `ε ∈ [eps_floor, eps_cap]`.
#[pyfunction]
#[pyo3(signature = (potential, area, eps_floor=0.0, eps_cap=critical::DEFAULT_EPS_CAP, quadrature=None))]
fn minimize_aspect(potential: &PyPotential, area: f64, eps_floor: f64, eps_cap: f64, quadrature: Option<PyQuadrature>) -> PyResult<(f64, f64)> {
    let q = quad(quadrature)?;
    critical::minimize_aspect_capped(&potential.spec, area, &q, eps_floor, eps_cap).py()
}

/// Fits `Δ − 1 = amplitude · (A − a_ref)^β`; `deltas` default to a window
/// just above `a_ref`.
#[pyfunction]
#[pyo3(signature = (potential, a_ref, deltas=None, quadrature=None))]
fn fit_exponent(potential: &PyPotential, a_ref: f64, deltas: Option<Vec<f64>>, quadrature: Option<PyQuadrature>) -> PyResult<PyFit> {
    let q = quad(quadrature)?;
    let deltas = deltas.unwrap_or_else(|| critical::default_fit_deltas(a_ref));
    let f = critical::fit_exponent(&potential.spec, a_ref, &deltas, &q).py()?;
    Ok(PyFit { beta: f.beta, amplitude: f.amplitude, r_squared: f.r_squared, window: f.window, samples: f.samples })
}

#[pyfunction]
#[pyo3(signature = (kappa1, quadrature=None))]
fn a_star_min(kappa1: f64, quadrature: Option<PyQuadrature>) -> PyResult<f64> {
    critical::a_star_min(kappa1, &quad(quadrature)?).py()
}

#[pyfunction]
#[pyo3(signature = (quadrature=None))]
fn a_star_min_zero_limit(quadrature: Option<PyQuadrature>) -> PyResult<f64> {
    critical::a_star_min_zero_limit(&quad(quadrature)?).py()
}

/// `(κ1^L, κ1^U)`, the ends of the double Yukawa tricritical locus.
#[pyfunction]
#[pyo3(signature = (lower_bracket=(1.3, 1.7), upper_bracket=(1.9, 2.2), quadrature=None))]
fn tricritical_window(lower_bracket: (f64, f64), upper_bracket: (f64, f64), quadrature: Option<PyQuadrature>) -> PyResult<(f64, f64)> {
    let q = quad(quadrature)?;
    Ok((critical::kappa1_lower(lower_bracket, &q).py()?, critical::kappa1_upper(upper_bracket, &q).py()?))
}

fn scan_config(workers: usize, refine: bool, quadrature: Option<PyQuadrature>) -> PyResult<ScanConfig> {
    Ok(ScanConfig { quadrature: quad(quadrature)?, workers, refine })
}

fn rows(r: Vec<PhaseDiagramRow>) -> Vec<PyRow> {
    r.into_iter().map(PyRow::from).collect()
}

/// Phase-diagram sweep. `mode` is one of `"critical-curve"` (needs `kappa1`),
/// `"yukawa-coulomb"`, `"tricritical-locus"` or `"a-star-min"`; `axis` is
/// `"param"` (v1 or κ1) or `"area"` for the two curve modes.
#[pyfunction]
#[pyo3(signature = (mode, grid, kappa1=None, axis="param", workers=1, refine=true, quadrature=None))]
#[allow(clippy::too_many_arguments)]
fn scan(
    py: Python<'_>,
    mode: &str,
    grid: Vec<f64>,
    kappa1: Option<f64>,
    axis: &str,
    workers: usize,
    refine: bool,
    quadrature: Option<PyQuadrature>,
) -> PyResult<Vec<PyRow>> {
    let cfg = scan_config(workers, refine, quadrature)?;
    let curve = || match axis {
        "param" => Ok(CurveGrid::Param(grid.clone())),
        "area" => Ok(CurveGrid::Area(grid.clone())),
        other => Err(DomainError::new_err(format!("unknown axis '{other}'"))),
    };
    let out = match mode {
        "critical-curve" => {
            let k = kappa1.ok_or_else(|| DomainError::new_err("critical-curve needs kappa1"))?;
            let g = curve()?;
            py.detach(|| phasescan::scan_critical_curve(k, &g, &cfg))
        }
        "yukawa-coulomb" => {
            let g = curve()?;
            py.detach(|| phasescan::scan_yukawa_coulomb(&g, &cfg))
        }
        "tricritical-locus" => py.detach(|| phasescan::scan_tricritical_locus(&grid, &cfg).map(|l| l.into_rows())),
        "a-star-min" => py.detach(|| phasescan::scan_a_star_min(&grid, &cfg)),
        other => return Err(DomainError::new_err(format!("unknown scan mode '{other}'"))),
    };
    Ok(rows(out.py()?))
}

/// Grid `lo:hi:{lin|log}:N`.
#[pyfunction]
fn parse_grid(text: &str) -> PyResult<Vec<f64>> {
    phasescan::parse_grid(text).py()
}

#[pymodule]
fn rectlattice_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    m.add_class::<PyQuadrature>()?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PyExpansion>()?;
    m.add_class::<PyTransitionPoint>()?;
    m.add_class::<PyTricriticalPoint>()?;
    m.add_class::<PyFirstOrder>()?;
    m.add_class::<PyFit>()?;
    m.add_class::<PyRow>()?;
    m.add_function(wrap_pyfunction!(lattice_energy, m)?)?;
    m.add_function(wrap_pyfunction!(energy_difference, m)?)?;
    m.add_function(wrap_pyfunction!(direct_lattice_sum, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(find_transition, m)?)?;
    m.add_function(wrap_pyfunction!(find_tricritical, m)?)?;
    m.add_function(wrap_pyfunction!(find_first_order, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_aspect, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(a_star_min, m)?)?;
    m.add_function(wrap_pyfunction!(a_star_min_zero_limit, m)?)?;
    m.add_function(wrap_pyfunction!(tricritical_window, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(parse_grid, m)?)?;
    Ok(())
}

/// Module initializer for embedding (used by the Rust-side tests).
pub fn init_module(py: Python<'_>) -> PyResult<Bound<'_, PyModule>> {
    let m = PyModule::new(py, "rectlattice_py")?;
    rectlattice_py(&m)?;
    Ok(m)
}
