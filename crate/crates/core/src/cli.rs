//! Command-line front end: argument parsing, dispatch and CSV/JSON output.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::critical::{
    default_fit_deltas, find_first_order, find_transition, find_tricritical, fit_exponent,
    TricriticalFamily,
};
use crate::energy::{lattice_energy, LatticeState};
use crate::error::{Error, Result};
use crate::expansion::{expansion_closed, expansion_series};
use crate::phasescan::{
    parse_grid, scan_a_star_min, scan_critical_curve, scan_tricritical_locus, scan_yukawa_coulomb, CurveGrid,
    PhaseDiagramRow, ScanConfig,
};
use crate::potential::{Family, PotentialSpec};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Parser, Serialize)]
#[command(name = "rectlattice", version, about = "Rectangular-lattice energies and structural transitions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Lattice energy per particle at (A, Δ).
    Energy {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long)]
        area: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    /// Landau coefficients E0, E2, E4 (and E6 from the series route).
    Expand {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long)]
        area: f64,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Zero of E2 in A and its order.
    Transition {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, requires = "a_hi")]
        a_lo: Option<f64>,
        #[arg(long, requires = "a_lo")]
        a_hi: Option<f64>,
    },
    /// Joint zero of E2 and E4.
    Tricritical {
        #[arg(long, value_enum)]
        family: CurveFamilyArg,
        /// Fixed κ1 (double Yukawa only).
        #[arg(long)]
        kappa1: Option<f64>,
        #[arg(long, requires = "guess_param")]
        guess_a: Option<f64>,
        #[arg(long, requires = "guess_a")]
        guess_param: Option<f64>,
    },
    /// First-order coexistence of square and rectangular branches.
    FirstOrder {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, requires = "a_hi")]
        a_lo: Option<f64>,
        #[arg(long, requires = "a_lo")]
        a_hi: Option<f64>,
        #[arg(long)]
        eps_floor: Option<f64>,
    },
    /// Exponent of Δ − 1 ∝ (A − A_ref)^β above a transition or tricritical point.
    Fit {
        #[command(flatten)]
        potential: PotentialArgs,
        /// Fit at the tricritical point of the family (v1 or κ1 is solved for).
        #[arg(long)]
        tricritical: bool,
        #[arg(long)]
        a_ref: Option<f64>,
        /// Offsets as fractions of A_ref: `lo:hi:log:N`.
        #[arg(long)]
        deltas: Option<String>,
    },
    /// Phase-diagram sweeps.
    Scan {
        #[arg(long, value_enum)]
        mode: ScanMode,
        #[arg(long)]
        kappa1: Option<f64>,
        #[arg(long)]
        v1_grid: Option<String>,
        #[arg(long)]
        a_grid: Option<String>,
        #[arg(long)]
        kappa1_grid: Option<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Skip the local refinement around a tricritical point.
        #[arg(long)]
        no_refine: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Closed,
    Series,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CurveFamilyArg {
    DoubleYukawa,
    YukawaCoulomb,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    CriticalCurve,
    TricriticalLocus,
    AStarMin,
    YukawaCoulomb,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct PotentialArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long)]
    pub v1: Option<f64>,
    #[arg(long)]
    pub kappa1: Option<f64>,
    /// Yukawa screening.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Yukawa amplitude.
    #[arg(long)]
    pub v: Option<f64>,
    /// Riesz exponent.
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct QuadratureArgs {
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub split_point: Option<f64>,
    #[arg(long, global = true)]
    pub max_refinements: Option<usize>,
}

impl QuadratureArgs {
    pub fn config(&self) -> Result<QuadratureConfig> {
        let d = QuadratureConfig::default();
        let q = QuadratureConfig {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            split_point: self.split_point.unwrap_or(d.split_point),
            max_refinements: self.max_refinements.unwrap_or(d.max_refinements),
        };
        q.validate()?;
        Ok(q)
    }
}

fn need(name: &str, x: Option<f64>) -> Result<f64> {
    x.ok_or_else(|| Error::Domain(format!("--{name} is required for this family")))
}

impl PotentialArgs {
    pub fn spec(&self) -> Result<PotentialSpec> {
        match self.family {
            Family::Riesz => PotentialSpec::riesz(need("s", self.s)?),
            Family::Yukawa => PotentialSpec::yukawa(need("kappa", self.kappa)?, self.v.unwrap_or(1.0)),
            Family::DoubleYukawa => PotentialSpec::double_yukawa(need("v1", self.v1)?, need("kappa1", self.kappa1)?),
            Family::YukawaCoulomb => PotentialSpec::yukawa_coulomb(need("kappa1", self.kappa1)?),
        }
    }
}

/// A cell of an output table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Column-ordered records ready for CSV or JSON emission.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Decimal text with `digits` significant digits, trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        trim_zeros(&s)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// JSON formatter writing every float with 17 significant digits.
struct SigFormatter;

impl serde_json::ser::Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            writer.write_all(format!("{:.16e}", value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }
}

struct JsonRow<'a> {
    columns: &'a [&'static str],
    cells: &'a [Cell],
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.columns.len()))?;
        for (k, v) in self.columns.iter().zip(self.cells) {
            match v {
                Cell::Num(x) => m.serialize_entry(k, x)?,
                Cell::Text(t) => m.serialize_entry(k, t)?,
                Cell::Empty => m.serialize_entry(k, &Option::<f64>::None)?,
            }
        }
        m.end()
    }
}

#[derive(Serialize)]
struct Meta<'a, C: Serialize> {
    version: &'static str,
    config: &'a C,
}

#[derive(Serialize)]
struct Document<'a, C: Serialize> {
    meta: Meta<'a, C>,
    rows: Vec<JsonRow<'a>>,
}

pub fn render_json<C: Serialize>(table: &Table, config: &C) -> Result<String> {
    let doc = Document {
        meta: Meta { version: env!("CARGO_PKG_VERSION"), config },
        rows: table.rows.iter().map(|r| JsonRow { columns: &table.columns, cells: r }).collect(),
    };
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFormatter);
    doc.serialize(&mut ser).map_err(|e| Error::Contract(format!("json output: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Contract(format!("json output: {e}")))
}

pub fn render_csv(table: &Table) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| Error::Contract(format!("csv output: {e}"));
    w.write_record(&table.columns).map_err(err)?;
    for row in &table.rows {
        let fields: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => format_sig(*x, 15),
                Cell::Text(t) => t.clone(),
                Cell::Empty => String::new(),
            })
            .collect();
        w.write_record(&fields).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Contract(format!("csv output: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Contract(format!("csv output: {e}")))
}

pub const SCAN_COLUMNS: [&str; 9] =
    ["family", "kappa1", "v1", "a_star", "order", "eps_jump", "e2_residual", "e4_value", "status"];

pub fn scan_table(rows: &[PhaseDiagramRow]) -> Table {
    let mut t = Table::new(&SCAN_COLUMNS);
    for r in rows {
        t.push(vec![
            r.family.name().into(),
            r.kappa1.into(),
            r.v1.into(),
            r.a_star.into(),
            r.order.map_or(Cell::Empty, |o| o.name().into()),
            r.eps_jump.into(),
            r.e2_residual.into(),
            r.e4_value.into(),
            r.status.as_str().into(),
        ]);
    }
    t
}

fn grid_arg(name: &str, g: &Option<String>) -> Result<Vec<f64>> {
    match g {
        Some(s) => parse_grid(s),
        None => Err(Error::Domain(format!("--{name} is required for this scan mode"))),
    }
}

fn curve_family(family: CurveFamilyArg, kappa1: Option<f64>) -> Result<TricriticalFamily> {
    match family {
        CurveFamilyArg::DoubleYukawa => Ok(TricriticalFamily::DoubleYukawa { kappa1: need("kappa1", kappa1)? }),
        CurveFamilyArg::YukawaCoulomb => Ok(TricriticalFamily::YukawaCoulomb),
    }
}

fn bracket(lo: Option<f64>, hi: Option<f64>) -> Option<(f64, f64)> {
    lo.zip(hi)
}

/// Computes the table for a parsed command line.
pub fn execute(cli: &Cli) -> Result<Table> {
    let q = cli.quadrature.config()?;
    match &cli.command {
        Command::Energy { potential, area, delta } => {
            let spec = potential.spec()?;
            let state = LatticeState::from_delta(*area, *delta)?;
            let e = lattice_energy(&spec, state, &q)?;
            let mut t = Table::new(&["family", "area", "delta", "energy"]);
            t.push(vec![spec.family().name().into(), (*area).into(), (*delta).into(), e.into()]);
            Ok(t)
        }
        Command::Expand { potential, area, method } => {
            let spec = potential.spec()?;
            let mut t = Table::new(&["family", "area", "e0", "e2", "e4", "e6", "method", "discrepancy"]);
            let closed = matches!(method, Method::Closed | Method::Both).then(|| expansion_closed(&spec, *area, &q)).transpose()?;
            let series = matches!(method, Method::Series | Method::Both).then(|| expansion_series(&spec, *area, &q)).transpose()?;
            let discrepancy = match (&closed, &series) {
                // relative to the coefficient, or to |E0| when the coefficient is near a zero
                (Some(c), Some(s)) => {
                    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(c.e0.abs());
                    Some(rel(c.e2, s.e2).max(rel(c.e4, s.e4)))
                }
                _ => None,
            };
            for (c, name) in [(closed, "closed"), (series, "series")] {
                if let Some(c) = c {
                    t.push(vec![
                        spec.family().name().into(),
                        c.area.into(),
                        c.e0.into(),
                        c.e2.into(),
                        c.e4.into(),
                        c.e6.into(),
                        name.into(),
                        discrepancy.into(),
                    ]);
                }
            }
            Ok(t)
        }
        Command::Transition { potential, a_lo, a_hi } => {
            let spec = potential.spec()?;
            let p = find_transition(&spec, bracket(*a_lo, *a_hi), &q)?;
            let mut t = Table::new(&["family", "a_star", "order", "e2_residual", "e4_at_a_star", "a_lo", "a_hi"]);
            t.push(vec![
                spec.family().name().into(),
                p.a_star.into(),
                p.order.name().into(),
                p.e2_residual.into(),
                p.e4_at_a_star.into(),
                p.bracket.0.into(),
                p.bracket.1.into(),
            ]);
            Ok(t)
        }
        Command::Tricritical { family, kappa1, guess_a, guess_param } => {
            let fam = curve_family(*family, *kappa1)?;
            let p = find_tricritical(fam, guess_a.zip(*guess_param), &q)?;
            let (kappa, v1) = match fam {
                TricriticalFamily::DoubleYukawa { kappa1 } => (kappa1, p.param_t),
                TricriticalFamily::YukawaCoulomb => (p.param_t, p.param_t.exp() / p.param_t),
            };
            let mut t = Table::new(&["family", "a_t", "param_t", "kappa1", "v1", "e2_residual", "e4_residual", "jacobian_condition"]);
            let name = match family {
                CurveFamilyArg::DoubleYukawa => "double-yukawa",
                CurveFamilyArg::YukawaCoulomb => "yukawa-coulomb",
            };
            t.push(vec![
                name.into(),
                p.a_t.into(),
                p.param_t.into(),
                kappa.into(),
                v1.into(),
                p.residuals.0.into(),
                p.residuals.1.into(),
                p.jacobian_condition.into(),
            ]);
            Ok(t)
        }
        Command::FirstOrder { potential, a_lo, a_hi, eps_floor } => {
            let spec = potential.spec()?;
            let f = find_first_order(&spec, bracket(*a_lo, *a_hi), *eps_floor, &q)?;
            let mut t = Table::new(&[
                "family", "a_trans", "eps_jump", "eps_floor", "energy_square", "energy_rect", "a_star",
            ]);
            t.push(vec![
                spec.family().name().into(),
                f.a_trans.into(),
                f.eps_jump.into(),
                f.eps_floor.into(),
                f.energy_square.into(),
                f.energy_rect.into(),
                f.a_star.into(),
            ]);
            Ok(t)
        }
        Command::Fit { potential, tricritical, a_ref, deltas } => {
            let (spec, reference) = if *tricritical {
                let fam = match potential.family {
                    Family::DoubleYukawa => TricriticalFamily::DoubleYukawa { kappa1: need("kappa1", potential.kappa1)? },
                    Family::YukawaCoulomb => TricriticalFamily::YukawaCoulomb,
                    other => return Err(Error::Domain(format!("no tricritical point for the {other} family"))),
                };
                let p = find_tricritical(fam, None, &q)?;
                (fam.spec(p.param_t)?, p.a_t)
            } else {
                let spec = potential.spec()?;
                let a = match a_ref {
                    Some(a) => *a,
                    None => find_transition(&spec, None, &q)?.a_star,
                };
                (spec, a)
            };
            let reference = a_ref.unwrap_or(reference);
            let offsets = match deltas {
                Some(g) => parse_grid(g)?.into_iter().map(|d| d * reference).collect(),
                None => default_fit_deltas(reference),
            };
            let f = fit_exponent(&spec, reference, &offsets, &q)?;
            let mut t = Table::new(&["family", "a_ref", "beta", "amplitude", "r_squared", "delta_min", "delta_max", "samples"]);
            t.push(vec![
                spec.family().name().into(),
                reference.into(),
                f.beta.into(),
                f.amplitude.into(),
                f.r_squared.into(),
                f.window.0.into(),
                f.window.1.into(),
                (f.samples.len() as f64).into(),
            ]);
            Ok(t)
        }
        Command::Scan { mode, kappa1, v1_grid, a_grid, kappa1_grid, workers, no_refine } => {
            let cfg = ScanConfig { quadrature: q, workers: *workers, refine: !*no_refine };
            if *workers == 0 {
                return Err(Error::Domain("--workers must be at least 1".into()));
            }
            let rows = match mode {
                ScanMode::CriticalCurve => {
                    let k = need("kappa1", *kappa1)?;
                    let grid = match (v1_grid, a_grid) {
                        (Some(_), None) => CurveGrid::Param(grid_arg("v1-grid", v1_grid)?),
                        (None, Some(_)) => CurveGrid::Area(grid_arg("a-grid", a_grid)?),
                        _ => return Err(Error::Domain("give exactly one of --v1-grid, --a-grid".into())),
                    };
                    scan_critical_curve(k, &grid, &cfg)?
                }
                ScanMode::YukawaCoulomb => {
                    let grid = match (kappa1_grid, a_grid) {
                        (Some(_), None) => CurveGrid::Param(grid_arg("kappa1-grid", kappa1_grid)?),
                        (None, Some(_)) => CurveGrid::Area(grid_arg("a-grid", a_grid)?),
                        _ => return Err(Error::Domain("give exactly one of --kappa1-grid, --a-grid".into())),
                    };
                    scan_yukawa_coulomb(&grid, &cfg)?
                }
                ScanMode::TricriticalLocus => {
                    scan_tricritical_locus(&grid_arg("kappa1-grid", kappa1_grid)?, &cfg)?.into_rows()
                }
                ScanMode::AStarMin => scan_a_star_min(&grid_arg("kappa1-grid", kappa1_grid)?, &cfg)?,
            };
            Ok(scan_table(&rows))
        }
    }
}

/// Formats a table in the requested output format.
pub fn render(cli: &Cli, table: &Table) -> Result<String> {
    match cli.output.format {
        Format::Csv => render_csv(table),
        Format::Json => render_json(table, cli),
    }
}

/// Runs a command line, returning the exit code; output goes to the
/// configured destination and errors to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli).and_then(|t| render(&cli, &t)) {
        Ok(text) => {
            let written = match &cli.output.output {
                Some(path) => std::fs::write(path, text.as_bytes()),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return 3;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
