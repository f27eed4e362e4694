//! Parameter sweeps over witness and entanglement measures.
//!
//! Every grid point is evaluated independently, so sweeps run through
//! [`crate::par::map`] and produce identical tables in serial and parallel
//! mode. Failures at a point never abort a sweep: the affected cells are
//! left empty and the point's status column carries the error code.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::entanglement::linear_entropy;
use crate::error::{Error, Result};
use crate::fock::DEFAULT_TAIL_TOL;
use crate::moments::MomentTable;
use crate::par::{self, Exec};
use crate::states::{build_state_with, BuildOptions, Engineering, Family, StateSpec};
use crate::witnesses::{hoa, hoa_keys, hos, hos_keys, hosps, hosps_keys};

/// Significant digits used for reals in CSV output.
pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Alpha,
    Theta,
    P,
    M,
    Chi,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Alpha => "alpha",
            Param::Theta => "theta",
            Param::P => "p",
            Param::M => "m",
            Param::Chi => "chi",
        }
    }

    pub fn belongs_to(self, family: Family) -> bool {
        match self {
            Param::Alpha | Param::Theta => family != Family::Bs,
            Param::P | Param::M => family == Family::Bs,
            Param::Chi => family == Family::Ks,
        }
    }

    /// `spec` with this parameter set to `x`. `M` is rounded to the nearest
    /// non-negative integer.
    pub fn apply(self, spec: &StateSpec, x: f64) -> StateSpec {
        let mut s = *spec;
        match self {
            Param::Alpha => s.alpha_mag = x,
            Param::Theta => s.theta = x,
            Param::P => s.p = x,
            Param::M => s.m = x.round().max(0.0) as usize,
            Param::Chi => s.chi = x,
        }
        s
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" | "a" => Ok(Param::Alpha),
            "theta" => Ok(Param::Theta),
            "p" => Ok(Param::P),
            "m" => Ok(Param::M),
            "chi" => Ok(Param::Chi),
            _ => Err(Error::InvalidParameter(format!("unknown sweep parameter `{s}`"))),
        }
    }
}

/// Linearly spaced grid with both end points included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    /// A grid with fewer than two points is widened to two.
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(Error::InvalidParameter(format!(
                "grid needs start < stop, got {start}..{stop}"
            )));
        }
        Ok(Grid {
            start,
            stop,
            count: count.max(2),
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Parses `START:STOP:COUNT`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("grid `{s}` is not START:STOP:COUNT"));
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else { return Err(bad()) };
        let start = a.trim().parse::<f64>().map_err(|_| bad())?;
        let stop = b.trim().parse::<f64>().map_err(|_| bad())?;
        let count = n.trim().parse::<usize>().map_err(|_| bad())?;
        Grid::new(start, stop, count)
    }
}

/// Parses `NAME=START:STOP:COUNT`.
pub fn parse_sweep(s: &str) -> Result<(Param, Grid)> {
    let (name, grid) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidParameter(format!("sweep `{s}` is not NAME=START:STOP:COUNT")))?;
    Ok((name.trim().parse()?, grid.parse()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Measure {
    Hoa(usize),
    Hos(usize),
    Hosps(usize),
    Entropy,
}

impl Measure {
    pub fn stem(self) -> String {
        match self {
            Measure::Hoa(xi) => format!("hoa{xi}"),
            Measure::Hos(l) => format!("hos{l}"),
            Measure::Hosps(l) => format!("hosps{l}"),
            Measure::Entropy => "entropy".to_string(),
        }
    }

    fn moment_keys(self) -> Vec<(usize, usize)> {
        match self {
            Measure::Hoa(xi) => hoa_keys(xi),
            Measure::Hos(l) => hos_keys(l),
            Measure::Hosps(l) => hosps_keys(l),
            Measure::Entropy => Vec::new(),
        }
    }

    fn has_oracle(self) -> bool {
        self != Measure::Entropy
    }

    fn column_names(self, prefix: &str) -> Vec<String> {
        let stem = self.stem();
        if self.has_oracle() {
            ["formula", "oracle", "nonclassical"]
                .iter()
                .map(|s| format!("{prefix}{stem}_{s}"))
                .collect()
        } else {
            vec![format!("{prefix}{stem}")]
        }
    }
}

/// Value of one measure at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureValue {
    pub measure: Measure,
    pub formula: f64,
    pub oracle: Option<f64>,
    pub nonclassical: Option<bool>,
    pub discrepancy: bool,
}

impl MeasureValue {
    fn cells(&self) -> Vec<Cell> {
        match self.oracle {
            Some(o) => vec![
                Cell::Num(self.formula),
                Cell::Num(o),
                Cell::Int(i64::from(self.nonclassical.unwrap_or(false))),
            ],
            None => vec![Cell::Num(self.formula)],
        }
    }
}

/// Evaluates `measures` at `spec`. Witness formula values come from the
/// closed-form moment series; oracle values from the truncated state vector.
pub fn evaluate(spec: &StateSpec, measures: &[Measure], tail_tol: f64) -> Result<Vec<MeasureValue>> {
    let opts = BuildOptions::oracle().with_tail_tol(tail_tol);
    let v = build_state_with(spec, &opts)?;
    let keys: BTreeSet<(usize, usize)> = measures.iter().flat_map(|m| m.moment_keys()).collect();
    let analytic = MomentTable::analytic(spec, keys.iter().copied())?;
    let oracle = MomentTable::oracle(&v, keys.iter().copied())?;
    measures
        .iter()
        .map(|&measure| {
            let value = match measure {
                Measure::Hoa(xi) => {
                    let r = hoa(&analytic, xi)?;
                    let o = hoa(&oracle, xi)?.formula_value;
                    let gap = (r.formula_value - o).abs();
                    MeasureValue {
                        measure,
                        formula: r.formula_value,
                        oracle: Some(o),
                        nonclassical: Some(r.nonclassical),
                        discrepancy: gap > crate::witnesses::DISCREPANCY_TOL * o.abs().max(1.0),
                    }
                }
                Measure::Hos(l) | Measure::Hosps(l) => {
                    let r = if matches!(measure, Measure::Hos(_)) {
                        hos(&analytic, &v, l)?
                    } else {
                        hosps(&analytic, &v, l)?
                    };
                    MeasureValue {
                        measure,
                        formula: r.formula_value,
                        oracle: Some(r.oracle_value),
                        nonclassical: Some(r.nonclassical),
                        discrepancy: r.discrepancy,
                    }
                }
                Measure::Entropy => MeasureValue {
                    measure,
                    formula: linear_entropy(&v),
                    oracle: None,
                    nonclassical: None,
                    discrepancy: false,
                },
            };
            Ok(value)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(x) => Some(x),
            Cell::Int(i) => Some(i as f64),
            Cell::Empty => None,
        }
    }

    fn render(&self, precision: usize) -> String {
        match *self {
            Cell::Num(x) => format!("{:.*e}", precision.saturating_sub(1), x),
            Cell::Int(i) => i.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

/// Column-named table of sweep results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a column, `None` for empty cells.
    pub fn values(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W, precision: usize) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|c| c.render(precision)))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, precision: usize) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, precision)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// JSON array with one object per row; empty cells become `null`.
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| {
                self.columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| {
                        let value = match *v {
                            Cell::Num(x) => serde_json::Value::from(x),
                            Cell::Int(i) => serde_json::Value::from(i),
                            Cell::Empty => serde_json::Value::Null,
                        };
                        (c.clone(), value)
                    })
                    .collect()
            })
            .collect();
        serde_json::to_writer_pretty(w, &rows)?;
        Ok(())
    }
}

/// One-dimensional sweep over a parameter, for one or more engineering
/// variants of a state family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub template: StateSpec,
    pub engineerings: Vec<Engineering>,
    pub param: Param,
    pub grid: Grid,
    pub measures: Vec<Measure>,
    pub tail_tol: f64,
    pub precision: usize,
}

impl SweepConfig {
    pub fn new(template: StateSpec, param: Param, grid: Grid, measures: Vec<Measure>) -> Self {
        SweepConfig {
            template,
            engineerings: vec![template.engineering],
            param,
            grid,
            measures,
            tail_tol: DEFAULT_TAIL_TOL,
            precision: DEFAULT_PRECISION,
        }
    }

    pub fn with_engineerings(mut self, engineerings: &[Engineering]) -> Self {
        self.engineerings = engineerings.to_vec();
        self
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Self {
        self.tail_tol = tail_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.param.belongs_to(self.template.family) {
            return Err(Error::InvalidParameter(format!(
                "parameter `{}` does not belong to the {:?} family",
                self.param, self.template.family
            )));
        }
        if self.measures.is_empty() || self.engineerings.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep needs at least one measure and one state".into(),
            ));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance {} must lie in (0, 1)",
                self.tail_tol
            )));
        }
        Ok(())
    }

    fn specs_at(&self, x: f64) -> Vec<StateSpec> {
        let base = self.param.apply(&self.template, x);
        self.engineerings.iter().map(|&e| base.with_engineering(e)).collect()
    }
}

/// Cells for one state at one point: measure values then the status code.
fn state_cells(spec: &StateSpec, measures: &[Measure], tail_tol: f64) -> (Vec<Cell>, u8) {
    match spec.validate().and_then(|_| evaluate(spec, measures, tail_tol)) {
        Ok(values) => {
            let mut cells: Vec<Cell> = values.iter().flat_map(MeasureValue::cells).collect();
            cells.push(Cell::Int(0));
            (cells, 0)
        }
        Err(e) => {
            let width: usize = measures.iter().map(|m| m.column_names("").len()).sum();
            let code = e.status_code();
            let mut cells = vec![Cell::Empty; width];
            cells.push(Cell::Int(i64::from(code)));
            (cells, code)
        }
    }
}

pub fn run_sweep(cfg: &SweepConfig, exec: Exec) -> Result<Table> {
    cfg.validate()?;
    let mut columns = vec![cfg.param.name().to_string()];
    for &e in &cfg.engineerings {
        let prefix = format!("{}_", cfg.template.with_engineering(e).label());
        columns.extend(cfg.measures.iter().flat_map(|m| m.column_names(&prefix)));
        columns.push(format!("{prefix}status"));
    }
    columns.push("status".to_string());

    let xs = cfg.grid.values();
    let rows = par::map(exec, &xs, |&x| {
        let mut row = vec![Cell::Num(x)];
        let mut worst = 0u8;
        for spec in cfg.specs_at(x) {
            let (cells, code) = state_cells(&spec, &cfg.measures, cfg.tail_tol);
            row.extend(cells);
            worst = worst.max(code);
        }
        row.push(Cell::Int(i64::from(worst)));
        row
    });
    Ok(Table { columns, rows })
}

/// Single-row table for one parameter point, laid out like a sweep row
/// without the swept-parameter column.
pub fn run_point(template: &StateSpec, engineerings: &[Engineering], measures: &[Measure], tail_tol: f64) -> Table {
    let mut columns = Vec::new();
    let mut row = Vec::new();
    let mut worst = 0u8;
    for &e in engineerings {
        let spec = template.with_engineering(e);
        let prefix = format!("{}_", spec.label());
        columns.extend(measures.iter().flat_map(|m| m.column_names(&prefix)));
        columns.push(format!("{prefix}status"));
        let (cells, code) = state_cells(&spec, measures, tail_tol);
        row.extend(cells);
        worst = worst.max(code);
    }
    columns.push("status".to_string());
    row.push(Cell::Int(i64::from(worst)));
    Table {
        columns,
        rows: vec![row],
    }
}

/// Two-dimensional grid of a single measure for a single state, emitted in
/// long format with the first axis outermost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourConfig {
    pub template: StateSpec,
    pub x: (Param, Grid),
    pub y: (Param, Grid),
    pub measure: Measure,
    pub tail_tol: f64,
}

impl ContourConfig {
    pub fn validate(&self) -> Result<()> {
        for p in [self.x.0, self.y.0] {
            if !p.belongs_to(self.template.family) {
                return Err(Error::InvalidParameter(format!(
                    "parameter `{p}` does not belong to the {:?} family",
                    self.template.family
                )));
            }
        }
        if self.x.0 == self.y.0 {
            return Err(Error::InvalidParameter("contour axes must differ".into()));
        }
        Ok(())
    }
}

pub fn run_contour(cfg: &ContourConfig, exec: Exec) -> Result<Table> {
    cfg.validate()?;
    let mut columns = vec![cfg.x.0.name().to_string(), cfg.y.0.name().to_string()];
    columns.extend(cfg.measure.column_names(""));
    columns.push("status".to_string());

    let points: Vec<(f64, f64)> = cfg
        .x
        .1
        .values()
        .into_iter()
        .flat_map(|x| cfg.y.1.values().into_iter().map(move |y| (x, y)))
        .collect();
    let rows = par::map(exec, &points, |&(x, y)| {
        let spec = cfg.y.0.apply(&cfg.x.0.apply(&cfg.template, x), y);
        let (cells, _) = state_cells(&spec, &[cfg.measure], cfg.tail_tol);
        let mut row = vec![Cell::Num(x), Cell::Num(y)];
        row.extend(cells);
        row
    });
    Ok(Table { columns, rows })
}
