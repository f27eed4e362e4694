//! Data behind each figure panel, one CSV and one manifest per panel.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::DEFAULT_TAIL_TOL;
use crate::par::Exec;
use crate::states::{Engineering, StateSpec};
use crate::sweep::{
    run_contour, run_sweep, ContourConfig, Grid, Measure, Param, SweepConfig, Table, DEFAULT_PRECISION,
};

/// Kerr coupling used wherever a panel does not fix it.
pub const DEFAULT_CHI: f64 = 0.02;
/// Binomial photon number used wherever a panel does not fix it.
pub const DEFAULT_M: usize = 10;

macro_rules! figure_ids {
    ($($v:ident => $s:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum FigureId { $($v),* }

        impl FigureId {
            pub const ALL: &'static [FigureId] = &[$(FigureId::$v),*];

            pub fn name(self) -> &'static str {
                match self { $(FigureId::$v => $s),* }
            }
        }
    };
}

figure_ids! {
    Fig1a => "fig1a", Fig1b => "fig1b", Fig1c => "fig1c",
    Fig2a => "fig2a", Fig2b => "fig2b", Fig2c => "fig2c",
    Fig3a => "fig3a", Fig3b => "fig3b", Fig3c => "fig3c",
    Fig4a => "fig4a", Fig4b => "fig4b", Fig4c => "fig4c",
    Fig5a => "fig5a", Fig5b => "fig5b", Fig5c => "fig5c", Fig5d => "fig5d",
    Fig6a => "fig6a", Fig6b => "fig6b", Fig6c => "fig6c",
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        FigureId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == key)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

/// Axis ranges and resolutions; none of these are fixed by the figures
/// themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureOptions {
    pub curve_points: usize,
    pub contour_points: usize,
    pub alpha: (f64, f64),
    pub p: (f64, f64),
    pub chi: (f64, f64),
    pub theta: (f64, f64),
    pub tail_tol: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            curve_points: 101,
            contour_points: 101,
            alpha: (0.0, 3.0),
            p: (0.005, 0.995),
            chi: (0.0, 0.1),
            theta: (0.0, 2.0 * PI),
            tail_tol: DEFAULT_TAIL_TOL,
            exec: Exec::Parallel,
        }
    }
}

impl FigureOptions {
    fn grid(&self, param: Param, points: usize) -> Result<Grid> {
        let (a, b) = match param {
            Param::Alpha => self.alpha,
            Param::P => self.p,
            Param::Chi => self.chi,
            Param::Theta => self.theta,
            Param::M => return Err(Error::InvalidParameter("figures never sweep M".into())),
        };
        Grid::new(a, b, points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Panel {
    Curves(SweepConfig),
    Contour(ContourConfig),
}

/// Everything needed to regenerate one panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePlan {
    pub figure: String,
    /// Parameters fixed by the figure itself.
    pub fixed_parameters: BTreeMap<String, f64>,
    /// Values chosen here because the figure leaves them open.
    pub defaults: BTreeMap<String, f64>,
    pub states: Vec<String>,
    pub measures: Vec<String>,
    pub panel: Panel,
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

pub fn plan(id: FigureId, opts: &FigureOptions) -> Result<FigurePlan> {
    use FigureId::*;
    let ecs = StateSpec::ecs(1.0);
    let bs = StateSpec::bs(0.5, DEFAULT_M);
    let ks = StateSpec::ks(1.0, DEFAULT_CHI);
    let hoa = vec![Measure::Hoa(1), Measure::Hoa(2), Measure::Hoa(3)];
    let hos = vec![Measure::Hos(2), Measure::Hos(4)];
    let hosps: Vec<Measure> = (2..=5).map(Measure::Hosps).collect();
    let entropy = vec![Measure::Entropy];
    let m_default = [("m", DEFAULT_M as f64)];
    let chi_default = [("chi", DEFAULT_CHI)];

    let curves = |template: StateSpec, param: Param, measures: &[Measure]| -> Result<Panel> {
        let cfg = SweepConfig::new(template, param, opts.grid(param, opts.curve_points)?, measures.to_vec())
            .with_engineerings(&Engineering::ALL)
            .with_tail_tol(opts.tail_tol);
        Ok(Panel::Curves(cfg))
    };
    let contour = |template: StateSpec, x: Param, y: Param, measure: Measure| -> Result<Panel> {
        Ok(Panel::Contour(ContourConfig {
            template,
            x: (x, opts.grid(x, opts.contour_points)?),
            y: (y, opts.grid(y, opts.contour_points)?),
            measure,
            tail_tol: opts.tail_tol,
        }))
    };
    let paks = |alpha: f64, chi: f64, theta: f64| StateSpec::ks(alpha, chi).with_theta(theta).photon_added();

    let (panel, fixed, defaults) = match id {
        Fig1a => (curves(ecs, Param::Alpha, &hoa)?, params(&[]), params(&[])),
        Fig1b => (curves(bs, Param::P, &hoa)?, params(&m_default), params(&[])),
        Fig1c => (curves(ks, Param::Alpha, &hoa)?, params(&[]), params(&chi_default)),
        Fig2a => (curves(bs, Param::P, &hos)?, params(&[]), params(&m_default)),
        Fig2b => (curves(ks, Param::Alpha, &hos)?, params(&chi_default), params(&[])),
        Fig2c => (
            curves(StateSpec::ks(1.0, 0.0), Param::Chi, &hos)?,
            params(&[("alpha", 1.0)]),
            params(&[]),
        ),
        Fig3a => (
            contour(paks(3.0, DEFAULT_CHI, 0.0), Param::Chi, Param::Theta, Measure::Hos(4))?,
            params(&[("alpha", 3.0), ("order", 4.0)]),
            params(&[]),
        ),
        Fig3b => (
            contour(paks(1.0, DEFAULT_CHI, 0.0), Param::Alpha, Param::Theta, Measure::Hos(4))?,
            params(&[("chi", DEFAULT_CHI), ("order", 4.0)]),
            params(&[]),
        ),
        Fig3c => (
            contour(paks(1.0, DEFAULT_CHI, 0.0), Param::Alpha, Param::Chi, Measure::Hos(4))?,
            params(&[("theta", 0.0), ("order", 4.0)]),
            params(&[]),
        ),
        Fig4a => (curves(ecs, Param::Alpha, &hosps)?, params(&[]), params(&[])),
        Fig4b => (curves(bs, Param::P, &hosps)?, params(&[]), params(&m_default)),
        Fig4c => (curves(ks, Param::Alpha, &hosps)?, params(&[]), params(&chi_default)),
        Fig5a => (curves(ecs, Param::Alpha, &entropy)?, params(&chi_default), params(&[])),
        Fig5b => (
            curves(bs, Param::P, &entropy)?,
            params(&chi_default),
            params(&m_default),
        ),
        Fig5c => (curves(ks, Param::Alpha, &entropy)?, params(&chi_default), params(&[])),
        Fig5d => (
            curves(StateSpec::ks(1.0, 0.0), Param::Chi, &entropy)?,
            params(&[("alpha", 1.0)]),
            params(&[]),
        ),
        Fig6a | Fig6b | Fig6c => {
            let engineering = match id {
                Fig6a => Engineering::None,
                Fig6b => Engineering::VacuumFiltered,
                _ => Engineering::PhotonAdded,
            };
            let template = StateSpec::ks(1.0, 0.0).with_engineering(engineering);
            (
                contour(template, Param::Alpha, Param::Chi, Measure::Entropy)?,
                params(&[]),
                params(&[]),
            )
        }
    };
    let (states, measures) = match &panel {
        Panel::Curves(c) => (
            c.engineerings
                .iter()
                .map(|&e| c.template.with_engineering(e).label())
                .collect(),
            c.measures.iter().map(|m| m.stem()).collect(),
        ),
        Panel::Contour(c) => (vec![c.template.label()], vec![c.measure.stem()]),
    };
    Ok(FigurePlan {
        figure: id.name().to_string(),
        fixed_parameters: fixed,
        defaults,
        states,
        measures,
        panel,
    })
}

/// Evaluates a planned panel.
pub fn compute(plan: &FigurePlan, exec: Exec) -> Result<Table> {
    match &plan.panel {
        Panel::Curves(c) => run_sweep(c, exec),
        Panel::Contour(c) => run_contour(c, exec),
    }
}

/// Writes `<id>.csv` and `<id>.manifest.json` into `out_dir` and returns
/// their paths.
pub fn reproduce(id: FigureId, out_dir: &Path, opts: &FigureOptions) -> Result<Vec<PathBuf>> {
    let plan = plan(id, opts)?;
    let table = compute(&plan, opts.exec)?;
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{id}.csv"));
    table.write_csv(fs::File::create(&csv_path)?, DEFAULT_PRECISION)?;
    let manifest_path = out_dir.join(format!("{id}.manifest.json"));
    let mut manifest = serde_json::to_string_pretty(&plan)?;
    manifest.push('\n');
    fs::write(&manifest_path, manifest)?;
    log::info!("{id}: {} rows written to {}", table.rows.len(), csv_path.display());
    Ok(vec![csv_path, manifest_path])
}
