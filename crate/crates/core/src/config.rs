//! TOML run documents: problem data from the closed set of builtin families,
//! grid, perturbation family and command settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Cost, Dynamics, Table, Terminal};
use crate::field::Variant;
use crate::grid::{GridSpec, UniformGrid};
use crate::hamiltonians::ControlTriple;
use crate::problem::{Bounds, ControlSet, ProblemSpec, Side, SideData};
use crate::trajectory::{ControlSchedule, OracleMode};
use crate::verification::PerturbationFamily;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub geometry: GeometrySection,
    pub side1: SideSection,
    pub side2: SideSection,
    pub terminal: TerminalSection,
    pub controls: ControlsSection,
    pub grid: GridSection,
    #[serde(default)]
    pub run: RunSection,
    pub perturbation: Option<PerturbationSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSection {
    pub dynamics: DynamicsFamily,
    pub cost: CostFamily,
    pub controls: ControlSamples,
    pub bounds: Bounds,
}

/// Either a uniform grid of controls or an explicit list.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSamples {
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub counts: Option<Vec<usize>>,
    pub points: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DynamicsFamily {
    Constant {
        value: Vec<f64>,
    },
    Affine {
        offset: Vec<f64>,
        #[serde(default)]
        state: Option<Vec<Vec<f64>>>,
        control: Vec<Vec<f64>>,
        #[serde(default)]
        time: Option<Vec<f64>>,
    },
    Tabulated {
        lower: Vec<f64>,
        upper: Vec<f64>,
        counts: Vec<usize>,
        values: Vec<f64>,
        control: Vec<Vec<f64>>,
    },
    EikonalDemo {
        speed: f64,
    },
    GapDemo {
        #[serde(default)]
        drift: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CostFamily {
    Constant {
        value: f64,
    },
    Affine {
        offset: f64,
        #[serde(default)]
        state: Option<Vec<f64>>,
        control: Vec<f64>,
        #[serde(default)]
        time: f64,
    },
    Tabulated {
        lower: Vec<f64>,
        upper: Vec<f64>,
        counts: Vec<usize>,
        values: Vec<f64>,
        control: Vec<f64>,
    },
    EikonalDemo {
        value: f64,
    },
    GapDemo {
        slope: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TerminalFamily {
    Constant { value: f64 },
    Affine { offset: f64, weights: Vec<f64> },
    Tabulated { lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>, values: Vec<f64> },
    EikonalDemo { cap: f64 },
    GapDemo { slope: f64, cap: f64 },
}

/// `[terminal]`: the horizon `T` next to the family fields of `g`.
#[derive(Debug, Clone)]
pub struct TerminalSection {
    pub horizon: f64,
    pub family: TerminalFamily,
}

impl<'de> Deserialize<'de> for TerminalSection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut table = toml::Table::deserialize(d)?;
        let horizon = match table.remove("horizon") {
            Some(toml::Value::Float(v)) => v,
            Some(toml::Value::Integer(v)) => v as f64,
            Some(_) => return Err(D::Error::custom("`horizon` must be a number")),
            None => return Err(D::Error::missing_field("horizon")),
        };
        let family = TerminalFamily::deserialize(toml::Value::Table(table)).map_err(D::Error::custom)?;
        Ok(Self { horizon, family })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsSection {
    pub delta: f64,
    #[serde(default = "default_mu_grid")]
    pub mu_grid: usize,
    /// Allowance `slack · (1 + |p| + |q|)` in the `H_T` Lipschitz audit.
    #[serde(default = "default_ht_slack")]
    pub ht_slack: f64,
}

fn default_mu_grid() -> usize {
    11
}

fn default_ht_slack() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dx: Option<f64>,
    pub nodes: Option<Vec<usize>>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    Eikonal,
    GapMinus,
    GapPlus,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub alpha1: usize,
    pub alpha2: usize,
    #[serde(default)]
    pub mu: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub command: Option<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Random samples for the audits and subsolution check.
    pub samples: usize,
    /// Random pairs for the `H_T` and monotonicity checks.
    pub pairs: usize,
    pub x0: Option<Vec<f64>>,
    pub t: Option<f64>,
    pub intervals: usize,
    /// Control subsampling stride for the oracle branching.
    pub stride: usize,
    pub mode: OracleMode,
    pub h: Option<f64>,
    pub budget: Option<u128>,
    pub tau: f64,
    pub breakpoints: Option<Vec<f64>>,
    pub schedule: Option<Vec<ScheduleEntry>>,
    pub spacings: Option<Vec<f64>>,
    pub reference: Option<Reference>,
    pub variant: Option<Variant>,
    pub tolerance: f64,
    pub p_radius: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            command: None,
            seed: 0,
            threads: None,
            samples: 10_000,
            pairs: 1_000,
            x0: None,
            t: None,
            intervals: 4,
            stride: 5,
            mode: OracleMode::All,
            h: None,
            budget: None,
            tau: 0.1,
            breakpoints: None,
            schedule: None,
            spacings: None,
            reference: None,
            variant: None,
            tolerance: 0.1,
            p_radius: 10.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    pub epsilons: Vec<f64>,
    pub bounds: Bounds,
    pub slope: f64,
    pub db1: Option<DynamicsFamily>,
    pub db2: Option<DynamicsFamily>,
    pub dl1: Option<CostFamily>,
    pub dl2: Option<CostFamily>,
    pub dg: Option<TerminalFamily>,
}

/// A parsed and validated run document.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub spec: ProblemSpec,
    pub grid: GridSpec,
    pub ht_slack: f64,
    pub run: RunSection,
    pub perturbation: Option<PerturbationFamily>,
}

impl Loaded {
    /// The configured schedule, or `None` if the document has none.
    pub fn schedule(&self) -> Result<Option<ControlSchedule>> {
        let Some(entries) = &self.run.schedule else {
            return Ok(None);
        };
        let t = self.run.t.unwrap_or(self.spec.horizon());
        let controls: Vec<ControlTriple> = entries
            .iter()
            .map(|e| ControlTriple {
                alpha1: e.alpha1,
                alpha2: e.alpha2,
                mu: e.mu,
            })
            .collect();
        for c in &controls {
            if c.alpha1 >= self.spec.controls(Side::One).len()
                || c.alpha2 >= self.spec.controls(Side::Two).len()
            {
                return Err(Error::config("run.schedule", "control index out of range"));
            }
        }
        let schedule = match &self.run.breakpoints {
            Some(b) => ControlSchedule::new(b.clone(), controls),
            None => ControlSchedule::uniform(t, controls),
        };
        schedule.map(Some).map_err(|e| Error::config("run.schedule", e.to_string()))
    }
}

pub fn load_file(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_str(&text)
}

pub fn load_str(text: &str) -> Result<Loaded> {
    let doc: Document = toml::from_str(text).map_err(|e| {
        let location = match e.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                format!("line {line}, column {column}")
            }
            None => "document".into(),
        };
        Error::config(location, e.message().trim())
    })?;
    build(doc)
}

fn at(location: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidArgument(m) => Error::config(location, m),
        other => other,
    }
}

fn table(location: &str, dim: usize, lower: &[f64], upper: &[f64], counts: &[usize], components: usize, values: &[f64]) -> Result<Table> {
    if lower.len() != dim {
        return Err(Error::config(location, format!("table must be {dim}-dimensional")));
    }
    let grid = UniformGrid::new(lower.to_vec(), upper.to_vec(), counts.to_vec()).map_err(at(location))?;
    Table::new(grid, components, values.to_vec()).map_err(|m| Error::config(location, m))
}

fn dynamics(location: &str, dim: usize, f: &DynamicsFamily) -> Result<Dynamics> {
    Ok(match f {
        DynamicsFamily::Constant { value } => Dynamics::Constant(value.clone()),
        DynamicsFamily::Affine {
            offset,
            state,
            control,
            time,
        } => Dynamics::Affine {
            offset: offset.clone(),
            state: state.clone().unwrap_or_else(|| vec![vec![0.0; dim]; dim]),
            control: control.clone(),
            time: time.clone().unwrap_or_else(|| vec![0.0; dim]),
        },
        DynamicsFamily::Tabulated {
            lower,
            upper,
            counts,
            values,
            control,
        } => Dynamics::Tabulated {
            table: table(&format!("{location}.values"), dim, lower, upper, counts, dim, values)?,
            control: control.clone(),
        },
        DynamicsFamily::EikonalDemo { speed } => Dynamics::EikonalDemo { speed: *speed },
        DynamicsFamily::GapDemo { drift } => Dynamics::GapDemo {
            drift: drift.clone().unwrap_or_else(|| vec![0.0; dim]),
        },
    })
}

fn cost(location: &str, dim: usize, f: &CostFamily) -> Result<Cost> {
    Ok(match f {
        CostFamily::Constant { value } => Cost::Constant(*value),
        CostFamily::Affine {
            offset,
            state,
            control,
            time,
        } => Cost::Affine {
            offset: *offset,
            state: state.clone().unwrap_or_else(|| vec![0.0; dim]),
            control: control.clone(),
            time: *time,
        },
        CostFamily::Tabulated {
            lower,
            upper,
            counts,
            values,
            control,
        } => Cost::Tabulated {
            table: table(&format!("{location}.values"), dim, lower, upper, counts, 1, values)?,
            control: control.clone(),
        },
        CostFamily::EikonalDemo { value } => Cost::EikonalDemo { value: *value },
        CostFamily::GapDemo { slope } => Cost::GapDemo { slope: *slope },
    })
}

fn terminal(location: &str, dim: usize, f: &TerminalFamily) -> Result<Terminal> {
    Ok(match f {
        TerminalFamily::Constant { value } => Terminal::Constant(*value),
        TerminalFamily::Affine { offset, weights } => Terminal::Affine {
            offset: *offset,
            weights: weights.clone(),
        },
        TerminalFamily::Tabulated {
            lower,
            upper,
            counts,
            values,
        } => Terminal::Tabulated(table(&format!("{location}.values"), dim, lower, upper, counts, 1, values)?),
        TerminalFamily::EikonalDemo { cap } => Terminal::EikonalDemo { cap: *cap },
        TerminalFamily::GapDemo { slope, cap } => Terminal::GapDemo { slope: *slope, cap: *cap },
    })
}

fn controls(location: &str, c: &ControlSamples) -> Result<ControlSet> {
    match (&c.points, &c.lower, &c.upper, &c.counts) {
        (Some(points), None, None, None) => {
            let dim = points.first().map_or(0, Vec::len);
            ControlSet::new(dim, points.clone()).map_err(at(location))
        }
        (None, Some(lower), Some(upper), Some(counts)) => ControlSet::uniform(lower, upper, counts).map_err(at(location)),
        _ => Err(Error::config(location, "give either `points` or all of `lower`, `upper`, `counts`")),
    }
}

fn side(name: &str, dim: usize, s: &SideSection) -> Result<SideData> {
    let data = SideData {
        dynamics: dynamics(&format!("{name}.dynamics"), dim, &s.dynamics)?,
        cost: cost(&format!("{name}.cost"), dim, &s.cost)?,
        controls: controls(&format!("{name}.controls"), &s.controls)?,
        bounds: s.bounds,
    };
    let control_dim = data.controls.dim();
    data.dynamics
        .check_shape(dim, control_dim)
        .map_err(|m| Error::config(format!("{name}.dynamics"), m))?;
    data.cost
        .check_shape(dim, control_dim)
        .map_err(|m| Error::config(format!("{name}.cost"), m))?;
    Ok(data)
}

fn build(doc: Document) -> Result<Loaded> {
    let g = &doc.geometry;
    let dim = g.dim;
    if g.lower.len() != dim || g.upper.len() != dim {
        return Err(Error::config("geometry", format!("lower and upper need {dim} entries")));
    }
    if doc.controls.mu_grid == 0 {
        return Err(Error::config("controls.mu_grid", "must be at least 1"));
    }
    if !(doc.controls.ht_slack >= 0.0) {
        return Err(Error::config("controls.ht_slack", "must be nonnegative"));
    }
    let side1 = side("side1", dim, &doc.side1)?;
    let side2 = side("side2", dim, &doc.side2)?;
    let term = terminal("terminal", dim, &doc.terminal.family)?;
    term.check_shape(dim).map_err(|m| Error::config("terminal", m))?;
    let spec = ProblemSpec::new(
        dim,
        side1,
        side2,
        term,
        doc.terminal.horizon,
        doc.controls.delta,
        doc.controls.mu_grid,
        (g.lower.clone(), g.upper.clone()),
    )
    .map_err(at("problem"))?;

    let counts = match (&doc.grid.dx, &doc.grid.nodes) {
        (Some(dx), None) if *dx > 0.0 => g
            .lower
            .iter()
            .zip(&g.upper)
            .map(|(a, b)| ((b - a) / dx).round() as usize + 1)
            .collect(),
        (Some(_), None) => return Err(Error::config("grid.dx", "must be positive")),
        (None, Some(nodes)) => nodes.clone(),
        _ => return Err(Error::config("grid", "give exactly one of `dx` and `nodes`")),
    };
    let uniform = UniformGrid::new(g.lower.clone(), g.upper.clone(), counts).map_err(at("grid"))?;
    let grid = GridSpec::new(uniform, spec.horizon(), spec.max_speed(), doc.grid.dt).map_err(at("grid"))?;

    let run = doc.run;
    if run.intervals == 0 {
        return Err(Error::config("run.intervals", "must be at least 1"));
    }
    if run.stride == 0 {
        return Err(Error::config("run.stride", "must be at least 1"));
    }
    if let Some(x0) = &run.x0 {
        if x0.len() != dim {
            return Err(Error::config("run.x0", format!("needs {dim} entries")));
        }
    }
    if let Some(t) = run.t {
        if !(t > 0.0 && t <= spec.horizon()) {
            return Err(Error::config("run.t", "must lie in (0, T]"));
        }
    }

    let perturbation = match &doc.perturbation {
        None => None,
        Some(p) => {
            let mut family = PerturbationFamily::new(p.epsilons.clone(), p.bounds, p.slope).map_err(at("perturbation.epsilons"))?;
            family.db1 = p.db1.as_ref().map(|f| dynamics("perturbation.db1", dim, f)).transpose()?;
            family.db2 = p.db2.as_ref().map(|f| dynamics("perturbation.db2", dim, f)).transpose()?;
            family.dl1 = p.dl1.as_ref().map(|f| cost("perturbation.dl1", dim, f)).transpose()?;
            family.dl2 = p.dl2.as_ref().map(|f| cost("perturbation.dl2", dim, f)).transpose()?;
            family.dg = p.dg.as_ref().map(|f| terminal("perturbation.dg", dim, f)).transpose()?;
            let (c1, c2) = (spec.controls(Side::One).dim(), spec.controls(Side::Two).dim());
            for (name, db, cdim) in [("perturbation.db1", &family.db1, c1), ("perturbation.db2", &family.db2, c2)] {
                if let Some(db) = db {
                    db.check_shape(dim, cdim).map_err(|m| Error::config(name, m))?;
                }
            }
            for (name, dl, cdim) in [("perturbation.dl1", &family.dl1, c1), ("perturbation.dl2", &family.dl2, c2)] {
                if let Some(dl) = dl {
                    dl.check_shape(dim, cdim).map_err(|m| Error::config(name, m))?;
                }
            }
            if let Some(dg) = &family.dg {
                dg.check_shape(dim).map_err(|m| Error::config("perturbation.dg", m))?;
            }
            Some(family)
        }
    };

    Ok(Loaded {
        spec,
        grid,
        ht_slack: doc.controls.ht_slack,
        run,
        perturbation,
    })
}
