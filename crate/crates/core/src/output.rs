//! Deterministic artifact writers: comma-separated tables with a header row
//! and pretty-printed JSON documents.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ValueField;
use crate::trajectory::Trajectory;
use crate::verification::{ConvergenceTable, GapSample};

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io(parent))?;
    }
    fs::write(path, text).map_err(io(path))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value))
}

fn coordinate_header(dim: usize) -> String {
    (1..=dim).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",")
}

/// One row per node and written time layer: coordinates, time, value.
/// Every `time_stride`-th layer is written, and always the last one.
pub fn field_csv(field: &ValueField, time_stride: usize) -> String {
    let grid = field.grid();
    let g = &grid.grid;
    let mut out = format!("{},t,value\n", coordinate_header(g.dim()));
    let stride = time_stride.max(1);
    let mut x = vec![0.0; g.dim()];
    for n in (0..=field.steps()).filter(|n| n % stride == 0 || *n == field.steps()) {
        let t = grid.time(n);
        for (node, v) in field.layer(n).iter().enumerate() {
            g.node_coords_into(node, &mut x);
            for c in &x {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{t},{v}");
        }
    }
    out
}

/// One row per recorded time; step columns describe the step ending there.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.states.first().map_or(0, Vec::len);
    let mut out = format!("s,{},region,running_cost,step_class,mu\n", coordinate_header(dim));
    for k in 0..traj.times.len() {
        let _ = write!(out, "{}", traj.times[k]);
        for c in &traj.states[k] {
            let _ = write!(out, ",{c}");
        }
        let _ = write!(out, ",{},{}", traj.regions[k].as_str(), traj.running_cost[k]);
        if k == 0 {
            out.push_str(",,\n");
        } else {
            let mu = traj.mixture[k - 1].map(|m| m.to_string()).unwrap_or_default();
            let _ = writeln!(out, ",{},{mu}", traj.step_classes[k - 1].as_str());
        }
    }
    out
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from("dx,dt,error,order\n");
    for r in &table.rows {
        let order = r.order.map(|o| o.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{order}", r.dx, r.dt, r.error);
    }
    out
}

pub fn gap_profile_csv(profile: &[GapSample]) -> String {
    let dim = profile.first().map_or(1, |s| s.x.len());
    let mut out = format!("{},gap\n", coordinate_header(dim));
    for s in profile {
        for c in &s.x {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{}", s.gap);
    }
    out
}

/// Machine-readable summary written next to the outputs of a failed run.
#[derive(Debug, Clone, Serialize)]
pub struct FailureSummary {
    pub command: String,
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    pub failed_checks: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Variant;
    use crate::grid::{GridSpec, UniformGrid};

    #[test]
    fn field_csv_has_header_and_one_row_per_node() {
        let grid = GridSpec::new(UniformGrid::new(vec![-1.0], vec![1.0], vec![3]).unwrap(), 1.0, 1.0, Some(0.5)).unwrap();
        let field = ValueField::from_layers(Variant::Minus, grid, vec![vec![1.0, 0.0, 1.0], vec![1.5, 0.5, 1.5], vec![2.0, 1.0, 2.0]]);
        let text = field_csv(&field, 2);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,t,value");
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert_eq!(lines[1], "-1,0,1");
        assert_eq!(lines[6], "1,1,2");
    }

    #[test]
    fn json_ends_with_newline() {
        assert_eq!(to_json(&[1, 2]), "[\n  1,\n  2\n]\n");
    }
}
