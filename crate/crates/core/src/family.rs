//! Builtin parametric families for dynamics `b_i(x, t, α)`, running costs
//! `l_i(x, t, α)` and terminal costs `g(x)`.

use std::fmt;
use std::sync::Arc;

use crate::grid::UniformGrid;

pub type DynamicsFn = dyn Fn(&[f64], f64, &[f64], &mut [f64]) + Send + Sync;
pub type CostFn = dyn Fn(&[f64], f64, &[f64]) -> f64 + Send + Sync;
pub type TerminalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Values tabulated on a uniform grid in `x`, interpolated multilinearly and
/// extended constantly outside the grid box.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub grid: UniformGrid,
    pub components: usize,
    pub values: Vec<f64>,
}

impl Table {
    pub fn new(grid: UniformGrid, components: usize, values: Vec<f64>) -> Result<Self, String> {
        if components == 0 {
            return Err("table needs at least one component".into());
        }
        if values.len() != grid.len() * components {
            return Err(format!(
                "table has {} values, expected {} nodes x {} components",
                values.len(),
                grid.len(),
                components
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err("table values must be finite".into());
        }
        Ok(Self {
            grid,
            components,
            values,
        })
    }

    /// Tabulates `f` at the nodes of `grid`.
    pub fn sample(grid: UniformGrid, components: usize, f: impl Fn(&[f64], &mut [f64])) -> Self {
        let mut values = vec![0.0; grid.len() * components];
        for node in 0..grid.len() {
            let x = grid.node_coords(node);
            f(&x, &mut values[node * components..(node + 1) * components]);
        }
        Self {
            grid,
            components,
            values,
        }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.grid.interpolate_components(&self.values, self.components, x, out);
    }

    pub fn eval_scalar(&self, x: &[f64]) -> f64 {
        self.grid.interpolate(&self.values, x)
    }
}

/// Largest supported state dimension.
pub const MAX_DIM: usize = 4;

#[derive(Clone)]
pub enum Dynamics {
    Constant(Vec<f64>),
    /// `b = offset + state·x + control·α + time·t`.
    Affine {
        offset: Vec<f64>,
        state: Vec<Vec<f64>>,
        control: Vec<Vec<f64>>,
        time: Vec<f64>,
    },
    /// `b = table(x) + control·α`.
    Tabulated { table: Table, control: Vec<Vec<f64>> },
    /// `b = speed·α` with `α ∈ ℝ^N`.
    EikonalDemo { speed: f64 },
    /// `b = drift + α₀ e_N` with a scalar control.
    GapDemo { drift: Vec<f64> },
    /// `b = base + eps·delta`.
    Perturbed {
        base: Box<Dynamics>,
        eps: f64,
        delta: Box<Dynamics>,
    },
    Custom(Arc<DynamicsFn>),
}

impl fmt::Debug for Dynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dynamics::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Dynamics::Affine {
                offset,
                state,
                control,
                time,
            } => f
                .debug_struct("Affine")
                .field("offset", offset)
                .field("state", state)
                .field("control", control)
                .field("time", time)
                .finish(),
            Dynamics::Tabulated { table, control } => f
                .debug_struct("Tabulated")
                .field("counts", &table.grid.counts())
                .field("control", control)
                .finish(),
            Dynamics::EikonalDemo { speed } => f.debug_struct("EikonalDemo").field("speed", speed).finish(),
            Dynamics::GapDemo { drift } => f.debug_struct("GapDemo").field("drift", drift).finish(),
            Dynamics::Perturbed { base, eps, delta } => f
                .debug_struct("Perturbed")
                .field("base", base)
                .field("eps", eps)
                .field("delta", delta)
                .finish(),
            Dynamics::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Dynamics {
    /// Writes `b(x, t, α)` into `out` (length `N`).
    pub fn eval(&self, x: &[f64], t: f64, a: &[f64], out: &mut [f64]) {
        match self {
            Dynamics::Constant(v) => out.copy_from_slice(v),
            Dynamics::Affine {
                offset,
                state,
                control,
                time,
            } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = offset[i] + time[i] * t + dot(&state[i], x) + dot(&control[i], a);
                }
            }
            Dynamics::Tabulated { table, control } => {
                table.eval(x, out);
                for (i, o) in out.iter_mut().enumerate() {
                    *o += dot(&control[i], a);
                }
            }
            Dynamics::EikonalDemo { speed } => {
                for (o, ai) in out.iter_mut().zip(a) {
                    *o = speed * ai;
                }
            }
            Dynamics::GapDemo { drift } => {
                out.copy_from_slice(drift);
                let n = out.len();
                out[n - 1] += a[0];
            }
            Dynamics::Perturbed { base, eps, delta } => {
                base.eval(x, t, a, out);
                let mut extra = [0.0; MAX_DIM];
                let extra = &mut extra[..out.len()];
                delta.eval(x, t, a, extra);
                for (o, e) in out.iter_mut().zip(extra.iter()) {
                    *o += eps * e;
                }
            }
            Dynamics::Custom(f) => f(x, t, a, out),
        }
    }

    /// Checks coefficient shapes against the state and control dimensions.
    pub fn check_shape(&self, dim: usize, control_dim: usize) -> Result<(), String> {
        let mat = |m: &Vec<Vec<f64>>, cols: usize, what: &str| -> Result<(), String> {
            if m.len() != dim || m.iter().any(|r| r.len() != cols) {
                Err(format!("{what} must be a {dim}x{cols} matrix"))
            } else {
                Ok(())
            }
        };
        match self {
            Dynamics::Constant(v) if v.len() != dim => Err(format!("value must have {dim} components")),
            Dynamics::Constant(_) => Ok(()),
            Dynamics::Affine {
                offset,
                state,
                control,
                time,
            } => {
                if offset.len() != dim || time.len() != dim {
                    return Err(format!("offset and time must have {dim} components"));
                }
                mat(state, dim, "state")?;
                mat(control, control_dim, "control")
            }
            Dynamics::Tabulated { table, control } => {
                if table.components != dim || table.grid.dim() != dim {
                    return Err(format!("table must be {dim}-dimensional with {dim} components"));
                }
                mat(control, control_dim, "control")
            }
            Dynamics::EikonalDemo { .. } if control_dim != dim => {
                Err(format!("eikonal-demo needs {dim}-dimensional controls"))
            }
            Dynamics::EikonalDemo { .. } => Ok(()),
            Dynamics::GapDemo { drift } => {
                if drift.len() != dim {
                    Err(format!("drift must have {dim} components"))
                } else if control_dim != 1 {
                    Err("gap-demo needs scalar controls".into())
                } else {
                    Ok(())
                }
            }
            Dynamics::Perturbed { base, delta, .. } => {
                base.check_shape(dim, control_dim)?;
                delta.check_shape(dim, control_dim)
            }
            Dynamics::Custom(_) => Ok(()),
        }
    }
}

#[derive(Clone)]
pub enum Cost {
    Constant(f64),
    /// `l = offset + state·x + control·α + time·t`.
    Affine {
        offset: f64,
        state: Vec<f64>,
        control: Vec<f64>,
        time: f64,
    },
    /// `l = table(x) + control·α`.
    Tabulated { table: Table, control: Vec<f64> },
    EikonalDemo { value: f64 },
    /// `l = 1 + slope·α₀`.
    GapDemo { slope: f64 },
    Perturbed {
        base: Box<Cost>,
        eps: f64,
        delta: Box<Cost>,
    },
    Custom(Arc<CostFn>),
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Cost::Affine {
                offset,
                state,
                control,
                time,
            } => f
                .debug_struct("Affine")
                .field("offset", offset)
                .field("state", state)
                .field("control", control)
                .field("time", time)
                .finish(),
            Cost::Tabulated { table, control } => f
                .debug_struct("Tabulated")
                .field("counts", &table.grid.counts())
                .field("control", control)
                .finish(),
            Cost::EikonalDemo { value } => f.debug_struct("EikonalDemo").field("value", value).finish(),
            Cost::GapDemo { slope } => f.debug_struct("GapDemo").field("slope", slope).finish(),
            Cost::Perturbed { base, eps, delta } => f
                .debug_struct("Perturbed")
                .field("base", base)
                .field("eps", eps)
                .field("delta", delta)
                .finish(),
            Cost::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Cost {
    pub fn eval(&self, x: &[f64], t: f64, a: &[f64]) -> f64 {
        match self {
            Cost::Constant(v) => *v,
            Cost::Affine {
                offset,
                state,
                control,
                time,
            } => offset + time * t + dot(state, x) + dot(control, a),
            Cost::Tabulated { table, control } => table.eval_scalar(x) + dot(control, a),
            Cost::EikonalDemo { value } => *value,
            Cost::GapDemo { slope } => 1.0 + slope * a[0],
            Cost::Perturbed { base, eps, delta } => base.eval(x, t, a) + eps * delta.eval(x, t, a),
            Cost::Custom(f) => f(x, t, a),
        }
    }

    pub fn check_shape(&self, dim: usize, control_dim: usize) -> Result<(), String> {
        match self {
            Cost::Affine { state, control, .. } => {
                if state.len() != dim {
                    Err(format!("state must have {dim} components"))
                } else if control.len() != control_dim {
                    Err(format!("control must have {control_dim} components"))
                } else {
                    Ok(())
                }
            }
            Cost::Tabulated { table, control } => {
                if table.components != 1 || table.grid.dim() != dim {
                    Err(format!("table must be {dim}-dimensional and scalar"))
                } else if control.len() != control_dim {
                    Err(format!("control must have {control_dim} components"))
                } else {
                    Ok(())
                }
            }
            Cost::GapDemo { .. } if control_dim != 1 => Err("gap-demo needs scalar controls".into()),
            Cost::Perturbed { base, delta, .. } => {
                base.check_shape(dim, control_dim)?;
                delta.check_shape(dim, control_dim)
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone)]
pub enum Terminal {
    Constant(f64),
    Affine { offset: f64, weights: Vec<f64> },
    Tabulated(Table),
    /// `g = min(|x|, cap)`.
    EikonalDemo { cap: f64 },
    /// `g = min(slope·|x_N|, cap)`.
    GapDemo { slope: f64, cap: f64 },
    Perturbed {
        base: Box<Terminal>,
        eps: f64,
        delta: Box<Terminal>,
    },
    Custom(Arc<TerminalFn>),
}

impl fmt::Debug for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Terminal::Affine { offset, weights } => f
                .debug_struct("Affine")
                .field("offset", offset)
                .field("weights", weights)
                .finish(),
            Terminal::Tabulated(t) => f.debug_struct("Tabulated").field("counts", &t.grid.counts()).finish(),
            Terminal::EikonalDemo { cap } => f.debug_struct("EikonalDemo").field("cap", cap).finish(),
            Terminal::GapDemo { slope, cap } => f
                .debug_struct("GapDemo")
                .field("slope", slope)
                .field("cap", cap)
                .finish(),
            Terminal::Perturbed { base, eps, delta } => f
                .debug_struct("Perturbed")
                .field("base", base)
                .field("eps", eps)
                .field("delta", delta)
                .finish(),
            Terminal::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Terminal {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Terminal::Constant(v) => *v,
            Terminal::Affine { offset, weights } => offset + dot(weights, x),
            Terminal::Tabulated(t) => t.eval_scalar(x),
            Terminal::EikonalDemo { cap } => x.iter().map(|v| v * v).sum::<f64>().sqrt().min(*cap),
            Terminal::GapDemo { slope, cap } => (slope * x[x.len() - 1].abs()).min(*cap),
            Terminal::Perturbed { base, eps, delta } => base.eval(x) + eps * delta.eval(x),
            Terminal::Custom(f) => f(x),
        }
    }

    pub fn check_shape(&self, dim: usize) -> Result<(), String> {
        match self {
            Terminal::Affine { weights, .. } if weights.len() != dim => {
                Err(format!("weights must have {dim} components"))
            }
            Terminal::Tabulated(t) if t.components != 1 || t.grid.dim() != dim => {
                Err(format!("table must be {dim}-dimensional and scalar"))
            }
            Terminal::Perturbed { base, delta, .. } => {
                base.check_shape(dim)?;
                delta.check_shape(dim)
            }
            _ => Ok(()),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_dynamics_is_b0_plus_b1x_plus_b2a() {
        let b = Dynamics::Affine {
            offset: vec![1.0, -1.0],
            state: vec![vec![0.0, 2.0], vec![1.0, 0.0]],
            control: vec![vec![1.0], vec![3.0]],
            time: vec![0.0, 0.5],
        };
        assert!(b.check_shape(2, 1).is_ok());
        let mut out = [0.0; 2];
        b.eval(&[0.5, 0.25], 2.0, &[0.1], &mut out);
        assert!((out[0] - (1.0 + 0.5 + 0.1)).abs() < 1e-15);
        assert!((out[1] - (-1.0 + 0.5 + 0.3 + 1.0)).abs() < 1e-15);
        assert!(b.check_shape(2, 2).is_err());
    }

    #[test]
    fn gap_demo_families() {
        let b = Dynamics::GapDemo { drift: vec![0.0] };
        let mut out = [0.0];
        b.eval(&[0.3], 0.0, &[-0.5], &mut out);
        assert_eq!(out[0], -0.5);
        assert_eq!(Cost::GapDemo { slope: -1.0 }.eval(&[0.0], 0.0, &[0.25]), 0.75);
        assert_eq!(Cost::GapDemo { slope: 1.0 }.eval(&[0.0], 0.0, &[0.25]), 1.25);
        let g = Terminal::GapDemo { slope: 2.0, cap: 2.0 };
        assert_eq!(g.eval(&[-0.25]), 0.5);
        assert_eq!(g.eval(&[1.5]), 2.0);
    }

    #[test]
    fn perturbation_adds_scaled_delta() {
        let b = Dynamics::Perturbed {
            base: Box::new(Dynamics::Constant(vec![1.0, 0.0])),
            eps: 0.1,
            delta: Box::new(Dynamics::Constant(vec![0.0, 2.0])),
        };
        let mut out = [0.0; 2];
        b.eval(&[0.0, 0.0], 0.0, &[], &mut out);
        assert_eq!(out, [1.0, 0.2]);
        let l = Cost::Perturbed {
            base: Box::new(Cost::Constant(1.0)),
            eps: 0.5,
            delta: Box::new(Cost::Constant(1.0)),
        };
        assert_eq!(l.eval(&[0.0], 0.0, &[0.0]), 1.5);
    }

    #[test]
    fn tabulated_interpolates_linear_data_exactly() {
        let grid = UniformGrid::new(vec![-1.0], vec![1.0], vec![11]).unwrap();
        let t = Table::sample(grid, 1, |x, o| o[0] = 3.0 * x[0] - 1.0);
        assert!((t.eval_scalar(&[0.37]) - 0.11).abs() < 1e-12);
        // constant extension outside the box
        assert!((t.eval_scalar(&[4.0]) - 2.0).abs() < 1e-12);
    }
}
