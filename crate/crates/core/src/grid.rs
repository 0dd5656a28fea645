//! Uniform tensor grids, multilinear interpolation, and the space-time grid
//! used by the solver.

use serde::Serialize;

use crate::error::{Error, Result};

/// Axis-aligned uniform grid. Node index `Σ i_k · stride_k` with the first
/// axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformGrid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    counts: Vec<usize>,
    #[serde(skip)]
    spacing: Vec<f64>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    axes: Vec<Vec<f64>>,
}

impl UniformGrid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let dim = lower.len();
        if dim == 0 || upper.len() != dim || counts.len() != dim {
            return Err(Error::invalid(format!(
                "grid bounds and node counts must share one nonzero dimension (got {}, {}, {})",
                lower.len(),
                upper.len(),
                counts.len()
            )));
        }
        for k in 0..dim {
            if !(lower[k].is_finite() && upper[k].is_finite()) || upper[k] < lower[k] {
                return Err(Error::invalid(format!("axis {k}: bad bounds [{}, {}]", lower[k], upper[k])));
            }
            if counts[k] == 0 || (counts[k] == 1 && upper[k] > lower[k]) {
                return Err(Error::invalid(format!("axis {k}: need at least two nodes")));
            }
        }
        let spacing: Vec<f64> = (0..dim)
            .map(|k| {
                if counts[k] > 1 {
                    (upper[k] - lower[k]) / (counts[k] - 1) as f64
                } else {
                    0.0
                }
            })
            .collect();
        let mut strides = vec![1; dim];
        for k in 1..dim {
            strides[k] = strides[k - 1] * counts[k - 1];
        }
        let axes = (0..dim)
            .map(|k| {
                (0..counts[k])
                    .map(|i| {
                        let x = lower[k] + i as f64 * spacing[k];
                        // pin exact zeros so the interface layer is exact
                        if spacing[k] > 0.0 && x.abs() <= 1e-9 * spacing[k] {
                            0.0
                        } else if i + 1 == counts[k] {
                            upper[k]
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            lower,
            upper,
            counts,
            spacing,
            strides,
            axes,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn axis(&self, k: usize) -> &[f64] {
        &self.axes[k]
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing
            .iter()
            .copied()
            .filter(|h| *h > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn multi_index(&self, mut node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in 0..self.dim() {
            idx[k] = node % self.counts[k];
            node /= self.counts[k];
        }
        idx
    }

    pub fn node_coords(&self, node: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.node_coords_into(node, &mut x);
        x
    }

    pub fn node_coords_into(&self, mut node: usize, out: &mut [f64]) {
        for k in 0..self.dim() {
            out[k] = self.axes[k][node % self.counts[k]];
            node /= self.counts[k];
        }
    }

    /// Index of the node shifted by `delta` along `axis`, if it exists.
    pub fn neighbor(&self, node: usize, axis: usize, delta: isize) -> Option<usize> {
        let i = (node / self.strides[axis]) % self.counts[axis];
        let j = i as isize + delta;
        if j < 0 || j >= self.counts[axis] as isize {
            None
        } else {
            Some((node as isize + delta * self.strides[axis] as isize) as usize)
        }
    }

    /// Distance from a node to the nearest box face.
    pub fn distance_to_boundary(&self, node: usize) -> f64 {
        let x = self.node_coords(node);
        (0..self.dim())
            .map(|k| (x[k] - self.lower[k]).min(self.upper[k] - x[k]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(k, v)| *v >= self.lower[k] && *v <= self.upper[k])
    }

    /// Multilinear interpolation of nodal `values`; `x` is clamped to the box
    /// coordinate-wise first.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let mut out = [0.0];
        self.interpolate_components(values, 1, x, &mut out);
        out[0]
    }

    /// Multilinear interpolation of a field with `components` values per node
    /// (stored contiguously per node).
    pub fn interpolate_components(&self, values: &[f64], components: usize, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(values.len(), self.len() * components);
        let dim = self.dim();
        let mut base = 0usize;
        let mut frac = [0.0f64; MAX_INTERP_DIM];
        let mut moving = [false; MAX_INTERP_DIM];
        assert!(dim <= MAX_INTERP_DIM, "interpolation supports up to {MAX_INTERP_DIM} axes");
        for k in 0..dim {
            let n = self.counts[k];
            if n == 1 {
                continue;
            }
            let xk = x[k].clamp(self.lower[k], self.upper[k]);
            let r = (xk - self.lower[k]) / self.spacing[k];
            let mut i = r.floor() as isize;
            i = i.clamp(0, n as isize - 2);
            let f = (r - i as f64).clamp(0.0, 1.0);
            base += i as usize * self.strides[k];
            frac[k] = f;
            moving[k] = f > 0.0;
        }
        for o in out.iter_mut().take(components) {
            *o = 0.0;
        }
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut idx = base;
            let mut skip = false;
            for k in 0..dim {
                if corner & (1 << k) != 0 {
                    if !moving[k] {
                        skip = true;
                        break;
                    }
                    w *= frac[k];
                    idx += self.strides[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if skip || w == 0.0 {
                continue;
            }
            for c in 0..components {
                out[c] += w * values[idx * components + c];
            }
        }
    }
}

const MAX_INTERP_DIM: usize = 6;

/// Space-time grid: a uniform spatial grid with a node layer on `{x_N = 0}`,
/// and `steps` time steps of length `dt` with `steps · dt = T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub grid: UniformGrid,
    pub dt: f64,
    pub steps: usize,
    /// Index along the last axis of the layer lying on the interface.
    pub interface_layer: usize,
}

impl GridSpec {
    /// Builds the space-time grid. `dt` defaults to `dx_min / (2 M_b)`, then
    /// is shrunk so that an integer number of steps covers the horizon.
    pub fn new(grid: UniformGrid, horizon: f64, max_speed: f64, dt: Option<f64>) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        let last = grid.dim() - 1;
        let interface_layer = grid
            .axis(last)
            .iter()
            .position(|&v| v == 0.0)
            .ok_or_else(|| Error::invalid("no grid node layer lies on x_N = 0; choose the box and node count so 0 is a grid coordinate"))?;
        let dx = grid.min_spacing();
        if !dx.is_finite() {
            return Err(Error::invalid("grid has no spatial extent"));
        }
        let cfl = if max_speed > 0.0 { dx / max_speed } else { f64::INFINITY };
        let requested = match dt {
            Some(v) if v > 0.0 => v,
            Some(v) => return Err(Error::invalid(format!("time step must be positive, got {v}"))),
            None if max_speed > 0.0 => dx / (2.0 * max_speed),
            None => dx,
        };
        if requested > cfl * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "time step {requested} exceeds dx_min / M_b = {cfl}"
            )));
        }
        let steps = ((horizon / requested) - 1e-9).ceil().max(1.0) as usize;
        Ok(Self {
            grid,
            dt: horizon / steps as f64,
            steps,
            interface_layer,
        })
    }

    /// Uniform grid of spacing `dx` on the box.
    pub fn with_spacing(lower: Vec<f64>, upper: Vec<f64>, dx: f64, horizon: f64, max_speed: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::invalid("spacing must be positive"));
        }
        let counts = lower
            .iter()
            .zip(&upper)
            .map(|(a, b)| ((b - a) / dx).round() as usize + 1)
            .collect();
        let grid = UniformGrid::new(lower, upper, counts)?;
        Self::new(grid, horizon, max_speed, None)
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.horizon()
        } else {
            n as f64 * self.dt
        }
    }

    pub fn is_interface_node(&self, node: usize) -> bool {
        let last = self.grid.dim() - 1;
        (node / self.grid.strides()[last]) % self.grid.counts()[last] == self.interface_layer
    }
}
