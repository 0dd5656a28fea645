//! Space-time value fields produced by the solver.

use serde::{Deserialize, Serialize};

use crate::grid::GridSpec;

/// Which value function a field approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// All tangent mixtures on the interface, singular ones included.
    Minus,
    /// Regular tangent mixtures only.
    Plus,
    /// Side-1 data everywhere, no interface treatment.
    SingleDomain,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Minus => "minus",
            Variant::Plus => "plus",
            Variant::SingleDomain => "single-domain",
        }
    }
}

/// Nodal values `u(x_j, n·dt)` for `n = 0..=steps`.
#[derive(Debug, Clone)]
pub struct ValueField {
    variant: Variant,
    grid: GridSpec,
    layers: Vec<Vec<f64>>,
    layer_min: Vec<f64>,
    layer_max: Vec<f64>,
}

impl ValueField {
    pub(crate) fn new(variant: Variant, grid: GridSpec, initial: Vec<f64>) -> Self {
        let mut field = Self {
            variant,
            grid,
            layers: Vec::new(),
            layer_min: Vec::new(),
            layer_max: Vec::new(),
        };
        field.push(initial);
        field
    }

    pub(crate) fn push(&mut self, layer: Vec<f64>) {
        debug_assert_eq!(layer.len(), self.grid.grid.len());
        self.layer_min.push(layer.iter().copied().fold(f64::INFINITY, f64::min));
        self.layer_max.push(layer.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        self.layers.push(layer);
    }

    /// Builds a field from precomputed layers.
    pub fn from_layers(variant: Variant, grid: GridSpec, layers: Vec<Vec<f64>>) -> Self {
        let mut it = layers.into_iter();
        let mut field = Self::new(variant, grid, it.next().expect("at least one layer"));
        for layer in it {
            field.push(layer);
        }
        field
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt
    }

    /// Number of completed time steps.
    pub fn steps(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, n: usize) -> &[f64] {
        &self.layers[n]
    }

    pub fn last_layer(&self) -> &[f64] {
        self.layers.last().expect("nonempty")
    }

    pub fn value(&self, n: usize, node: usize) -> f64 {
        self.layers[n][node]
    }

    pub fn layer_min(&self) -> &[f64] {
        &self.layer_min
    }

    pub fn layer_max(&self) -> &[f64] {
        &self.layer_max
    }

    /// Multilinear interpolation of layer `n`, clamping `x` to the box.
    pub fn interpolate(&self, n: usize, x: &[f64]) -> f64 {
        self.grid.grid.interpolate(&self.layers[n], x)
    }

    /// Interpolation in space and linearly in time; `t` is clamped to
    /// `[0, steps·dt]`.
    pub fn interpolate_time(&self, x: &[f64], t: f64) -> f64 {
        let last = self.steps();
        let s = (t / self.grid.dt).clamp(0.0, last as f64);
        let n = (s.floor() as usize).min(last);
        let frac = s - n as f64;
        let a = self.interpolate(n, x);
        if frac <= 1e-12 || n == last {
            return a;
        }
        if frac >= 1.0 - 1e-12 {
            return self.interpolate(n + 1, x);
        }
        (1.0 - frac) * a + frac * self.interpolate(n + 1, x)
    }

    /// Layer index whose time is closest to `t`.
    pub fn time_index(&self, t: f64) -> usize {
        ((t / self.grid.dt).round().max(0.0) as usize).min(self.steps())
    }
}
