//! Semi-Lagrangian scheme for the two value functions.
//!
//! Time is the remaining horizon: layer `n` holds `u(·, n·dt)` with
//! `u(·, 0) = g`, and one step applies the discrete dynamic programming
//! principle over `dt`. Off the interface a node minimizes over its own side's
//! controls; on the interface layer it minimizes over side-1 controls entering
//! `Ω̄₁`, side-2 controls entering `Ω̄₂`, and the tangent mixtures of `A₀`
//! (regular ones only for [`Variant::Plus`]).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ValueField, Variant};
use crate::grid::GridSpec;
use crate::hamiltonians::{interface_controls, ControlTriple};
use crate::problem::{ProblemSpec, Side};

/// Minimizing strategy of one nodal update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Choice {
    Side { side: Side, control: usize },
    Interface { triple: ControlTriple, regular: bool },
}

/// Marches `g` forward over the whole horizon.
pub fn solve(spec: &ProblemSpec, grid: &GridSpec, variant: Variant) -> Result<ValueField> {
    check_compatible(spec, grid)?;
    let g: Vec<f64> = (0..grid.grid.len())
        .into_par_iter()
        .map(|node| spec.terminal(&grid.grid.node_coords(node)))
        .collect();
    let mut field = ValueField::new(variant, grid.clone(), g);
    for n in 0..grid.steps {
        let next = step_layer(spec, grid, variant, field.layer(n), n)?;
        field.push(next);
    }
    Ok(field)
}

fn check_compatible(spec: &ProblemSpec, grid: &GridSpec) -> Result<()> {
    if grid.grid.dim() != spec.dim() {
        return Err(Error::invalid(format!(
            "grid has dimension {}, problem has {}",
            grid.grid.dim(),
            spec.dim()
        )));
    }
    let cfl = grid.grid.min_spacing() / spec.max_speed().max(1e-300);
    if grid.dt > cfl * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("time step {} exceeds dx_min / M_b = {cfl}", grid.dt)));
    }
    Ok(())
}

/// Layer `n + 1` from layer `n`.
pub fn step_layer(spec: &ProblemSpec, grid: &GridSpec, variant: Variant, prev: &[f64], n: usize) -> Result<Vec<f64>> {
    let results: Vec<Result<f64>> = (0..grid.grid.len())
        .into_par_iter()
        .map(|node| node_update(spec, grid, variant, prev, n, node).map(|(v, _)| v))
        .collect();
    // report the lowest failing node regardless of scheduling
    results.into_iter().collect()
}

/// Value and minimizing strategy at `node` for the step from layer `n`.
pub fn node_update(
    spec: &ProblemSpec,
    grid: &GridSpec,
    variant: Variant,
    prev: &[f64],
    n: usize,
    node: usize,
) -> Result<(f64, Choice)> {
    let t_next = grid.time(n + 1);
    let x = grid.grid.node_coords(node);
    if variant == Variant::SingleDomain {
        let (v, k) = step_interior(spec, grid, prev, t_next, &x, Side::One);
        return Ok((v, Choice::Side { side: Side::One, control: k }));
    }
    if grid.is_interface_node(node) {
        return step_interface(spec, grid, prev, t_next, &x, variant).map_err(|e| match e {
            Error::EmptyInterfaceStep { .. } => Error::EmptyInterfaceStep { node, step: n },
            other => other,
        });
    }
    let side = if x[spec.dim() - 1] > 0.0 { Side::One } else { Side::Two };
    let (v, k) = step_interior(spec, grid, prev, t_next, &x, side);
    Ok((v, Choice::Side { side, control: k }))
}

/// `min over α of dt·l_i(x, t, α) + I[prev](x + dt·b_i(x, t, α))`, with the
/// first minimizing control.
pub fn step_interior(spec: &ProblemSpec, grid: &GridSpec, prev: &[f64], t: f64, x: &[f64], side: Side) -> (f64, usize) {
    let dt = grid.dt;
    let mut b = vec![0.0; spec.dim()];
    let mut foot = vec![0.0; spec.dim()];
    let mut best = (f64::INFINITY, 0);
    for k in 0..spec.controls(side).len() {
        spec.dynamics(side, x, t, k, &mut b);
        for c in 0..foot.len() {
            foot[c] = x[c] + dt * b[c];
        }
        let v = dt * spec.cost(side, x, t, k) + grid.grid.interpolate(prev, &foot);
        if v < best.0 {
            best = (v, k);
        }
    }
    best
}

/// Interface update over the three strategy classes. Errors with
/// [`Error::EmptyInterfaceStep`] when every class is empty.
pub fn step_interface(
    spec: &ProblemSpec,
    grid: &GridSpec,
    prev: &[f64],
    t: f64,
    x: &[f64],
    variant: Variant,
) -> Result<(f64, Choice)> {
    let dim = spec.dim();
    let dt = grid.dt;
    let tol = spec.tangency_tol();
    let mut b = vec![0.0; dim];
    let mut foot = vec![0.0; dim];
    let mut best: Option<(f64, Choice)> = None;
    let offer = |v: f64, choice: Choice, best: &mut Option<(f64, Choice)>| {
        if best.map_or(true, |(cur, _)| v < cur) {
            *best = Some((v, choice));
        }
    };
    for side in Side::BOTH {
        for k in 0..spec.controls(side).len() {
            spec.dynamics(side, x, t, k, &mut b);
            if !(side.normal_component(&b) <= tol) {
                continue;
            }
            for c in 0..dim {
                foot[c] = x[c] + dt * b[c];
            }
            let v = dt * spec.cost(side, x, t, k) + grid.grid.interpolate(prev, &foot);
            offer(v, Choice::Side { side, control: k }, &mut best);
        }
    }
    let set = interface_controls(spec, x, t);
    for k in 0..set.len() {
        let regular = set.regular[k];
        if variant == Variant::Plus && !regular {
            continue;
        }
        let v_h = set.velocity(k);
        for c in 0..dim {
            foot[c] = x[c] + dt * v_h[c];
        }
        foot[dim - 1] = 0.0;
        let v = dt * set.cost(k) + grid.grid.interpolate(prev, &foot);
        offer(
            v,
            Choice::Interface {
                triple: set.triples[k],
                regular,
            },
            &mut best,
        );
    }
    best.ok_or(Error::EmptyInterfaceStep { node: 0, step: 0 })
}
