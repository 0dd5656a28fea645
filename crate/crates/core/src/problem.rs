//! Problem data: the two sides' dynamics and costs, their finite control
//! samples, the terminal cost, and the declared constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Cost, Dynamics, Terminal, MAX_DIM};
use crate::geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::One, Side::Two];

    pub fn index(self) -> usize {
        match self {
            Side::One => 1,
            Side::Two => 2,
        }
    }

    /// `v · n_i` for this side's outward normal.
    #[inline]
    pub fn normal_component(self, v: &[f64]) -> f64 {
        match self {
            Side::One => geometry::dot_n1(v),
            Side::Two => geometry::dot_n2(v),
        }
    }
}

/// Finite sample of a compact control set, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSet {
    dim: usize,
    values: Vec<f64>,
}

impl ControlSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("control sample must be nonempty"));
        }
        if dim == 0 {
            return Err(Error::invalid("controls need at least one component"));
        }
        let mut values = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::invalid(format!("control {i} has {} components, expected {dim}", p.len())));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("control {i} is not finite")));
            }
            values.extend_from_slice(p);
        }
        Ok(Self { dim, values })
    }

    /// Tensor grid of `counts[k]` uniform points on `[lower[k], upper[k]]`,
    /// first axis fastest.
    pub fn uniform(lower: &[f64], upper: &[f64], counts: &[usize]) -> Result<Self> {
        let dim = lower.len();
        if upper.len() != dim || counts.len() != dim || counts.iter().any(|c| *c == 0) {
            return Err(Error::invalid("uniform control grid needs matching bounds and positive counts"));
        }
        let total: usize = counts.iter().product();
        let mut points = Vec::with_capacity(total);
        for mut k in 0..total {
            let mut p = vec![0.0; dim];
            for d in 0..dim {
                let i = k % counts[d];
                k /= counts[d];
                p[d] = if counts[d] == 1 {
                    0.5 * (lower[d] + upper[d])
                } else if i + 1 == counts[d] {
                    upper[d]
                } else {
                    lower[d] + (upper[d] - lower[d]) * i as f64 / (counts[d] - 1) as f64
                };
            }
            points.push(p);
        }
        Self::new(dim, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.dim.max(1))
    }

    /// Number of entries equal to an earlier entry.
    pub fn duplicate_count(&self) -> usize {
        (0..self.len())
            .filter(|&i| (0..i).any(|j| self.get(i) == self.get(j)))
            .count()
    }

    /// Every `stride`-th control, always keeping the last one.
    pub fn subsample(&self, stride: usize) -> Vec<usize> {
        let stride = stride.max(1);
        let mut idx: Vec<usize> = (0..self.len()).step_by(stride).collect();
        if idx.last() != Some(&(self.len() - 1)) {
            idx.push(self.len() - 1);
        }
        idx
    }
}

/// Declared constants of one side: `|b| ≤ speed`, `|l| ≤ cost`, and the
/// Lipschitz constants in `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub speed: f64,
    pub speed_lipschitz: f64,
    pub cost: f64,
    pub cost_lipschitz: f64,
}

#[derive(Debug, Clone)]
pub struct SideData {
    pub dynamics: Dynamics,
    pub cost: Cost,
    pub controls: ControlSet,
    pub bounds: Bounds,
}

/// A complete two-region control problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    dim: usize,
    side1: SideData,
    side2: SideData,
    terminal: Terminal,
    horizon: f64,
    delta: f64,
    mu_grid: usize,
    domain_lower: Vec<f64>,
    domain_upper: Vec<f64>,
    interface_tol: f64,
    tangency_tol: f64,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        side1: SideData,
        side2: SideData,
        terminal: Terminal,
        horizon: f64,
        delta: f64,
        mu_grid: usize,
        domain: (Vec<f64>, Vec<f64>),
    ) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::invalid(format!("dimension must be in 1..={MAX_DIM}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon T must be positive"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid("controllability speed delta must be positive"));
        }
        if mu_grid == 0 {
            return Err(Error::invalid("mu grid needs at least one value"));
        }
        let (lower, upper) = domain;
        if lower.len() != dim || upper.len() != dim || lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(Error::invalid("domain box must have `dim` increasing bounds"));
        }
        for (side, data) in [(1, &side1), (2, &side2)] {
            data.dynamics
                .check_shape(dim, data.controls.dim())
                .map_err(|m| Error::invalid(format!("side{side} dynamics: {m}")))?;
            data.cost
                .check_shape(dim, data.controls.dim())
                .map_err(|m| Error::invalid(format!("side{side} cost: {m}")))?;
            let b = data.bounds;
            if [b.speed, b.speed_lipschitz, b.cost, b.cost_lipschitz]
                .iter()
                .any(|v| !(v.is_finite() && *v >= 0.0))
            {
                return Err(Error::invalid(format!("side{side} bounds must be finite and nonnegative")));
            }
        }
        terminal.check_shape(dim).map_err(|m| Error::invalid(format!("terminal: {m}")))?;
        let interface_tol = geometry::default_tolerance(&lower, &upper);
        let max_speed = side1.bounds.speed.max(side2.bounds.speed);
        Ok(Self {
            dim,
            side1,
            side2,
            terminal,
            horizon,
            delta,
            mu_grid,
            domain_lower: lower,
            domain_upper: upper,
            interface_tol,
            tangency_tol: 1e-10 * max_speed.max(1e-300),
        })
    }

    pub fn with_tangency_tol(mut self, tol: f64) -> Self {
        self.tangency_tol = tol;
        self
    }

    pub fn with_interface_tol(mut self, tol: f64) -> Self {
        self.interface_tol = tol;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_bounds(mut self, side: Side, bounds: Bounds) -> Self {
        match side {
            Side::One => self.side1.bounds = bounds,
            Side::Two => self.side2.bounds = bounds,
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self, side: Side) -> &SideData {
        match side {
            Side::One => &self.side1,
            Side::Two => &self.side2,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut SideData {
        match side {
            Side::One => &mut self.side1,
            Side::Two => &mut self.side2,
        }
    }

    pub fn terminal_family(&self) -> &Terminal {
        &self.terminal
    }

    pub fn set_terminal(&mut self, terminal: Terminal) {
        self.terminal = terminal;
    }

    pub fn controls(&self, side: Side) -> &ControlSet {
        &self.side(side).controls
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mu_grid(&self) -> usize {
        self.mu_grid
    }

    pub fn domain(&self) -> (&[f64], &[f64]) {
        (&self.domain_lower, &self.domain_upper)
    }

    pub fn interface_tol(&self) -> f64 {
        self.interface_tol
    }

    pub fn tangency_tol(&self) -> f64 {
        self.tangency_tol
    }

    /// `M_b`, the largest declared speed over both sides.
    pub fn max_speed(&self) -> f64 {
        self.side1.bounds.speed.max(self.side2.bounds.speed)
    }

    /// `L_b`.
    pub fn speed_lipschitz(&self) -> f64 {
        self.side1.bounds.speed_lipschitz.max(self.side2.bounds.speed_lipschitz)
    }

    /// `M_l`.
    pub fn max_cost(&self) -> f64 {
        self.side1.bounds.cost.max(self.side2.bounds.cost)
    }

    /// `L_l`, the coefficient of the linear modulus `m_l(r) = L_l r`.
    pub fn cost_lipschitz(&self) -> f64 {
        self.side1.bounds.cost_lipschitz.max(self.side2.bounds.cost_lipschitz)
    }

    /// `b_i(x, t, α_k)` written into `out`.
    #[inline]
    pub fn dynamics(&self, side: Side, x: &[f64], t: f64, control: usize, out: &mut [f64]) {
        let data = self.side(side);
        data.dynamics.eval(x, t, data.controls.get(control), out);
    }

    /// `l_i(x, t, α_k)`.
    #[inline]
    pub fn cost(&self, side: Side, x: &[f64], t: f64, control: usize) -> f64 {
        let data = self.side(side);
        data.cost.eval(x, t, data.controls.get(control))
    }

    /// `g(x)`.
    #[inline]
    pub fn terminal(&self, x: &[f64]) -> f64 {
        self.terminal.eval(x)
    }

    /// Interface point with the given tangential coordinates.
    pub fn interface_point(&self, tangential: &[f64]) -> Vec<f64> {
        let mut z = tangential.to_vec();
        z.push(0.0);
        z
    }

    /// The desk-scale problem whose two value functions differ:
    /// `b_i = α e_N` (plus a tangential `drift`), `l₁ = 1 − α`, `l₂ = 1 + α`,
    /// `g = min(2|x_N|, 2)`, `controls` uniform points of `[−1, 1]` per side.
    pub fn gap_demo(dim: usize, controls: usize, drift: &[f64]) -> Result<Self> {
        let mut d = drift.to_vec();
        d.resize(dim, 0.0);
        d[dim - 1] = 0.0;
        let speed = (d.iter().map(|v| v * v).sum::<f64>() + 1.0).sqrt();
        let bounds = Bounds {
            speed,
            speed_lipschitz: 0.0,
            cost: 2.0,
            cost_lipschitz: 0.0,
        };
        let set = ControlSet::uniform(&[-1.0], &[1.0], &[controls])?;
        let side = |slope: f64| SideData {
            dynamics: Dynamics::GapDemo { drift: d.clone() },
            cost: Cost::GapDemo { slope },
            controls: set.clone(),
            bounds,
        };
        let lower = vec![-2.0; dim];
        let upper = vec![2.0; dim];
        Self::new(
            dim,
            side(-1.0),
            side(1.0),
            Terminal::GapDemo { slope: 2.0, cap: 2.0 },
            1.0,
            1.0,
            11,
            (lower, upper),
        )
    }

    /// Continuous-coefficient eikonal problem: `b₁ = b₂ = α`, `|α| ≤ 1`,
    /// `l ≡ 1`, `g = min(|x|, 1)`, in one dimension.
    pub fn eikonal_demo(controls: usize) -> Result<Self> {
        let bounds = Bounds {
            speed: 1.0,
            speed_lipschitz: 0.0,
            cost: 1.0,
            cost_lipschitz: 0.0,
        };
        let set = ControlSet::uniform(&[-1.0], &[1.0], &[controls])?;
        let side = SideData {
            dynamics: Dynamics::EikonalDemo { speed: 1.0 },
            cost: Cost::EikonalDemo { value: 1.0 },
            controls: set,
            bounds,
        };
        Self::new(
            1,
            side.clone(),
            side,
            Terminal::EikonalDemo { cap: 1.0 },
            1.0,
            1.0,
            11,
            (vec![-2.0], vec![2.0]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_controls_hit_endpoints() {
        let c = ControlSet::uniform(&[-1.0], &[1.0], &[21]).unwrap();
        assert_eq!(c.len(), 21);
        assert_eq!(c.get(0), &[-1.0]);
        assert_eq!(c.get(10), &[0.0]);
        assert_eq!(c.get(20), &[1.0]);
        assert_eq!(c.subsample(5), vec![0, 5, 10, 15, 20]);
        assert_eq!(c.duplicate_count(), 0);
    }

    #[test]
    fn duplicates_are_counted_not_rejected() {
        let c = ControlSet::new(1, vec![vec![0.0], vec![1.0], vec![0.0]]).unwrap();
        assert_eq!(c.duplicate_count(), 1);
        assert!(ControlSet::new(1, vec![]).is_err());
    }

    #[test]
    fn gap_demo_has_expected_data() {
        let p = ProblemSpec::gap_demo(1, 21, &[]).unwrap();
        assert_eq!(p.controls(Side::One).len(), 21);
        let mut b = [0.0];
        p.dynamics(Side::One, &[0.0], 0.0, 20, &mut b);
        assert_eq!(b[0], 1.0);
        assert_eq!(p.cost(Side::One, &[0.0], 0.0, 20), 0.0);
        assert_eq!(p.cost(Side::Two, &[0.0], 0.0, 0), 0.0);
        assert_eq!(p.terminal(&[0.5]), 1.0);
        assert_eq!(p.max_speed(), 1.0);
        assert_eq!(p.max_cost(), 2.0);
    }

    #[test]
    fn invalid_constants_are_rejected() {
        let p = ProblemSpec::gap_demo(1, 5, &[]).unwrap();
        let s = p.side(Side::One).clone();
        let r = ProblemSpec::new(1, s.clone(), s.clone(), Terminal::Constant(0.0), 1.0, 0.0, 3, (vec![-1.0], vec![1.0]));
        assert!(r.is_err());
        let r = ProblemSpec::new(1, s.clone(), s, Terminal::Constant(0.0), 1.0, 1.0, 0, (vec![-1.0], vec![1.0]));
        assert!(r.is_err());
    }
}
