//! Numerical checks of the structural properties of the two value functions:
//! viscosity inequalities, the strict subsolution used for comparison, the
//! ordering `U⁻ ≤ U⁺`, stability under perturbation, closure of regular
//! trajectories, scheme monotonicity and grid convergence.

use rand::Rng;
use serde::Serialize;

use crate::audit::Witness;
use crate::error::{Error, Result};
use crate::family::{Cost, Dynamics, Terminal};
use crate::field::{ValueField, Variant};
use crate::grid::GridSpec;
use crate::hamiltonians::{hamiltonian_side, interface_controls, ControlTriple};
use crate::hull::distance_to_hull;
use crate::problem::{Bounds, ProblemSpec, Side};
use crate::sampling::{point_in_box, rng};
use crate::solver::{solve, step_layer};
use crate::trajectory::{
    brute_force_value, integrate_with, Branching, ControlSchedule, EpisodeClass, MuPolicy, OracleMode, OracleSettings,
    Trajectory,
};
use crate::geometry::Region;

/// Nodes at least `M_b · T` from the box faces, where clamping at the box
/// cannot have reached.
fn interior_nodes(spec: &ProblemSpec, grid: &GridSpec) -> Vec<usize> {
    let frame = spec.max_speed() * grid.horizon();
    (0..grid.grid.len())
        .filter(|&j| grid.grid.distance_to_boundary(j) >= frame - 1e-12)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualOptions {
    /// Allowed residual.
    pub tolerance: f64,
    /// Number of normal slopes sampled between the one-sided differences.
    pub kink_samples: usize,
    /// Check every `layer_stride`-th time layer.
    pub layer_stride: usize,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            tolerance: 0.1,
            kink_samples: 11,
            layer_stride: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub variant: Variant,
    pub tolerance: f64,
    pub smooth_nodes: usize,
    pub kink_nodes: usize,
    pub worst_smooth_residual: f64,
    pub smooth_violations: usize,
    pub interface_nodes: usize,
    /// Smallest `u_t + max(H₁, H₂)` over the tested normal slopes.
    pub worst_supersolution: f64,
    pub supersolution_violations: usize,
    /// Largest `u_t + min(H₁, H₂)` over the tested normal slopes.
    pub worst_subsolution: f64,
    pub subsolution_violations: usize,
    /// Largest `u_t + H_T` (`H_T^reg` for `U⁺`).
    pub worst_tangential: f64,
    pub tangential_violations: usize,
    /// For `U⁺`: largest `u_t + H_T` with the full tangential Hamiltonian,
    /// which `U⁺` need not satisfy.
    pub full_tangential_diagnostic: Option<f64>,
    pub passed: bool,
    pub witness: Option<Witness>,
}

/// Finite-difference viscosity residuals of a solved field.
pub fn residual_check(spec: &ProblemSpec, field: &ValueField, opts: &ResidualOptions) -> ResidualReport {
    let grid = field.grid();
    let g = &grid.grid;
    let dim = spec.dim();
    let n_axis = dim - 1;
    let variant = field.variant();
    let dt = field.dt();
    let tol = opts.tolerance;
    let mut report = ResidualReport {
        variant,
        tolerance: tol,
        smooth_nodes: 0,
        kink_nodes: 0,
        worst_smooth_residual: 0.0,
        smooth_violations: 0,
        interface_nodes: 0,
        worst_supersolution: f64::INFINITY,
        supersolution_violations: 0,
        worst_subsolution: f64::NEG_INFINITY,
        subsolution_violations: 0,
        worst_tangential: f64::NEG_INFINITY,
        tangential_violations: 0,
        full_tangential_diagnostic: (variant == Variant::Plus).then_some(f64::NEG_INFINITY),
        passed: true,
        witness: None,
    };
    let interior = interior_nodes(spec, grid);
    let mut p = vec![0.0; dim];
    let smooth = |dp: f64, dm: f64, h: f64| (dp - dm).abs() <= 10.0 * h * dp.abs().max(dm.abs()).max(1.0);
    let fail = |report: &mut ResidualReport, x: &[f64], t: f64, p: &[f64], observed: f64, bound: f64, what: &str| {
        report.passed = false;
        if report.witness.is_none() {
            report.witness = Some(Witness {
                point: x.to_vec(),
                time: t,
                gradient: Some(p.to_vec()),
                observed,
                bound,
                detail: what.into(),
                ..Witness::default()
            });
        }
    };
    let stride = opts.layer_stride.max(1);
    for n in (1..field.steps()).step_by(stride) {
        let t = grid.time(n);
        let (prev, cur, next) = (field.layer(n - 1), field.layer(n), field.layer(n + 1));
        for &node in &interior {
            let x = g.node_coords(node);
            let ut_p = (next[node] - cur[node]) / dt;
            let ut_m = (cur[node] - prev[node]) / dt;
            let ut = 0.5 * (ut_p + ut_m);
            let on_h = grid.is_interface_node(node) && variant != Variant::SingleDomain;
            let mut ok = smooth(ut_p, ut_m, dt);
            let (mut p1, mut p2) = (0.0, 0.0);
            for k in 0..dim {
                let (Some(up), Some(um)) = (g.neighbor(node, k, 1), g.neighbor(node, k, -1)) else {
                    ok = false;
                    break;
                };
                let h = g.spacing()[k];
                let dp = (cur[up] - cur[node]) / h;
                let dm = (cur[node] - cur[um]) / h;
                if on_h && k == n_axis {
                    p1 = dp;
                    p2 = dm;
                } else {
                    ok &= smooth(dp, dm, h);
                    p[k] = 0.5 * (dp + dm);
                }
            }
            if !ok {
                report.kink_nodes += 1;
                continue;
            }
            if !on_h {
                let side = if variant == Variant::SingleDomain || x[n_axis] > 0.0 {
                    Side::One
                } else {
                    Side::Two
                };
                let r = (ut + hamiltonian_side(spec, side, &x, t, &p)).abs();
                report.smooth_nodes += 1;
                report.worst_smooth_residual = report.worst_smooth_residual.max(r);
                if r > tol {
                    report.smooth_violations += 1;
                    fail(&mut report, &x, t, &p, r, tol, "interior residual exceeds tolerance");
                }
                continue;
            }
            report.interface_nodes += 1;
            let h = g.spacing()[n_axis];
            let threshold = 10.0 * h * p1.abs().max(p2.abs()).max(1.0);
            let slopes = |a: f64, b: f64| -> Vec<f64> {
                let m = opts.kink_samples.max(2);
                (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
            };
            let across = (p1 - p2).abs() <= threshold;
            // a smooth test function touches from below only at convex kinks
            if across || p2 <= p1 {
                let range = if across { vec![0.5 * (p1 + p2)] } else { slopes(p2, p1) };
                for pn in range {
                    p[n_axis] = pn;
                    let v = ut + hamiltonian_side(spec, Side::One, &x, t, &p).max(hamiltonian_side(spec, Side::Two, &x, t, &p));
                    report.worst_supersolution = report.worst_supersolution.min(v);
                    if v < -tol {
                        report.supersolution_violations += 1;
                        fail(&mut report, &x, t, &p, v, -tol, "supersolution inequality fails on the interface");
                    }
                }
            }
            if across || p1 <= p2 {
                let range = if across { vec![0.5 * (p1 + p2)] } else { slopes(p1, p2) };
                for pn in range {
                    p[n_axis] = pn;
                    let v = ut + hamiltonian_side(spec, Side::One, &x, t, &p).min(hamiltonian_side(spec, Side::Two, &x, t, &p));
                    report.worst_subsolution = report.worst_subsolution.max(v);
                    if v > tol {
                        report.subsolution_violations += 1;
                        fail(&mut report, &x, t, &p, v, tol, "subsolution inequality fails on the interface");
                    }
                }
            }
            let set = interface_controls(spec, &x, t);
            let ht = set.hamiltonian(&p[..n_axis], variant == Variant::Plus);
            if ht > f64::NEG_INFINITY {
                let v = ut + ht;
                report.worst_tangential = report.worst_tangential.max(v);
                if v > tol {
                    report.tangential_violations += 1;
                    fail(&mut report, &x, t, &p, v, tol, "tangential subsolution inequality fails");
                }
            }
            if let Some(d) = report.full_tangential_diagnostic.as_mut() {
                *d = d.max(ut + set.hamiltonian(&p[..n_axis], false));
            }
        }
    }
    report
}

/// `ψ(x, t) = −K t − (1 + |x|²)^{1/2}`.
pub fn psi(x: &[f64], t: f64, k: f64) -> f64 {
    -k * t - (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// `Dψ(x, t) = −x / (1 + |x|²)^{1/2}`.
pub fn psi_gradient(x: &[f64]) -> Vec<f64> {
    let r = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
    x.iter().map(|v| -v / r).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsolutionReport {
    pub k: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest `ψ_t + max(H₁, H₂, H_T)` seen.
    pub worst: f64,
    pub bound: f64,
    pub passed: bool,
    pub witness: Option<Witness>,
}

/// Checks `ψ_t + max(H₁, H₂[, H_T on H])(x, t, Dψ) ≤ −1` at random samples,
/// half of them on the interface. `k` defaults to `M_b + M_l + 1`.
pub fn strict_subsolution_check(spec: &ProblemSpec, samples: usize, seed: u64, k: Option<f64>) -> SubsolutionReport {
    let k = k.unwrap_or(spec.max_speed() + spec.max_cost() + 1.0);
    let bound = -1.0 + 1e-10;
    let (lower, upper) = spec.domain();
    let dim = spec.dim();
    let mut r = rng(seed);
    let mut report = SubsolutionReport {
        k,
        samples,
        violations: 0,
        worst: f64::NEG_INFINITY,
        bound,
        passed: true,
        witness: None,
    };
    for s in 0..samples {
        let mut x = point_in_box(&mut r, lower, upper);
        let t = r.gen_range(0.0..=spec.horizon());
        if s % 2 == 1 {
            x[dim - 1] = 0.0;
        }
        let p = psi_gradient(&x);
        let mut h = hamiltonian_side(spec, Side::One, &x, t, &p).max(hamiltonian_side(spec, Side::Two, &x, t, &p));
        if x[dim - 1] == 0.0 {
            h = h.max(interface_controls(spec, &x, t).hamiltonian(&p[..dim - 1], false));
        }
        let v = -k + h;
        report.worst = report.worst.max(v);
        if v > bound {
            report.violations += 1;
            report.passed = false;
            if report.witness.is_none() {
                report.witness = Some(Witness {
                    point: x.clone(),
                    time: t,
                    gradient: Some(p),
                    observed: v,
                    bound,
                    detail: "psi_t + H exceeds -1".into(),
                    ..Witness::default()
                });
            }
        }
    }
    report
}

#[derive(Debug, Clone, Serialize)]
pub struct GapSample {
    pub x: Vec<f64>,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub tolerance: f64,
    pub frame: f64,
    /// Largest `U⁻ − U⁺` over interior nodes and all times.
    pub max_violation: f64,
    pub violations: usize,
    pub max_gap: f64,
    /// `U⁺ − U⁻` at the final time on the interior nodes.
    pub gap_profile: Vec<GapSample>,
    pub passed: bool,
    pub witness: Option<Witness>,
}

/// Checks `U⁻ ≤ U⁺ + tolerance` nodewise away from the box frame.
pub fn comparison_sweep(spec: &ProblemSpec, minus: &ValueField, plus: &ValueField, tolerance: f64) -> Result<ComparisonReport> {
    let grid = minus.grid();
    if grid != plus.grid() {
        return Err(Error::invalid("fields were solved on different grids"));
    }
    let interior = interior_nodes(spec, grid);
    let mut report = ComparisonReport {
        tolerance,
        frame: spec.max_speed() * grid.horizon(),
        max_violation: f64::NEG_INFINITY,
        violations: 0,
        max_gap: f64::NEG_INFINITY,
        gap_profile: Vec::new(),
        passed: true,
        witness: None,
    };
    for n in 0..=minus.steps().min(plus.steps()) {
        let (a, b) = (minus.layer(n), plus.layer(n));
        for &j in &interior {
            let d = a[j] - b[j];
            report.max_violation = report.max_violation.max(d);
            report.max_gap = report.max_gap.max(-d);
            if d > tolerance {
                report.violations += 1;
                report.passed = false;
                if report.witness.is_none() {
                    report.witness = Some(Witness {
                        point: grid.grid.node_coords(j),
                        time: grid.time(n),
                        observed: d,
                        bound: tolerance,
                        detail: "U- exceeds U+".into(),
                        ..Witness::default()
                    });
                }
            }
        }
    }
    let last = minus.steps();
    for &j in &interior {
        report.gap_profile.push(GapSample {
            x: grid.grid.node_coords(j),
            gap: plus.value(last, j) - minus.value(last, j),
        });
    }
    Ok(report)
}

/// Bounded perturbations `b_i + ε db_i`, `l_i + ε dl_i`, `g + ε dg` with
/// declared bounds on the perturbation terms.
#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    /// Positive and decreasing.
    pub epsilons: Vec<f64>,
    pub db1: Option<Dynamics>,
    pub db2: Option<Dynamics>,
    pub dl1: Option<Cost>,
    pub dl2: Option<Cost>,
    pub dg: Option<Terminal>,
    /// Bounds of the perturbation terms themselves.
    pub bounds: Bounds,
    /// Declared `C` in `gap(ε_last) ≤ C ε_last`.
    pub slope: f64,
}

impl PerturbationFamily {
    pub fn new(epsilons: Vec<f64>, bounds: Bounds, slope: f64) -> Result<Self> {
        if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) || epsilons.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::invalid("epsilons must be positive and decreasing"));
        }
        Ok(Self {
            epsilons,
            db1: None,
            db2: None,
            dl1: None,
            dl2: None,
            dg: None,
            bounds,
            slope,
        })
    }

    /// Perturbed problem; the declared constants grow by `ε` times the
    /// perturbation bounds and `δ` shrinks by `ε` times the speed bound.
    pub fn apply(&self, spec: &ProblemSpec, eps: f64) -> Result<ProblemSpec> {
        let delta = spec.delta() - eps * self.bounds.speed;
        if !(delta > 0.0) {
            return Err(Error::invalid(format!("perturbation at eps = {eps} destroys normal controllability")));
        }
        let mut out = spec.clone().with_delta(delta);
        for (side, db, dl) in [
            (Side::One, &self.db1, &self.dl1),
            (Side::Two, &self.db2, &self.dl2),
        ] {
            let data = out.side_mut(side);
            if let Some(db) = db {
                data.dynamics = Dynamics::Perturbed {
                    base: Box::new(data.dynamics.clone()),
                    eps,
                    delta: Box::new(db.clone()),
                };
                data.bounds.speed += eps * self.bounds.speed;
                data.bounds.speed_lipschitz += eps * self.bounds.speed_lipschitz;
            }
            if let Some(dl) = dl {
                data.cost = Cost::Perturbed {
                    base: Box::new(data.cost.clone()),
                    eps,
                    delta: Box::new(dl.clone()),
                };
                data.bounds.cost += eps * self.bounds.cost;
                data.bounds.cost_lipschitz += eps * self.bounds.cost_lipschitz;
            }
        }
        if let Some(dg) = &self.dg {
            let base = out.terminal_family().clone();
            out.set_terminal(Terminal::Perturbed {
                base: Box::new(base),
                eps,
                delta: Box::new(dg.clone()),
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub variant: Variant,
    pub epsilons: Vec<f64>,
    /// `‖U_ε − U_0‖∞` over interior nodes and all times.
    pub gaps: Vec<f64>,
    pub monotone_within_factor: bool,
    pub last_within_slope: bool,
    pub slope: f64,
    pub passed: bool,
}

/// Solves the unperturbed and every perturbed problem on the same grid.
pub fn stability_sweep(
    spec: &ProblemSpec,
    family: &PerturbationFamily,
    grid: &GridSpec,
    variant: Variant,
) -> Result<StabilityReport> {
    let base = solve(spec, grid, variant)?;
    let interior = interior_nodes(spec, grid);
    let mut gaps = Vec::with_capacity(family.epsilons.len());
    for &eps in &family.epsilons {
        let perturbed = family.apply(spec, eps)?;
        let field = solve(&perturbed, grid, variant)?;
        let mut gap = 0.0f64;
        for n in 0..=grid.steps {
            let (a, b) = (base.layer(n), field.layer(n));
            for &j in &interior {
                gap = gap.max((a[j] - b[j]).abs());
            }
        }
        gaps.push(gap);
    }
    let monotone = (0..gaps.len()).all(|i| (i + 1..gaps.len()).all(|j| gaps[j] <= 3.0 * gaps[i]));
    let last_eps = *family.epsilons.last().expect("nonempty");
    let last_ok = *gaps.last().expect("nonempty") <= family.slope * last_eps;
    Ok(StabilityReport {
        variant,
        epsilons: family.epsilons.clone(),
        gaps,
        monotone_within_factor: monotone,
        last_within_slope: last_ok,
        slope: family.slope,
        passed: monotone && last_ok,
    })
}

/// Where the regular trajectories of [`regular_limit_check`] come from.
#[derive(Debug, Clone)]
pub enum ScheduleSource {
    /// One schedule per ε.
    Supplied(Vec<ControlSchedule>),
    /// Best regular schedule of the brute-force oracle.
    Oracle { branching: Branching, settings: OracleSettings },
}

/// Largest distance from the realized `(velocity, cost rate)` of sliding
/// steps to the hull of the regular interface pairs `(b_H, l_H)` of `spec`,
/// with the number of sliding steps.
pub fn hull_gap(spec: &ProblemSpec, trajectory: &Trajectory) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut count = 0;
    for k in 0..trajectory.step_classes.len() {
        let class = trajectory.step_classes[k];
        if !matches!(class, EpisodeClass::InterfaceRegular | EpisodeClass::InterfaceSingular)
            || trajectory.regions[k] != Region::Interface
        {
            continue;
        }
        let (s0, s1) = (trajectory.times[k], trajectory.times[k + 1]);
        let h = s1 - s0;
        let z = &trajectory.states[k];
        let mut point: Vec<f64> = trajectory.states[k + 1].iter().zip(z).map(|(a, b)| (a - b) / h).collect();
        point.push((trajectory.running_cost[k + 1] - trajectory.running_cost[k]) / h);
        let set = interface_controls(spec, z, trajectory.horizon - s0);
        let d = distance_to_hull(&set.regular_points(), &point).distance;
        worst = worst.max(d);
        count += 1;
    }
    (worst, count)
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularLimitReport {
    pub epsilons: Vec<f64>,
    pub gaps: Vec<f64>,
    pub sliding_steps: Vec<usize>,
    pub h: f64,
    /// `C = 1 + ‖db‖ + ‖dl‖`.
    pub constant: f64,
    /// `C (h + ε_last)`.
    pub bound: f64,
    pub verdict: bool,
}

/// Integrates a regular trajectory of each perturbed problem and measures its
/// sliding dynamics against the regular hull of the unperturbed problem.
pub fn regular_limit_check(
    spec: &ProblemSpec,
    family: &PerturbationFamily,
    x0: &[f64],
    t: f64,
    h: f64,
    source: &ScheduleSource,
) -> Result<RegularLimitReport> {
    let mut gaps = Vec::new();
    let mut steps = Vec::new();
    for (i, &eps) in family.epsilons.iter().enumerate() {
        let perturbed = family.apply(spec, eps)?;
        let schedule = match source {
            ScheduleSource::Supplied(list) => list
                .get(i)
                .cloned()
                .ok_or_else(|| Error::invalid("one schedule per epsilon is required"))?,
            ScheduleSource::Oracle { branching, settings } => {
                let mut settings = *settings;
                settings.h = Some(h);
                brute_force_value(&perturbed, x0, t, OracleMode::RegularOnly, branching, &settings)?.best_schedule
            }
        };
        let traj = integrate_with(&perturbed, x0, &schedule, h, MuPolicy::Tangent)?;
        let (gap, count) = hull_gap(spec, &traj);
        gaps.push(gap);
        steps.push(count);
    }
    let constant = 1.0 + family.bounds.speed + family.bounds.cost;
    let last = *family.epsilons.last().expect("nonempty");
    let bound = constant * (h + last);
    Ok(RegularLimitReport {
        epsilons: family.epsilons.clone(),
        verdict: *gaps.last().expect("nonempty") <= bound,
        gaps,
        sliding_steps: steps,
        h,
        constant,
        bound,
    })
}

/// Hull distance of a constant schedule started on the interface; a
/// singular triple should land far from the regular hull.
pub fn schedule_hull_gap(spec: &ProblemSpec, z0: &[f64], t: f64, triple: ControlTriple, h: f64) -> Result<f64> {
    let schedule = ControlSchedule::constant(t, triple)?;
    let traj = integrate_with(spec, z0, &schedule, h, MuPolicy::Tangent)?;
    Ok(hull_gap(spec, &traj).0)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `S(A) − S(B)` over nodes and pairs with `A ≤ B`.
    pub worst: f64,
    pub passed: bool,
}

/// Applies one scheme step to random ordered pairs `A ≤ B` and checks the
/// order is preserved.
pub fn monotonicity_check(
    spec: &ProblemSpec,
    grid: &GridSpec,
    variant: Variant,
    pairs: usize,
    seed: u64,
) -> Result<MonotonicityReport> {
    let mut r = rng(seed);
    let len = grid.grid.len();
    let bound = 2.0 * (spec.max_cost() * spec.horizon() + 1.0);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let a: Vec<f64> = (0..len).map(|_| r.gen_range(-bound..bound)).collect();
        let b: Vec<f64> = a
            .iter()
            .map(|v| if r.gen_bool(0.3) { *v } else { v + r.gen_range(0.0..bound) })
            .collect();
        let n = r.gen_range(0..grid.steps);
        let sa = step_layer(spec, grid, variant, &a, n)?;
        let sb = step_layer(spec, grid, variant, &b, n)?;
        let mut bad = false;
        for (x, y) in sa.iter().zip(&sb) {
            worst = worst.max(x - y);
            bad |= x > y;
        }
        violations += bad as usize;
    }
    Ok(MonotonicityReport {
        pairs,
        violations,
        worst,
        passed: violations == 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub dt: f64,
    pub error: f64,
    /// `log2` of the error ratio to the previous row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub variant: Variant,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn min_order(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.order).reduce(f64::min)
    }
}

/// L∞ error against `reference(x, t)` over interior nodes and all times for
/// each spacing.
pub fn convergence_study<F>(spec: &ProblemSpec, spacings: &[f64], variant: Variant, reference: F) -> Result<ConvergenceTable>
where
    F: Fn(&[f64], f64) -> f64,
{
    let (lower, upper) = spec.domain();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &dx in spacings {
        let grid = GridSpec::with_spacing(lower.to_vec(), upper.to_vec(), dx, spec.horizon(), spec.max_speed())?;
        let field = solve(spec, &grid, variant)?;
        let interior = interior_nodes(spec, &grid);
        let mut error = 0.0f64;
        for n in 0..=grid.steps {
            let t = grid.time(n);
            let layer = field.layer(n);
            for &j in &interior {
                error = error.max((layer[j] - reference(&grid.grid.node_coords(j), t)).abs());
            }
        }
        let order = rows.last().map(|prev| (prev.error / error).log2() / (prev.dx / dx).log2());
        rows.push(ConvergenceRow {
            dx,
            dt: grid.dt,
            error,
            order,
        });
    }
    Ok(ConvergenceTable { variant, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleRow {
    pub epsilon: f64,
    pub radius: f64,
    /// `u_ε` on the interface, always 0.
    pub trace: f64,
    /// `sup over |x_N| ≤ radius of sin(x_N/ε)`.
    pub neighborhood_sup: f64,
}

/// `u_ε(x) = sin(x_N/ε)`: zero on the interface, yet every neighborhood of
/// radius at least `πε/2` contains a point where it equals 1.
pub fn counterexample_demo(epsilons: &[f64], radii: &[f64]) -> Vec<CounterexampleRow> {
    let mut rows = Vec::new();
    for &eps in epsilons {
        for &radius in radii {
            let peak = std::f64::consts::FRAC_PI_2 * eps;
            let m = 2000;
            let mut sup = (0..=m)
                .map(|i| (-radius + 2.0 * radius * i as f64 / m as f64) / eps)
                .map(f64::sin)
                .fold(f64::NEG_INFINITY, f64::max);
            if peak <= radius {
                sup = sup.max((peak / eps).sin());
            }
            rows.push(CounterexampleRow {
                epsilon: eps,
                radius,
                trace: (0.0f64 / eps).sin(),
                neighborhood_sup: sup,
            });
        }
    }
    rows
}
