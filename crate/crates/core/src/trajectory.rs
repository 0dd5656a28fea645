//! Controlled trajectories of the two-region inclusion, sliding along the
//! interface, and the brute-force value oracle over piecewise-constant
//! control schedules.
//!
//! The time argument of the coefficients is the remaining horizon: at elapsed
//! time `s` of a trajectory of horizon `t`, the dynamics are evaluated at
//! `σ = t − s`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ValueField;
use crate::geometry::{self, Region};
use crate::hamiltonians::{tangency_mu, ControlTriple, Tangency};
use crate::problem::{ProblemSpec, Side};
use crate::sampling::distance;

/// Default cap on the number of enumerated schedules.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// Piecewise-constant interface controls on `[0, t]`. Off the interface only
/// the component of the current side is used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSchedule {
    breakpoints: Vec<f64>,
    controls: Vec<ControlTriple>,
}

impl ControlSchedule {
    pub fn new(breakpoints: Vec<f64>, controls: Vec<ControlTriple>) -> Result<Self> {
        if breakpoints.len() < 2 || controls.len() + 1 != breakpoints.len() {
            return Err(Error::invalid("a schedule needs one control per interval"));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::invalid("schedule must start at time 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("breakpoints must increase"));
        }
        if controls.iter().any(|a| !(0.0..=1.0).contains(&a.mu)) {
            return Err(Error::invalid("mixture weights must lie in [0, 1]"));
        }
        Ok(Self { breakpoints, controls })
    }

    /// One control held on all of `[0, t]`.
    pub fn constant(t: f64, control: ControlTriple) -> Result<Self> {
        Self::new(vec![0.0, t], vec![control])
    }

    /// Controls on `controls.len()` equal intervals of `[0, t]`.
    pub fn uniform(t: f64, controls: Vec<ControlTriple>) -> Result<Self> {
        let n = controls.len();
        let mut breakpoints: Vec<f64> = (0..n).map(|k| t * k as f64 / n as f64).collect();
        breakpoints.push(t);
        Self::new(breakpoints, controls)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn controls(&self) -> &[ControlTriple] {
        &self.controls
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().expect("nonempty")
    }
}

/// How the mixture weight is chosen while the state is on the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MuPolicy {
    /// Use the schedule's `μ`; slide only if that mixture is tangent.
    Fixed,
    /// Replace `μ` by the tangent weight of the pair whenever one exists.
    Tangent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpisodeClass {
    Side1,
    Side2,
    InterfaceRegular,
    InterfaceSingular,
    Crossing,
}

impl EpisodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EpisodeClass::Side1 => "side1",
            EpisodeClass::Side2 => "side2",
            EpisodeClass::InterfaceRegular => "interface-regular",
            EpisodeClass::InterfaceSingular => "interface-singular",
            EpisodeClass::Crossing => "crossing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Episode {
    pub start: f64,
    pub end: f64,
    pub class: EpisodeClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub horizon: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub regions: Vec<Region>,
    /// Accumulated running cost at each recorded time.
    pub running_cost: Vec<f64>,
    /// One class per step.
    pub step_classes: Vec<EpisodeClass>,
    /// `|X(s_{k+1}) − X(s_k)|` per step.
    pub displacements: Vec<f64>,
    /// `|x_N|` just before pinning to the interface, per step (0 if none).
    pub offsets: Vec<f64>,
    /// Mixture weight used on the interface, per step.
    pub mixture: Vec<Option<f64>>,
    pub episodes: Vec<Episode>,
}

impl Trajectory {
    fn start(x0: &[f64], horizon: f64, tol: f64) -> Self {
        Self {
            horizon,
            times: vec![0.0],
            states: vec![x0.to_vec()],
            regions: vec![geometry::classify(x0, tol)],
            running_cost: vec![0.0],
            step_classes: Vec::new(),
            displacements: Vec::new(),
            offsets: Vec::new(),
            mixture: Vec::new(),
            episodes: Vec::new(),
        }
    }

    fn record(&mut self, time: f64, x: &[f64], out: &StepOutcome, tol: f64) {
        let prev = self.states.last().expect("nonempty");
        self.displacements.push(distance(prev, x));
        self.times.push(time);
        self.states.push(x.to_vec());
        self.regions.push(geometry::classify(x, tol));
        let c = self.running_cost.last().copied().unwrap_or(0.0) + out.cost;
        self.running_cost.push(c);
        self.step_classes.push(out.class);
        self.offsets.push(out.offset);
        self.mixture.push(out.mu);
        let t0 = self.times[self.times.len() - 2];
        match self.episodes.last_mut() {
            Some(e) if e.class == out.class => e.end = time,
            _ => self.episodes.push(Episode {
                start: t0,
                end: time,
                class: out.class,
            }),
        }
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("nonempty")
    }

    pub fn total_running_cost(&self) -> f64 {
        *self.running_cost.last().expect("nonempty")
    }

    pub fn has_singular(&self) -> bool {
        self.step_classes.contains(&EpisodeClass::InterfaceSingular)
    }

    pub fn max_offset(&self) -> f64 {
        self.offsets.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `displacement / step length`.
    pub fn max_speed(&self) -> f64 {
        self.displacements
            .iter()
            .zip(self.times.windows(2))
            .map(|(d, w)| d / (w[1] - w[0]))
            .fold(0.0, f64::max)
    }
}

/// `running cost + g(X(t))`.
pub fn cost(spec: &ProblemSpec, trajectory: &Trajectory) -> f64 {
    trajectory.total_running_cost() + spec.terminal(trajectory.final_state())
}

struct StepOutcome {
    cost: f64,
    class: EpisodeClass,
    offset: f64,
    mu: Option<f64>,
}

enum InterfaceMove {
    Slide { mu: f64, regular: bool },
    Leave(Side),
}

struct Stepper<'a> {
    spec: &'a ProblemSpec,
    horizon: f64,
    policy: MuPolicy,
    b1: Vec<f64>,
    b2: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a ProblemSpec, horizon: f64, policy: MuPolicy) -> Self {
        let dim = spec.dim();
        Self {
            spec,
            horizon,
            policy,
            b1: vec![0.0; dim],
            b2: vec![0.0; dim],
        }
    }

    fn interface_move(&mut self, x: &[f64], sigma: f64, a: &ControlTriple) -> Result<InterfaceMove> {
        let spec = self.spec;
        let tol = spec.tangency_tol();
        spec.dynamics(Side::One, x, sigma, a.alpha1, &mut self.b1);
        spec.dynamics(Side::Two, x, sigma, a.alpha2, &mut self.b2);
        let beta1 = geometry::dot_n1(&self.b1);
        let beta2 = geometry::dot_n2(&self.b2);
        let regular = beta1 >= -tol && beta2 >= -tol;
        let mu = match self.policy {
            MuPolicy::Fixed => {
                let normal = a.mu * beta1 - (1.0 - a.mu) * beta2;
                (normal.abs() <= tol).then_some(a.mu)
            }
            MuPolicy::Tangent => match tangency_mu(beta1, beta2, tol) {
                Tangency::Unique(mu) => Some(mu),
                Tangency::Any => Some(a.mu),
                Tangency::None => None,
            },
        };
        if let Some(mu) = mu {
            return Ok(InterfaceMove::Slide { mu, regular });
        }
        let n = x.len() - 1;
        match (beta1 < -tol, beta2 < -tol) {
            (true, false) => Ok(InterfaceMove::Leave(Side::One)),
            (false, true) => Ok(InterfaceMove::Leave(Side::Two)),
            (true, true) => {
                let up = a.mu * self.b1[n] + (1.0 - a.mu) * self.b2[n];
                Ok(InterfaceMove::Leave(if up > 0.0 { Side::One } else { Side::Two }))
            }
            (false, false) => Err(Error::InconsistentInterfaceControl {
                time: self.horizon - sigma,
                detail: format!(
                    "mu = {} is not tangent for the pair ({}, {}) and neither side can be entered",
                    a.mu, a.alpha1, a.alpha2
                ),
            }),
        }
    }

    /// Advances `x` by `h` from elapsed time `s` under `a`.
    fn step(&mut self, x: &mut [f64], s: f64, h: f64, a: &ControlTriple) -> Result<StepOutcome> {
        let spec = self.spec;
        let n = x.len() - 1;
        let tol = spec.interface_tol();
        if x[n] != 0.0 && x[n].abs() <= tol {
            x[n] = 0.0;
        }
        let start_side = if x[n] > 0.0 { Side::One } else { Side::Two };
        let mut remaining = h;
        let mut elapsed = s;
        let mut out = StepOutcome {
            cost: 0.0,
            class: match start_side {
                Side::One => EpisodeClass::Side1,
                Side::Two => EpisodeClass::Side2,
            },
            offset: 0.0,
            mu: None,
        };
        let mut touched = x[n] == 0.0;
        let mut slid: Option<bool> = None;
        for _ in 0..4 {
            if remaining <= 1e-15 * h {
                break;
            }
            let sigma = self.horizon - elapsed;
            if x[n] == 0.0 {
                match self.interface_move(x, sigma, a)? {
                    InterfaceMove::Slide { mu, regular } => {
                        for c in 0..=n {
                            x[c] += remaining * (mu * self.b1[c] + (1.0 - mu) * self.b2[c]);
                        }
                        out.offset = out.offset.max(x[n].abs());
                        x[n] = 0.0;
                        let l = mu * spec.cost(Side::One, x, sigma, a.alpha1)
                            + (1.0 - mu) * spec.cost(Side::Two, x, sigma, a.alpha2);
                        // cost evaluated at the start of the sub-step
                        out.cost += remaining * l;
                        out.mu = Some(mu);
                        slid = Some(slid.unwrap_or(true) && regular);
                    }
                    InterfaceMove::Leave(side) => {
                        let (b, k) = match side {
                            Side::One => (&self.b1, a.alpha1),
                            Side::Two => (&self.b2, a.alpha2),
                        };
                        let l = spec.cost(side, x, sigma, k);
                        for c in 0..=n {
                            x[c] += remaining * b[c];
                        }
                        out.cost += remaining * l;
                    }
                }
                remaining = 0.0;
                continue;
            }
            let side = if x[n] > 0.0 { Side::One } else { Side::Two };
            let k = match side {
                Side::One => a.alpha1,
                Side::Two => a.alpha2,
            };
            spec.dynamics(side, x, sigma, k, &mut self.b1);
            let l = spec.cost(side, x, sigma, k);
            let next_n = x[n] + remaining * self.b1[n];
            if next_n * x[n] <= 0.0 {
                // reaches the interface inside the step
                let theta = (x[n] / (x[n] - next_n)).clamp(0.0, 1.0);
                let tau = theta * remaining;
                for c in 0..n {
                    x[c] += tau * self.b1[c];
                }
                x[n] = 0.0;
                out.cost += tau * l;
                elapsed += tau;
                remaining -= tau;
                touched = true;
            } else {
                for c in 0..=n {
                    x[c] += remaining * self.b1[c];
                }
                if x[n].abs() <= tol {
                    x[n] = 0.0;
                    touched = true;
                }
                out.cost += remaining * l;
                remaining = 0.0;
            }
        }
        out.class = match slid {
            Some(true) => EpisodeClass::InterfaceRegular,
            Some(false) => EpisodeClass::InterfaceSingular,
            None if touched => EpisodeClass::Crossing,
            None => out.class,
        };
        Ok(out)
    }
}

/// Step sizes of at most `h`, aligned with the schedule's breakpoints.
fn aligned_steps(schedule: &ControlSchedule, h: f64) -> Vec<(f64, f64, usize)> {
    let mut steps = Vec::new();
    for (k, w) in schedule.breakpoints.windows(2).enumerate() {
        let len = w[1] - w[0];
        let m = ((len / h) - 1e-9).ceil().max(1.0) as usize;
        let dh = len / m as f64;
        for j in 0..m {
            steps.push((w[0] + j as f64 * dh, dh, k));
        }
    }
    steps
}

fn check_start(spec: &ProblemSpec, x0: &[f64], h: f64) -> Result<()> {
    if x0.len() != spec.dim() {
        return Err(Error::invalid(format!(
            "start point has {} coordinates, expected {}",
            x0.len(),
            spec.dim()
        )));
    }
    if !(h > 0.0) {
        return Err(Error::invalid("integration step must be positive"));
    }
    Ok(())
}

/// Integrates the schedule with the given `μ` policy, recording every step.
pub fn integrate_with(
    spec: &ProblemSpec,
    x0: &[f64],
    schedule: &ControlSchedule,
    h: f64,
    policy: MuPolicy,
) -> Result<Trajectory> {
    check_start(spec, x0, h)?;
    let horizon = schedule.horizon();
    let tol = spec.interface_tol();
    let mut stepper = Stepper::new(spec, horizon, policy);
    let mut traj = Trajectory::start(x0, horizon, tol);
    let mut x = x0.to_vec();
    for (s, dh, k) in aligned_steps(schedule, h) {
        let out = stepper.step(&mut x, s, dh, &schedule.controls[k])?;
        traj.record(s + dh, &x, &out, tol);
    }
    if let Some(last) = traj.times.last_mut() {
        *last = horizon;
    }
    Ok(traj)
}

/// Integrates the schedule using its own `μ` on the interface; a non-tangent
/// `μ` that cannot enter either side is rejected.
pub fn integrate(spec: &ProblemSpec, x0: &[f64], schedule: &ControlSchedule, h: f64) -> Result<Trajectory> {
    integrate_with(spec, x0, schedule, h, MuPolicy::Fixed)
}

struct Summary {
    running_cost: f64,
    final_state: Vec<f64>,
    singular: bool,
}

/// `clock` is the remaining horizon at the start of the schedule.
fn run_summary(
    spec: &ProblemSpec,
    x0: &[f64],
    clock: f64,
    schedule: &ControlSchedule,
    h: f64,
    policy: MuPolicy,
) -> Result<Summary> {
    let mut stepper = Stepper::new(spec, clock, policy);
    let mut x = x0.to_vec();
    let mut running_cost = 0.0;
    let mut singular = false;
    for (s, dh, k) in aligned_steps(schedule, h) {
        let out = stepper.step(&mut x, s, dh, &schedule.controls[k])?;
        running_cost += out.cost;
        singular |= out.class == EpisodeClass::InterfaceSingular;
    }
    Ok(Summary {
        running_cost,
        final_state: x,
        singular,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Projection {
    /// Reset `x_N` to 0 after every step.
    EachStep,
    /// Let `x_N` drift.
    Never,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlideOutcome {
    pub trajectory: Trajectory,
    /// Largest `|x_N|` reached before projection.
    pub max_offset: f64,
    /// Largest `|μ♯ β₁ − (1 − μ♯) β₂|` at the step start points.
    pub max_normal_residual: f64,
}

/// Slides along the interface with `ẋ = μ♯ b₁(x, σ, α₁) + (1 − μ♯) b₂(x, σ, α₂)`,
/// where `μ♯ = β₂/(β₁ + β₂)` is recomputed at the start of every step and held
/// fixed over it (explicit midpoint on the frozen mixture).
pub fn slide_mu_sharp(
    spec: &ProblemSpec,
    z0: &[f64],
    t: f64,
    alpha1: usize,
    alpha2: usize,
    h: f64,
    projection: Projection,
) -> Result<SlideOutcome> {
    check_start(spec, z0, h)?;
    let dim = spec.dim();
    let n = dim - 1;
    if z0[n].abs() > spec.interface_tol() {
        return Err(Error::invalid("sliding must start on the interface"));
    }
    let tol = spec.tangency_tol();
    let mut x = z0.to_vec();
    x[n] = 0.0;
    let steps = ((t / h) - 1e-9).ceil().max(1.0) as usize;
    let dh = t / steps as f64;
    let mut traj = Trajectory::start(&x, t, spec.interface_tol());
    let (mut b1, mut b2) = (vec![0.0; dim], vec![0.0; dim]);
    let mut mid = vec![0.0; dim];
    let mut max_offset = 0.0f64;
    let mut max_residual = 0.0f64;
    let mixed = |y: &[f64], sigma: f64, b1: &mut [f64], b2: &mut [f64]| {
        spec.dynamics(Side::One, y, sigma, alpha1, b1);
        spec.dynamics(Side::Two, y, sigma, alpha2, b2);
    };
    for k in 0..steps {
        let s = k as f64 * dh;
        let sigma = t - s;
        mixed(&x, sigma, &mut b1, &mut b2);
        let beta1 = geometry::dot_n1(&b1);
        let beta2 = geometry::dot_n2(&b2);
        let mu = match tangency_mu(beta1, beta2, tol) {
            Tangency::Unique(mu) => mu,
            Tangency::Any => 0.5,
            Tangency::None => {
                return Err(Error::SlidingLost {
                    time: s,
                    mu: beta2 / (beta1 + beta2),
                })
            }
        };
        let regular = beta1 >= -tol && beta2 >= -tol;
        max_residual = max_residual.max((mu * beta1 - (1.0 - mu) * beta2).abs());
        for c in 0..dim {
            mid[c] = x[c] + 0.5 * dh * (mu * b1[c] + (1.0 - mu) * b2[c]);
        }
        let sigma_mid = sigma - 0.5 * dh;
        mixed(&mid, sigma_mid, &mut b1, &mut b2);
        let l = mu * spec.cost(Side::One, &mid, sigma_mid, alpha1) + (1.0 - mu) * spec.cost(Side::Two, &mid, sigma_mid, alpha2);
        for c in 0..dim {
            x[c] += dh * (mu * b1[c] + (1.0 - mu) * b2[c]);
        }
        let offset = x[n].abs();
        max_offset = max_offset.max(offset);
        if projection == Projection::EachStep {
            x[n] = 0.0;
        }
        let out = StepOutcome {
            cost: dh * l,
            class: if regular {
                EpisodeClass::InterfaceRegular
            } else {
                EpisodeClass::InterfaceSingular
            },
            offset,
            mu: Some(mu),
        };
        traj.record(if k + 1 == steps { t } else { s + dh }, &x, &out, spec.interface_tol());
    }
    Ok(SlideOutcome {
        trajectory: traj,
        max_offset,
        max_normal_residual: max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    All,
    RegularOnly,
}

/// Controls tried on each interval of an enumerated schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branching {
    pub triples: Vec<ControlTriple>,
}

impl Branching {
    pub fn new(triples: Vec<ControlTriple>) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::invalid("branching set is empty"));
        }
        Ok(Self { triples })
    }

    /// Every `stride`-th control of each side (the last one always kept),
    /// paired. Pairs tangent on both sides at `(z, s)` get `μ ∈ {0, ½, 1}`;
    /// other pairs carry `μ = ½`, which only matters under [`MuPolicy::Fixed`].
    pub fn subsampled(spec: &ProblemSpec, stride: usize, z: &[f64], s: f64) -> Self {
        let a1 = spec.controls(Side::One).subsample(stride);
        let a2 = spec.controls(Side::Two).subsample(stride);
        let tol = spec.tangency_tol();
        let dim = spec.dim();
        let (mut b1, mut b2) = (vec![0.0; dim], vec![0.0; dim]);
        let mut triples = Vec::new();
        for &i in &a1 {
            spec.dynamics(Side::One, z, s, i, &mut b1);
            for &j in &a2 {
                spec.dynamics(Side::Two, z, s, j, &mut b2);
                if tangency_mu(geometry::dot_n1(&b1), geometry::dot_n2(&b2), tol) == Tangency::Any {
                    for mu in [0.0, 0.5, 1.0] {
                        triples.push(ControlTriple::new(i, j, mu));
                    }
                } else {
                    triples.push(ControlTriple::new(i, j, 0.5));
                }
            }
        }
        Self { triples }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSettings {
    pub intervals: usize,
    /// Integration step; defaults to an eighth of an interval.
    pub h: Option<f64>,
    pub budget: u128,
}

impl OracleSettings {
    pub fn new(intervals: usize) -> Self {
        Self {
            intervals,
            h: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub best_cost: f64,
    pub best_schedule: ControlSchedule,
    pub best_index: u128,
    /// Schedules enumerated.
    pub schedule_count: u128,
    /// Schedules that integrated and passed the mode filter.
    pub admissible_count: u128,
    pub mode: OracleMode,
}

fn decode(mut index: u128, base: usize, intervals: usize, branching: &Branching) -> Vec<ControlTriple> {
    let mut out = vec![branching.triples[0]; intervals];
    for k in (0..intervals).rev() {
        out[k] = branching.triples[(index % base as u128) as usize];
        index /= base as u128;
    }
    out
}

/// Minimizes `running cost + terminal(X(t))` over all schedules with one
/// branching control per uniform interval of `[0, t]`. Ties go to the
/// lexicographically smallest schedule.
pub fn brute_force_with<F>(
    spec: &ProblemSpec,
    x0: &[f64],
    t: f64,
    mode: OracleMode,
    branching: &Branching,
    settings: &OracleSettings,
    terminal: F,
) -> Result<OracleResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    enumerate(spec, x0, t, t, mode, branching, settings, terminal)
}

/// Enumerates schedules on `[0, length]` starting with remaining horizon `clock`.
#[allow(clippy::too_many_arguments)]
fn enumerate<F>(
    spec: &ProblemSpec,
    x0: &[f64],
    clock: f64,
    t: f64,
    mode: OracleMode,
    branching: &Branching,
    settings: &OracleSettings,
    terminal: F,
) -> Result<OracleResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if settings.intervals == 0 || !(t > 0.0) {
        return Err(Error::invalid("oracle needs a positive horizon and at least one interval"));
    }
    let base = branching.len();
    let required = (base as u128).checked_pow(settings.intervals as u32).unwrap_or(u128::MAX);
    if required > settings.budget {
        return Err(Error::BudgetExceeded {
            required,
            budget: settings.budget,
        });
    }
    let h = settings.h.unwrap_or(t / settings.intervals as f64 / 8.0);
    check_start(spec, x0, h)?;
    let best = (0..required as u64)
        .into_par_iter()
        .map(|idx| {
            let idx = idx as u128;
            let schedule = ControlSchedule::uniform(t, decode(idx, base, settings.intervals, branching)).ok()?;
            let run = run_summary(spec, x0, clock, &schedule, h, MuPolicy::Tangent).ok()?;
            if mode == OracleMode::RegularOnly && run.singular {
                return None;
            }
            Some((run.running_cost + terminal(&run.final_state), idx))
        })
        .fold(
            || (None::<(f64, u128)>, 0u128),
            |(best, count), item| match item {
                Some(c) => (Some(better(best, c)), count + 1),
                None => (best, count),
            },
        )
        .reduce(
            || (None, 0),
            |(a, ca), (b, cb)| {
                let best = match (a, b) {
                    (Some(x), Some(y)) => Some(better(Some(x), y)),
                    (x, None) => x,
                    (None, y) => y,
                };
                (best, ca + cb)
            },
        );
    let ((best_cost, best_index), admissible) = match best {
        (Some(b), n) => (b, n),
        (None, _) => return Err(Error::invalid("no enumerated schedule is admissible")),
    };
    Ok(OracleResult {
        best_cost,
        best_schedule: ControlSchedule::uniform(t, decode(best_index, base, settings.intervals, branching))?,
        best_index,
        schedule_count: required,
        admissible_count: admissible,
        mode,
    })
}

fn better(current: Option<(f64, u128)>, candidate: (f64, u128)) -> (f64, u128) {
    match current {
        None => candidate,
        Some(c) => {
            if candidate.0 < c.0 || (candidate.0 == c.0 && candidate.1 < c.1) {
                candidate
            } else {
                c
            }
        }
    }
}

/// Brute-force value with the problem's terminal cost.
pub fn brute_force_value(
    spec: &ProblemSpec,
    x0: &[f64],
    t: f64,
    mode: OracleMode,
    branching: &Branching,
    settings: &OracleSettings,
) -> Result<OracleResult> {
    brute_force_with(spec, x0, t, mode, branching, settings, |x| spec.terminal(x))
}

#[derive(Debug, Clone, Serialize)]
pub struct DppResidual {
    pub field_value: f64,
    pub dpp_value: f64,
    pub residual: f64,
    pub best_schedule: ControlSchedule,
}

/// `|u(x0, t) − min over schedules on [0, τ] of (running cost + u(X(τ), t − τ))|`.
#[allow(clippy::too_many_arguments)]
pub fn dpp_residual(
    spec: &ProblemSpec,
    field: &ValueField,
    x0: &[f64],
    t: f64,
    tau: f64,
    mode: OracleMode,
    branching: &Branching,
    settings: &OracleSettings,
) -> Result<DppResidual> {
    if !(tau > 0.0 && tau <= t) {
        return Err(Error::invalid("need 0 < tau <= t"));
    }
    let field_value = field.interpolate_time(x0, t);
    let result = enumerate(spec, x0, t, tau, mode, branching, settings, |x| {
        field.interpolate_time(x, t - tau)
    })?;
    Ok(DppResidual {
        field_value,
        dpp_value: result.best_cost,
        residual: (field_value - result.best_cost).abs(),
        best_schedule: result.best_schedule,
    })
}
