//! Hamiltonians of the two-region problem, the interface control sets, and
//! the quantitative bounds they satisfy.
//!
//! For a side `i`, `H_i(x,t,p) = max_α { −b_i(x,t,α)·p − l_i(x,t,α) }`. On the
//! interface a control is a triple `a = (α₁, α₂, μ)` driving the mixture
//! `b_H = μ b₁ + (1−μ) b₂` with cost `l_H = μ l₁ + (1−μ) l₂`; `A₀` keeps the
//! triples whose mixture is tangent to `H`, and `A₀^reg ⊆ A₀` those where
//! both `b_i · n_i ≥ 0`. The tangential Hamiltonians `H_T` and `H_T^reg` are
//! the maxima of `−b_H·p − l_H` over these sets.

use serde::Serialize;

use crate::audit::Witness;
use crate::error::{Error, Result};
use crate::geometry::{self, NORMAL_LIPSCHITZ};
use crate::problem::{ProblemSpec, Side};
use crate::sampling::{distance, norm, point_in_box, rng, vector_in_cube};
use rand::Rng;

/// Interface control `(α₁, α₂, μ)`; the `α`s index the side control samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlTriple {
    pub alpha1: usize,
    pub alpha2: usize,
    pub mu: f64,
}

impl ControlTriple {
    pub fn new(alpha1: usize, alpha2: usize, mu: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&mu));
        Self { alpha1, alpha2, mu }
    }
}

/// `H_i(x, t, p)`.
pub fn hamiltonian_side(spec: &ProblemSpec, side: Side, x: &[f64], t: f64, p: &[f64]) -> f64 {
    hamiltonian_side_argmax(spec, side, x, t, p).0
}

/// `H_i(x, t, p)` together with the first maximizing control.
pub fn hamiltonian_side_argmax(spec: &ProblemSpec, side: Side, x: &[f64], t: f64, p: &[f64]) -> (f64, usize) {
    let mut b = vec![0.0; spec.dim()];
    let mut best = (f64::NEG_INFINITY, 0);
    for k in 0..spec.controls(side).len() {
        spec.dynamics(side, x, t, k, &mut b);
        let v = -dot(&b, p) - spec.cost(side, x, t, k);
        if v > best.0 {
            best = (v, k);
        }
    }
    best
}

/// `(b_H(z, s, a), l_H(z, s, a))`.
pub fn boundary_dynamics(spec: &ProblemSpec, z: &[f64], s: f64, a: &ControlTriple) -> (Vec<f64>, f64) {
    let dim = spec.dim();
    let mut b1 = vec![0.0; dim];
    let mut b2 = vec![0.0; dim];
    spec.dynamics(Side::One, z, s, a.alpha1, &mut b1);
    spec.dynamics(Side::Two, z, s, a.alpha2, &mut b2);
    let l1 = spec.cost(Side::One, z, s, a.alpha1);
    let l2 = spec.cost(Side::Two, z, s, a.alpha2);
    let b = b1.iter().zip(&b2).map(|(u, v)| a.mu * u + (1.0 - a.mu) * v).collect();
    (b, a.mu * l1 + (1.0 - a.mu) * l2)
}

/// Outcome of solving `μ β₁ = (1 − μ) β₂` for the mixture weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tangency {
    /// The unique `μ ∈ [0, 1]` making the mixture tangent.
    Unique(f64),
    /// Both dynamics are tangent, every `μ` works.
    Any,
    /// No mixture stays on the interface.
    None,
}

/// Tangent mixture weight `μ♯ = β₂ / (β₁ + β₂)` with `β_i = b_i · n_i`.
pub fn tangency_mu(beta1: f64, beta2: f64, tol: f64) -> Tangency {
    if beta1.abs() <= tol && beta2.abs() <= tol {
        return Tangency::Any;
    }
    let denom = beta1 + beta2;
    if denom == 0.0 {
        return Tangency::None;
    }
    let mu = beta2 / denom;
    const SLOP: f64 = 1e-12;
    if (-SLOP..=1.0 + SLOP).contains(&mu) {
        Tangency::Unique(mu.clamp(0.0, 1.0))
    } else {
        Tangency::None
    }
}

/// Discrete `A₀(z, s)` with the mixtures already evaluated.
#[derive(Debug, Clone, Serialize)]
pub struct InterfaceControlSet {
    pub triples: Vec<ControlTriple>,
    pub regular: Vec<bool>,
    /// `b_H` per triple, `dim` values each, normal component zeroed.
    velocities: Vec<f64>,
    costs: Vec<f64>,
    dim: usize,
    pub tangency_tolerance: f64,
}

impl InterfaceControlSet {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn velocity(&self, k: usize) -> &[f64] {
        &self.velocities[k * self.dim..(k + 1) * self.dim]
    }

    pub fn cost(&self, k: usize) -> f64 {
        self.costs[k]
    }

    pub fn regular_count(&self) -> usize {
        self.regular.iter().filter(|r| **r).count()
    }

    /// Augmented points `(b_H, l_H)` of the regular triples.
    pub fn regular_points(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .filter(|&k| self.regular[k])
            .map(|k| {
                let mut p = self.velocity(k).to_vec();
                p.push(self.cost(k));
                p
            })
            .collect()
    }

    /// `max over the (regular) set of −⟨b_H, p⟩ − l_H`, `−∞` when empty.
    /// `p_tan` holds the first `N − 1` gradient components.
    pub fn hamiltonian(&self, p_tan: &[f64], regular_only: bool) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for k in 0..self.len() {
            if regular_only && !self.regular[k] {
                continue;
            }
            let v = -dot(&self.velocity(k)[..self.dim - 1], p_tan) - self.costs[k];
            if v > best {
                best = v;
            }
        }
        best
    }
}

/// Enumerates `A₀(z, s)`: one exact tangent `μ` per admissible pair, and
/// `mu_grid` uniform values for pairs that are tangent on both sides.
pub fn interface_controls(spec: &ProblemSpec, z: &[f64], s: f64) -> InterfaceControlSet {
    let dim = spec.dim();
    let tol = spec.tangency_tol();
    let side_data = |side: Side| {
        let n = spec.controls(side).len();
        let mut b = vec![0.0; n * dim];
        let mut l = vec![0.0; n];
        let mut beta = vec![0.0; n];
        for k in 0..n {
            spec.dynamics(side, z, s, k, &mut b[k * dim..(k + 1) * dim]);
            l[k] = spec.cost(side, z, s, k);
            beta[k] = side.normal_component(&b[k * dim..(k + 1) * dim]);
        }
        (b, l, beta)
    };
    let (b1, l1, beta1) = side_data(Side::One);
    let (b2, l2, beta2) = side_data(Side::Two);
    let mu_values: Vec<f64> = match spec.mu_grid() {
        1 => vec![0.5],
        m => (0..m).map(|k| k as f64 / (m - 1) as f64).collect(),
    };

    let mut set = InterfaceControlSet {
        triples: Vec::new(),
        regular: Vec::new(),
        velocities: Vec::new(),
        costs: Vec::new(),
        dim,
        tangency_tolerance: tol,
    };
    let push = |i: usize, j: usize, mu: f64, set: &mut InterfaceControlSet| {
        let u = &b1[i * dim..(i + 1) * dim];
        let v = &b2[j * dim..(j + 1) * dim];
        let start = set.velocities.len();
        set.velocities.extend(u.iter().zip(v).map(|(x, y)| mu * x + (1.0 - mu) * y));
        debug_assert!(geometry::dot_n1(&set.velocities[start..]).abs() <= tol.max(1e-12));
        set.velocities[start + dim - 1] = 0.0;
        set.costs.push(mu * l1[i] + (1.0 - mu) * l2[j]);
        set.triples.push(ControlTriple { alpha1: i, alpha2: j, mu });
        set.regular.push(beta1[i] >= -tol && beta2[j] >= -tol);
    };
    for i in 0..l1.len() {
        for j in 0..l2.len() {
            match tangency_mu(beta1[i], beta2[j], tol) {
                Tangency::Unique(mu) => push(i, j, mu, &mut set),
                Tangency::Any => {
                    for &mu in &mu_values {
                        push(i, j, mu, &mut set);
                    }
                }
                Tangency::None => {}
            }
        }
    }
    set
}

/// `H_T(z, s, p_tan)` or `H_T^reg(z, s, p_tan)`.
pub fn hamiltonian_tangential(spec: &ProblemSpec, z: &[f64], s: f64, p_tan: &[f64], regular_only: bool) -> f64 {
    interface_controls(spec, z, s).hamiltonian(p_tan, regular_only)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Envelope {
    Min,
    Max,
}

/// `min(H₁, H₂)` or `max(H₁, H₂)` at an interface point.
pub fn ishii_envelope(spec: &ProblemSpec, x: &[f64], t: f64, p: &[f64], mode: Envelope) -> f64 {
    let h1 = hamiltonian_side(spec, Side::One, x, t, p);
    let h2 = hamiltonian_side(spec, Side::Two, x, t, p);
    match mode {
        Envelope::Min => h1.min(h2),
        Envelope::Max => h1.max(h2),
    }
}

/// Constants of the coercivity and tangential-Lipschitz estimates, with
/// `L_n = 0` for the flat interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    /// `C_M = max(M_b, M_l)`.
    pub c_m: f64,
    /// `C̄ = L_b + M_b L_n`.
    pub c_bar: f64,
    /// `M = L_b + 2 M_b C̄ / δ`.
    pub lipschitz_m: f64,
    /// Coefficient of `m(r) = (L_b + 2 M_l C̄ / δ) r + L_l r`.
    pub modulus_coefficient: f64,
    pub max_speed: f64,
    pub delta: f64,
}

impl BoundConstants {
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let mb = spec.max_speed();
        let lb = spec.speed_lipschitz();
        let ml = spec.max_cost();
        let delta = spec.delta();
        let c_bar = lb + mb * NORMAL_LIPSCHITZ;
        Self {
            c_m: mb.max(ml),
            c_bar,
            lipschitz_m: lb + 2.0 * mb * c_bar / delta,
            modulus_coefficient: lb + 2.0 * ml * c_bar / delta + spec.cost_lipschitz(),
            max_speed: mb,
            delta,
        }
    }

    pub fn modulus(&self, r: f64) -> f64 {
        self.modulus_coefficient * r
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HamiltonianBoundsReport {
    pub check: String,
    pub samples: usize,
    pub violations: usize,
    pub passed: bool,
    /// Smallest `H_i − (δ|p_N| − C_M(1 + |p'|))` seen.
    pub coercivity_margin: Option<f64>,
    /// Smallest `bound − |H_T − H_T'|` seen.
    pub lipschitz_margin: Option<f64>,
    pub constants: BoundConstants,
    pub witness: Option<Witness>,
}

/// Samples `H_i(x,t,p) ≥ δ|p_N| − C_M(1 + |p'|)` with zero tolerance.
pub fn check_coercivity(spec: &ProblemSpec, samples: usize, seed: u64, p_radius: f64) -> HamiltonianBoundsReport {
    let constants = BoundConstants::from_spec(spec);
    let (lower, upper) = spec.domain();
    let mut rng = rng(seed);
    let dim = spec.dim();
    let mut margin = f64::INFINITY;
    let mut violations = 0;
    let mut witness = None;
    for n in 0..samples {
        let x = point_in_box(&mut rng, lower, upper);
        let t = rng.gen_range(0.0..=spec.horizon());
        let mut p = vector_in_cube(&mut rng, dim, p_radius);
        // every fourth sample is purely normal, where the estimate is sharpest
        if n % 4 == 0 {
            p[..dim - 1].iter_mut().for_each(|v| *v = 0.0);
        }
        let pn = p[dim - 1].abs();
        let pt = norm(&p[..dim - 1]);
        let bound = constants.delta * pn - constants.c_m * (1.0 + pt);
        for side in Side::BOTH {
            let h = hamiltonian_side(spec, side, &x, t, &p);
            let slack = h - bound;
            if slack < margin {
                margin = slack;
            }
            if slack < 0.0 {
                violations += 1;
                if witness.is_none() {
                    witness = Some(Witness {
                        point: x.clone(),
                        time: t,
                        side: Some(side.index()),
                        gradient: Some(p.clone()),
                        observed: h,
                        bound,
                        detail: "H_i below delta|p_N| - C_M(1 + |p'|)".into(),
                        ..Witness::default()
                    });
                }
            }
        }
    }
    HamiltonianBoundsReport {
        check: "coercivity".into(),
        samples,
        violations,
        passed: violations == 0,
        coercivity_margin: Some(margin),
        lipschitz_margin: None,
        constants,
        witness,
    }
}

/// Result of transporting an interface control to a nearby point.
#[derive(Debug, Clone, Serialize)]
pub struct MatchCertificate {
    pub control: ControlTriple,
    /// Whether the control had to be blended with a controllability triple.
    pub blended: bool,
    /// `μ̄` of the blend, when one was needed.
    pub blend_weight: Option<f64>,
    /// `|b_H(z,t,a) − b_H(z',t',a')|`.
    pub distance: f64,
    /// `(L_b + 2 M_b C̄/δ) d` with `d = |z − z'| + |t − t'|`.
    pub lemma_bound: f64,
    /// Distance from the blended dynamics to the chosen discrete triple.
    pub projection_slack: f64,
    /// `|l_H(z,t,a) − l_H(z',t',a')|`.
    pub cost_distance: f64,
    /// `2 M_l C̄/δ d + L_l d`.
    pub cost_bound: f64,
    pub cost_projection_slack: f64,
}

impl MatchCertificate {
    pub fn within_bound(&self) -> bool {
        self.distance <= self.lemma_bound + self.projection_slack + 1e-12
    }
}

/// Finds `a' ∈ A₀(z', t')` close to `a ∈ A₀(z, t)`: keeps `a` if it is still
/// tangent, otherwise blends it with a triple of normal speed `∓δ` so the
/// mixture is tangent again, then picks the nearest discrete triple.
pub fn match_control(
    spec: &ProblemSpec,
    z: &[f64],
    t: f64,
    a: &ControlTriple,
    z2: &[f64],
    t2: f64,
) -> Result<MatchCertificate> {
    let tol = spec.tangency_tol();
    let (b_here, l_here) = boundary_dynamics(spec, z, t, a);
    if geometry::dot_n1(&b_here).abs() > tol {
        return Err(Error::invalid("control is not tangent at the starting point"));
    }
    let d = distance(z, z2) + (t - t2).abs();
    let k = BoundConstants::from_spec(spec);
    let lemma_bound = (spec.speed_lipschitz() + 2.0 * spec.max_speed() * k.c_bar / spec.delta()) * d;
    let cost_bound = 2.0 * spec.max_cost() * k.c_bar / spec.delta() * d + spec.cost_lipschitz() * d;

    let (b_there, l_there) = boundary_dynamics(spec, z2, t2, a);
    let beta = geometry::dot_n1(&b_there);
    let finish = |control: ControlTriple, blended, weight, target: (&[f64], f64)| {
        let (b_new, l_new) = boundary_dynamics(spec, z2, t2, &control);
        MatchCertificate {
            control,
            blended,
            blend_weight: weight,
            distance: distance(&b_here, &b_new),
            lemma_bound,
            projection_slack: distance(target.0, &b_new),
            cost_distance: (l_here - l_new).abs(),
            cost_bound,
            cost_projection_slack: (target.1 - l_new).abs(),
        }
    };
    if beta.abs() <= tol {
        return Ok(finish(*a, false, None, (&b_there, l_there)));
    }

    // a controllability triple pushing the other way with speed at least δ
    let dim = spec.dim();
    let mut b = vec![0.0; dim];
    let mut best: Option<(f64, ControlTriple)> = None;
    let mut consider = |gamma: f64, triple: ControlTriple| {
        if gamma * beta < 0.0 && gamma.abs() >= spec.delta() - tol {
            let excess = gamma.abs() - spec.delta();
            if best.map_or(true, |(e, _)| excess < e) {
                best = Some((excess, triple));
            }
        }
    };
    for i in 0..spec.controls(Side::One).len() {
        spec.dynamics(Side::One, z2, t2, i, &mut b);
        consider(geometry::dot_n1(&b), ControlTriple::new(i, a.alpha2, 1.0));
    }
    for j in 0..spec.controls(Side::Two).len() {
        spec.dynamics(Side::Two, z2, t2, j, &mut b);
        consider(geometry::dot_n1(&b), ControlTriple::new(a.alpha1, j, 0.0));
    }
    let (_, pusher) = best.ok_or(Error::NoControllabilityTriple {
        required: -beta.signum() * spec.delta(),
    })?;
    let (b_push, l_push) = boundary_dynamics(spec, z2, t2, &pusher);
    let gamma = geometry::dot_n1(&b_push);
    let weight = gamma.abs() / (beta.abs() + gamma.abs());
    let b_blend: Vec<f64> = b_there
        .iter()
        .zip(&b_push)
        .map(|(u, v)| weight * u + (1.0 - weight) * v)
        .collect();
    let l_blend = weight * l_there + (1.0 - weight) * l_push;

    let set = interface_controls(spec, z2, t2);
    let mut nearest: Option<(f64, usize)> = None;
    for k in 0..set.len() {
        let v = set.velocity(k);
        let mut e: f64 = (0..dim - 1).map(|c| (v[c] - b_blend[c]).powi(2)).sum();
        e += b_blend[dim - 1].powi(2);
        e += (set.cost(k) - l_blend).powi(2);
        if nearest.map_or(true, |(best, _)| e < best) {
            nearest = Some((e, k));
        }
    }
    let (_, k) = nearest.ok_or(Error::NoControllabilityTriple { required: 0.0 })?;
    Ok(finish(set.triples[k], true, Some(weight), (&b_blend, l_blend)))
}

/// Samples the Lipschitz-type estimate of `H_T` between interface points.
/// `slack` scales the allowance `slack · (1 + |p| + |q|)` granted to the
/// finite control sample.
pub fn check_ht_lipschitz(
    spec: &ProblemSpec,
    pairs: usize,
    seed: u64,
    p_radius: f64,
    slack: f64,
) -> HamiltonianBoundsReport {
    let constants = BoundConstants::from_spec(spec);
    let dim = spec.dim();
    let (lower, upper) = spec.domain();
    let tl = &lower[..dim - 1];
    let tu = &upper[..dim - 1];
    let diam = distance(lower, upper);
    let mut rng = rng(seed);
    let mut margin = f64::INFINITY;
    let mut violations = 0;
    let mut witness = None;
    for n in 0..pairs {
        let y = point_in_box(&mut rng, tl, tu);
        let s = rng.gen_range(0.0..=spec.horizon());
        let (y2, s2) = if n % 2 == 0 {
            let r = 0.05 * diam;
            let y2: Vec<f64> = y
                .iter()
                .enumerate()
                .map(|(k, v)| (v + rng.gen_range(-r..r)).clamp(tl[k], tu[k]))
                .collect();
            let s2 = (s + rng.gen_range(-r..r)).clamp(0.0, spec.horizon());
            (y2, s2)
        } else {
            (point_in_box(&mut rng, tl, tu), rng.gen_range(0.0..=spec.horizon()))
        };
        let p = vector_in_cube(&mut rng, dim - 1, p_radius);
        let q: Vec<f64> = if n % 3 == 0 {
            p.clone()
        } else if n % 3 == 1 {
            p.iter().map(|v| v + rng.gen_range(-0.1..0.1)).collect()
        } else {
            vector_in_cube(&mut rng, dim - 1, p_radius)
        };
        let z = spec.interface_point(&y);
        let z2 = spec.interface_point(&y2);
        let h = hamiltonian_tangential(spec, &z, s, &p, false);
        let h2 = hamiltonian_tangential(spec, &z2, s2, &q, false);
        if h == f64::NEG_INFINITY && h2 == f64::NEG_INFINITY {
            continue;
        }
        let d = distance(&z, &z2) + (s - s2).abs();
        let (np, nq) = (norm(&p), norm(&q));
        let bound = constants.lipschitz_m * d * (np + nq)
            + constants.max_speed * distance(&p, &q)
            + constants.modulus(d)
            + slack * (1.0 + np + nq);
        let lhs = (h - h2).abs();
        let rounding = 1e-12 * (1.0 + h.abs().max(h2.abs()));
        let m = bound - lhs;
        if m < margin || m.is_nan() {
            margin = if m.is_nan() { f64::NEG_INFINITY } else { m };
        }
        if !(lhs <= bound + rounding) {
            violations += 1;
            if witness.is_none() {
                witness = Some(Witness {
                    point: z.clone(),
                    time: s,
                    other_point: Some(z2.clone()),
                    other_time: Some(s2),
                    gradient: Some(p.clone()),
                    other_gradient: Some(q.clone()),
                    observed: lhs,
                    bound,
                    detail: "|H_T - H_T'| exceeds the Lipschitz estimate".into(),
                    ..Witness::default()
                });
            }
        }
    }
    HamiltonianBoundsReport {
        check: "tangential-lipschitz".into(),
        samples: pairs,
        violations,
        passed: violations == 0,
        coercivity_margin: None,
        lipschitz_margin: Some(margin),
        constants,
        witness,
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{Cost, Dynamics, Terminal};
    use crate::problem::{Bounds, ControlSet, SideData};

    fn one_d(
        b1: Dynamics,
        l1: Cost,
        c1: Vec<f64>,
        b2: Dynamics,
        l2: Cost,
        c2: Vec<f64>,
    ) -> ProblemSpec {
        let bounds = Bounds {
            speed: 1.0,
            speed_lipschitz: 0.0,
            cost: 2.0,
            cost_lipschitz: 0.0,
        };
        let set = |c: Vec<f64>| ControlSet::new(1, c.into_iter().map(|v| vec![v]).collect()).unwrap();
        ProblemSpec::new(
            1,
            SideData {
                dynamics: b1,
                cost: l1,
                controls: set(c1),
                bounds,
            },
            SideData {
                dynamics: b2,
                cost: l2,
                controls: set(c2),
                bounds,
            },
            Terminal::Constant(0.0),
            1.0,
            1.0,
            5,
            (vec![-1.0], vec![1.0]),
        )
        .unwrap()
    }

    fn three_controls(l1: Cost, l2: Cost) -> ProblemSpec {
        let id = || Dynamics::EikonalDemo { speed: 1.0 };
        one_d(id(), l1, vec![-1.0, 0.0, 1.0], id(), l2, vec![-1.0, 0.0, 1.0])
    }

    fn gap3() -> ProblemSpec {
        ProblemSpec::gap_demo(1, 3, &[]).unwrap()
    }

    #[test]
    fn side_hamiltonian_single_control() {
        let bounds = Bounds {
            speed: 1.0,
            speed_lipschitz: 0.0,
            cost: 0.0,
            cost_lipschitz: 0.0,
        };
        let side = SideData {
            dynamics: Dynamics::Constant(vec![1.0, 0.0]),
            cost: Cost::Constant(0.0),
            controls: ControlSet::new(1, vec![vec![0.0]]).unwrap(),
            bounds,
        };
        let spec = ProblemSpec::new(
            2,
            side.clone(),
            side,
            Terminal::Constant(0.0),
            1.0,
            1.0,
            3,
            (vec![-1.0, -1.0], vec![1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(hamiltonian_side(&spec, Side::One, &[0.0, 0.0], 0.0, &[2.0, 5.0]), -2.0);
    }

    #[test]
    fn side_hamiltonian_is_abs_p_for_eikonal_controls() {
        let spec = three_controls(Cost::Constant(0.0), Cost::Constant(0.0));
        assert_eq!(hamiltonian_side(&spec, Side::One, &[0.3], 0.0, &[3.0]), 3.0);
    }

    #[test]
    fn side_hamiltonian_with_control_dependent_cost() {
        // max over α ∈ {-1, 0, 1} of -(1 - α) is 0, reached at α = 1
        let spec = gap3();
        let (h, k) = hamiltonian_side_argmax(&spec, Side::One, &[0.2], 0.0, &[0.0]);
        assert_eq!(h, 0.0);
        assert_eq!(spec.controls(Side::One).get(k), &[1.0]);
    }

    #[test]
    fn boundary_dynamics_mixes() {
        let spec = one_d(
            Dynamics::Constant(vec![1.0]),
            Cost::Constant(0.0),
            vec![0.0],
            Dynamics::Constant(vec![-1.0]),
            Cost::Constant(2.0),
            vec![0.0],
        );
        let (b, l) = boundary_dynamics(&spec, &[0.0], 0.0, &ControlTriple::new(0, 0, 0.5));
        assert_eq!((b[0], l), (0.0, 1.0));
        let (b, l) = boundary_dynamics(&spec, &[0.0], 0.0, &ControlTriple::new(0, 0, 1.0));
        assert_eq!((b[0], l), (1.0, 0.0));
        let (b, l) = boundary_dynamics(&spec, &[0.0], 0.0, &ControlTriple::new(0, 0, 0.0));
        assert_eq!((b[0], l), (-1.0, 2.0));
    }

    #[test]
    fn tangency_weights() {
        assert_eq!(tangency_mu(1.0, 1.0, 1e-10), Tangency::Unique(0.5));
        assert_eq!(tangency_mu(-1.0, -1.0, 1e-10), Tangency::Unique(0.5));
        assert_eq!(tangency_mu(1.0, -1.0, 1e-10), Tangency::None);
        assert_eq!(tangency_mu(1.0, -0.5, 1e-10), Tangency::None);
        assert_eq!(tangency_mu(0.0, 0.0, 1e-10), Tangency::Any);
        assert_eq!(tangency_mu(0.0, 1.0, 1e-10), Tangency::Unique(1.0));
    }

    proptest::proptest! {
        #[test]
        fn tangency_round_trip(b1 in -3.0f64..3.0, b2 in -3.0f64..3.0) {
            if let Tangency::Unique(mu) = tangency_mu(b1, b2, 1e-10) {
                // b_H · n₁ = μ β₁ − (1 − μ) β₂
                let normal = mu * b1 - (1.0 - mu) * b2;
                proptest::prop_assert!(normal.abs() <= 1e-10 * 3.0);
                proptest::prop_assert!((0.0..=1.0).contains(&mu));
            }
        }
    }

    #[test]
    fn interface_controls_sign_bookkeeping() {
        let spec = gap3();
        let set = interface_controls(&spec, &[0.0], 0.0);
        let find = |a1: usize, a2: usize| {
            (0..set.len())
                .filter(|&k| set.triples[k].alpha1 == a1 && set.triples[k].alpha2 == a2)
                .collect::<Vec<_>>()
        };
        // (α₁, α₂) = (−1, +1): β₁ = β₂ = 1, μ = ½, regular
        let k = find(0, 2);
        assert_eq!(k.len(), 1);
        assert_eq!(set.triples[k[0]].mu, 0.5);
        assert!(set.regular[k[0]]);
        // (+1, −1): β₁ = β₂ = −1, μ = ½, singular
        let k = find(2, 0);
        assert_eq!(set.triples[k[0]].mu, 0.5);
        assert!(!set.regular[k[0]]);
        // (0, 0): doubly tangent, one triple per μ grid value, regular
        let k = find(1, 1);
        assert_eq!(k.len(), spec.mu_grid());
        assert!(k.iter().all(|&i| set.regular[i]));
        // crossing pair (−1, −1) never stays on H
        assert!(find(0, 0).is_empty());
        for k in 0..set.len() {
            assert_eq!(geometry::dot_n1(set.velocity(k)), 0.0);
        }
    }

    #[test]
    fn tangential_hamiltonians_on_gap_problem() {
        // enumerate the 9 pairs by hand: the singular (+1, −1, ½) has l_H = 0,
        // the best regular mixtures have l_H = 1
        let spec = gap3();
        let z = [0.0];
        assert_eq!(hamiltonian_tangential(&spec, &z, 0.0, &[], false), 0.0);
        assert_eq!(hamiltonian_tangential(&spec, &z, 0.0, &[], true), -1.0);
    }

    #[test]
    fn tangential_hamiltonian_for_tangent_drift() {
        let bounds = Bounds {
            speed: 1.0,
            speed_lipschitz: 0.0,
            cost: 0.0,
            cost_lipschitz: 0.0,
        };
        let side = SideData {
            dynamics: Dynamics::Constant(vec![1.0, 0.0]),
            cost: Cost::Constant(0.0),
            controls: ControlSet::new(1, vec![vec![0.0]]).unwrap(),
            bounds,
        };
        let spec = ProblemSpec::new(
            2,
            side.clone(),
            side,
            Terminal::Constant(0.0),
            1.0,
            1.0,
            3,
            (vec![-1.0, -1.0], vec![1.0, 1.0]),
        )
        .unwrap();
        let z = [0.2, 0.0];
        assert_eq!(hamiltonian_tangential(&spec, &z, 0.0, &[3.0], false), -3.0);
        assert_eq!(hamiltonian_tangential(&spec, &z, 0.0, &[3.0], true), -3.0);
    }

    #[test]
    fn empty_interface_set_gives_negative_infinity() {
        // both sides always cross downward: no tangent mixture exists
        let spec = one_d(
            Dynamics::Constant(vec![-1.0]),
            Cost::Constant(0.0),
            vec![0.0],
            Dynamics::Constant(vec![-1.0]),
            Cost::Constant(0.0),
            vec![0.0],
        );
        let set = interface_controls(&spec, &[0.0], 0.0);
        assert!(set.is_empty());
        assert_eq!(set.hamiltonian(&[], false), f64::NEG_INFINITY);
    }

    #[test]
    fn ishii_envelopes() {
        let spec = gap3();
        // p = 0: both Hamiltonians are 0
        assert_eq!(ishii_envelope(&spec, &[0.0], 0.0, &[0.0], Envelope::Min), 0.0);
        assert_eq!(ishii_envelope(&spec, &[0.0], 0.0, &[0.0], Envelope::Max), 0.0);
        // p = 3: H₁ = |1 − 3| − 1 = 1, H₂ = |1 + 3| − 1 = 3
        assert_eq!(ishii_envelope(&spec, &[0.0], 0.0, &[3.0], Envelope::Min), 1.0);
        assert_eq!(ishii_envelope(&spec, &[0.0], 0.0, &[3.0], Envelope::Max), 3.0);
        let eik = three_controls(Cost::Constant(1.0), Cost::Constant(1.0));
        let h1 = hamiltonian_side(&eik, Side::One, &[0.0], 0.0, &[0.7]);
        assert_eq!(ishii_envelope(&eik, &[0.0], 0.0, &[0.7], Envelope::Min), h1);
        assert_eq!(ishii_envelope(&eik, &[0.0], 0.0, &[0.7], Envelope::Max), h1);
    }

    #[test]
    fn regular_hamiltonian_never_exceeds_full() {
        let spec = ProblemSpec::gap_demo(2, 9, &[0.4]).unwrap();
        let mut r = rng(3);
        for _ in 0..200 {
            let y = r.gen_range(-1.0..1.0);
            let p = r.gen_range(-5.0..5.0);
            let z = [y, 0.0];
            let set = interface_controls(&spec, &z, 0.3);
            assert!(set.hamiltonian(&[p], true) <= set.hamiltonian(&[p], false));
        }
    }

    #[test]
    fn tangential_hamiltonian_is_permutation_invariant() {
        let spec = ProblemSpec::gap_demo(2, 7, &[0.3]).unwrap();
        let mut shuffled = spec.clone();
        let mut reversed: Vec<Vec<f64>> = spec.controls(Side::One).iter().map(|c| c.to_vec()).collect();
        reversed.reverse();
        shuffled.side_mut(Side::One).controls = ControlSet::new(1, reversed).unwrap();
        for p in [-2.0, 0.0, 0.5, 3.0] {
            let a = hamiltonian_tangential(&spec, &[0.1, 0.0], 0.2, &[p], false);
            let b = hamiltonian_tangential(&shuffled, &[0.1, 0.0], 0.2, &[p], false);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn side_hamiltonian_is_midpoint_convex() {
        let spec = ProblemSpec::gap_demo(2, 11, &[0.5]).unwrap();
        let mut r = rng(11);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let p: Vec<f64> = vector_in_cube(&mut r, 2, 10.0);
            let q: Vec<f64> = vector_in_cube(&mut r, 2, 10.0);
            let m: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
            for side in Side::BOTH {
                let x = [0.1, 0.4];
                let lhs = hamiltonian_side(&spec, side, &x, 0.0, &m);
                let rhs = 0.5 * (hamiltonian_side(&spec, side, &x, 0.0, &p) + hamiltonian_side(&spec, side, &x, 0.0, &q));
                worst = worst.max(lhs - rhs);
            }
        }
        assert!(worst <= 1e-12, "midpoint convexity violated by {worst}");
    }

    #[test]
    fn coercivity_on_axis_controls() {
        // b ∈ {−δ, +δ}, l ≡ 0: H(p) = δ|p|, slack equals C_M
        let spec = one_d(
            Dynamics::EikonalDemo { speed: 1.0 },
            Cost::Constant(0.0),
            vec![-1.0, 1.0],
            Dynamics::EikonalDemo { speed: 1.0 },
            Cost::Constant(0.0),
            vec![-1.0, 1.0],
        )
        .with_bounds(
            Side::One,
            Bounds {
                speed: 1.0,
                speed_lipschitz: 0.0,
                cost: 0.0,
                cost_lipschitz: 0.0,
            },
        )
        .with_bounds(
            Side::Two,
            Bounds {
                speed: 1.0,
                speed_lipschitz: 0.0,
                cost: 0.0,
                cost_lipschitz: 0.0,
            },
        );
        let report = check_coercivity(&spec, 500, 1, 20.0);
        assert!(report.passed);
        assert!((report.coercivity_margin.unwrap() - 1.0).abs() < 1e-12);
        assert!(hamiltonian_side(&spec, Side::One, &[0.0], 0.0, &[0.0]) >= -report.constants.c_m);
    }

    #[test]
    fn coercivity_slack_grows_with_normal_gradient() {
        let spec = ProblemSpec::gap_demo(1, 21, &[]).unwrap();
        let report = check_coercivity(&spec, 10_000, 7, 50.0);
        assert!(report.passed, "{:?}", report.witness);
        // for the gap problem H_i(p) = |1 ∓ p| − 1 ≥ |p| − 2 = δ|p| − C_M exactly
        let h = hamiltonian_side(&spec, Side::One, &[0.0], 0.0, &[40.0]);
        assert_eq!(h - (40.0 - 2.0), 0.0);
    }

    #[test]
    fn coercivity_detects_missing_controllability() {
        // only nonnegative normal speeds on side 1
        let spec = one_d(
            Dynamics::EikonalDemo { speed: 1.0 },
            Cost::Constant(0.0),
            vec![0.0, 1.0],
            Dynamics::EikonalDemo { speed: 1.0 },
            Cost::Constant(0.0),
            vec![-1.0, 1.0],
        )
        .with_bounds(
            Side::One,
            Bounds {
                speed: 0.1,
                speed_lipschitz: 0.0,
                cost: 0.0,
                cost_lipschitz: 0.0,
            },
        )
        .with_bounds(
            Side::Two,
            Bounds {
                speed: 0.1,
                speed_lipschitz: 0.0,
                cost: 0.0,
                cost_lipschitz: 0.0,
            },
        );
        let report = check_coercivity(&spec, 400, 1, 50.0);
        assert!(!report.passed);
        assert!(report.witness.is_some());
    }

    #[test]
    fn match_control_identity_and_time_shift() {
        let spec = ProblemSpec::gap_demo(1, 21, &[]).unwrap();
        let a = ControlTriple::new(20, 0, 0.5);
        let cert = match_control(&spec, &[0.0], 0.3, &a, &[0.0], 0.3).unwrap();
        assert_eq!(cert.control, a);
        assert_eq!(cert.distance, 0.0);
        let cert = match_control(&spec, &[0.0], 0.3, &a, &[0.0], 0.35).unwrap();
        assert_eq!(cert.control, a);
        assert!(!cert.blended);
        assert_eq!(cert.distance, 0.0);
    }

    fn sheared(lb: f64) -> ProblemSpec {
        // b₁ = (0.5, α + x₁), b₂ = (−0.5, α): tangency of a fixed pair moves with x₁
        let bounds = Bounds {
            speed: 2.5,
            speed_lipschitz: lb,
            cost: 1.0,
            cost_lipschitz: 0.0,
        };
        let controls = ControlSet::uniform(&[-2.0], &[2.0], &[41]).unwrap();
        let b1 = Dynamics::Affine {
            offset: vec![0.5, 0.0],
            state: vec![vec![0.0, 0.0], vec![lb, 0.0]],
            control: vec![vec![0.0], vec![1.0]],
            time: vec![0.0, 0.0],
        };
        let b2 = Dynamics::Affine {
            offset: vec![-0.5, 0.0],
            state: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            control: vec![vec![0.0], vec![1.0]],
            time: vec![0.0, 0.0],
        };
        let l = Cost::Affine {
            offset: 0.0,
            state: vec![0.0, 0.0],
            control: vec![0.5],
            time: 0.0,
        };
        ProblemSpec::new(
            2,
            SideData {
                dynamics: b1,
                cost: l.clone(),
                controls: controls.clone(),
                bounds,
            },
            SideData {
                dynamics: b2,
                cost: l,
                controls,
                bounds,
            },
            Terminal::Constant(0.0),
            1.0,
            1.0,
            5,
            (vec![-0.5, -1.0], vec![0.5, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn match_control_blends_and_certifies() {
        let spec = sheared(1.0);
        let z = [0.0, 0.0];
        let set = interface_controls(&spec, &z, 0.0);
        let k = set.triples.iter().position(|a| a.mu > 0.0 && a.mu < 1.0).unwrap();
        let a = set.triples[k];
        let z2 = [0.01, 0.0];
        let cert = match_control(&spec, &z, 0.0, &a, &z2, 0.0).unwrap();
        // the target control is tangent at the new point
        let (b, _) = boundary_dynamics(&spec, &z2, 0.0, &cert.control);
        assert!(geometry::dot_n1(&b).abs() <= 1e-9);
        let k = BoundConstants::from_spec(&spec);
        let expected_bound = (1.0 + 2.0 * spec.max_speed() * k.c_bar) * 0.01;
        assert!((cert.lemma_bound - expected_bound).abs() < 1e-12);
        assert!(cert.within_bound(), "{cert:?}");
    }

    #[test]
    fn match_control_without_controllability_fails() {
        // b₁ = t, b₂ = 0: the pair is doubly tangent at t = 0 only, and no
        // control pushes back with normal speed δ = 1
        let spec = one_d(
            Dynamics::Affine {
                offset: vec![0.0],
                state: vec![vec![0.0]],
                control: vec![vec![0.0]],
                time: vec![1.0],
            },
            Cost::Constant(0.0),
            vec![0.0],
            Dynamics::Constant(vec![0.0]),
            Cost::Constant(0.0),
            vec![0.0],
        );
        let a = ControlTriple::new(0, 0, 0.5);
        let err = match_control(&spec, &[0.0], 0.0, &a, &[0.0], 0.5).unwrap_err();
        assert!(matches!(err, Error::NoControllabilityTriple { .. }));
        // not tangent at the starting point
        assert!(match_control(&spec, &[0.0], 0.5, &a, &[0.0], 0.0).is_err());
    }

    #[test]
    fn ht_lipschitz_constant_coefficients_exact() {
        // coefficients constant in (x, t): bound reduces to M_b |p − q|
        let spec = ProblemSpec::gap_demo(2, 11, &[0.5]).unwrap();
        let report = check_ht_lipschitz(&spec, 1000, 5, 10.0, 0.0);
        assert!(report.passed, "{:?}", report.witness);
        let z = [0.0, 0.0];
        let h = |p: f64| hamiltonian_tangential(&spec, &z, 0.0, &[p], false);
        assert!((h(1.0) - h(1.0)).abs() == 0.0);
        assert!((h(1.0) - h(1.3)).abs() <= spec.max_speed() * 0.3 + 1e-12);
    }

    #[test]
    fn ht_lipschitz_on_gap_problem() {
        let spec = ProblemSpec::gap_demo(1, 21, &[]).unwrap();
        let report = check_ht_lipschitz(&spec, 1000, 9, 10.0, 0.0);
        assert!(report.passed);
        assert!(report.lipschitz_margin.unwrap() >= 0.0);
    }
}
