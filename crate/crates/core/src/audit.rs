//! Sampled audits of the standing hypotheses: declared bounds and Lipschitz
//! constants, normal controllability on the interface, and how far the
//! finite control samples are from convex.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{ProblemSpec, Side};
use crate::sampling::{distance, norm, point_in_box, rng};

/// A sample that breaks a check, with enough context to reproduce it.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_gradient: Option<Vec<f64>>,
    pub observed: f64,
    pub bound: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub audit: String,
    pub samples: usize,
    pub passed: bool,
    pub metrics: Vec<Metric>,
    pub flags: Vec<String>,
    pub witness: Option<Witness>,
}

impl AuditReport {
    fn new(audit: &str, samples: usize) -> Self {
        Self {
            audit: audit.into(),
            samples,
            passed: true,
            metrics: Vec::new(),
            flags: Vec::new(),
            witness: None,
        }
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    fn push(&mut self, name: &str, value: f64, bound: Option<f64>) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
            bound,
        });
    }

    fn fail(&mut self, witness: Witness) {
        self.passed = false;
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
    }
}

fn exceeds(value: f64, bound: f64) -> bool {
    !(value <= bound * (1.0 + 1e-12) + 1e-12)
}

/// Checks `|b_i| ≤ M_b`, `|l_i| ≤ M_l`, the Lipschitz constants in
/// `(x, t)` (sum norm) and finiteness of `g` at random samples.
pub fn audit_bounds(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<AuditReport> {
    if samples == 0 {
        return Err(Error::invalid("audit needs at least one sample"));
    }
    let mut report = AuditReport::new("bounds", samples);
    let (lower, upper) = spec.domain();
    let diam = distance(lower, upper);
    let horizon = spec.horizon();
    let dim = spec.dim();
    let mut r = rng(seed);
    let mut b = vec![0.0; dim];
    let mut b2 = vec![0.0; dim];
    for side in Side::BOTH {
        let data = spec.side(side);
        let tag = |name: &str| format!("side{}.{name}", side.index());
        let n = data.controls.len();
        let (mut max_b, mut max_l, mut q_b, mut q_l) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for s in 0..samples {
            let x = point_in_box(&mut r, lower, upper);
            let t = r.gen_range(0.0..=horizon);
            let k = r.gen_range(0..n);
            spec.dynamics(side, &x, t, k, &mut b);
            let l = spec.cost(side, &x, t, k);
            let nb = norm(&b);
            max_b = max_b.max(nb);
            max_l = max_l.max(l.abs());
            let base = Witness {
                point: x.clone(),
                time: t,
                side: Some(side.index()),
                control: Some(k),
                ..Witness::default()
            };
            if exceeds(nb, data.bounds.speed) {
                report.fail(Witness {
                    observed: nb,
                    bound: data.bounds.speed,
                    detail: "|b_i| exceeds the declared speed bound".into(),
                    ..base.clone()
                });
            }
            if exceeds(l.abs(), data.bounds.cost) {
                report.fail(Witness {
                    observed: l.abs(),
                    bound: data.bounds.cost,
                    detail: "|l_i| exceeds the declared cost bound".into(),
                    ..base.clone()
                });
            }
            // alternate nearby and independent partners for the quotients
            let (y, u) = if s % 2 == 0 {
                let rad = 0.05 * diam.max(1e-12);
                let y: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .map(|(c, v)| (v + r.gen_range(-rad..rad)).clamp(lower[c], upper[c]))
                    .collect();
                (y, (t + r.gen_range(-rad..rad)).clamp(0.0, horizon))
            } else {
                (point_in_box(&mut r, lower, upper), r.gen_range(0.0..=horizon))
            };
            let d = distance(&x, &y) + (t - u).abs();
            if d > 0.0 {
                spec.dynamics(side, &y, u, k, &mut b2);
                let qb = distance(&b, &b2) / d;
                let ql = (l - spec.cost(side, &y, u, k)).abs() / d;
                q_b = q_b.max(qb);
                q_l = q_l.max(ql);
                let pair = Witness {
                    other_point: Some(y.clone()),
                    other_time: Some(u),
                    ..base.clone()
                };
                if exceeds(qb, data.bounds.speed_lipschitz) {
                    report.fail(Witness {
                        observed: qb,
                        bound: data.bounds.speed_lipschitz,
                        detail: "Lipschitz quotient of b_i exceeds L_b".into(),
                        ..pair.clone()
                    });
                }
                if exceeds(ql, data.bounds.cost_lipschitz) {
                    report.fail(Witness {
                        observed: ql,
                        bound: data.bounds.cost_lipschitz,
                        detail: "Lipschitz quotient of l_i exceeds L_l".into(),
                        ..pair
                    });
                }
            }
        }
        report.push(&tag("max_speed"), max_b, Some(data.bounds.speed));
        report.push(&tag("max_cost"), max_l, Some(data.bounds.cost));
        report.push(&tag("speed_lipschitz_quotient"), q_b, Some(data.bounds.speed_lipschitz));
        report.push(&tag("cost_lipschitz_quotient"), q_l, Some(data.bounds.cost_lipschitz));
        let dups = data.controls.duplicate_count();
        if dups > 0 {
            report
                .flags
                .push(format!("side{} control sample has {dups} duplicate points", side.index()));
        }
    }
    let mut max_g = 0.0f64;
    for _ in 0..samples {
        let x = point_in_box(&mut r, lower, upper);
        let g = spec.terminal(&x);
        if !g.is_finite() {
            report.fail(Witness {
                point: x,
                observed: g,
                bound: f64::INFINITY,
                detail: "terminal cost is not finite".into(),
                ..Witness::default()
            });
        } else {
            max_g = max_g.max(g.abs());
        }
    }
    report.push("terminal.max_abs", max_g, None);
    Ok(report)
}

/// Checks that `{b_i(z,s,α)·n_i : α}` spans `[−δ, δ]` at sampled interface
/// points, for both sides. The worst margin is `min(−min_α β, max_α β) − δ`.
pub fn audit_normal_controllability(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<AuditReport> {
    if samples == 0 {
        return Err(Error::invalid("audit needs at least one interface sample"));
    }
    let delta = spec.delta();
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    let mut report = AuditReport::new("normal-controllability", samples);
    let dim = spec.dim();
    let (lower, upper) = spec.domain();
    let mut r = rng(seed);
    let mut b = vec![0.0; dim];
    let tol = spec.tangency_tol();
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let y = point_in_box(&mut r, &lower[..dim - 1], &upper[..dim - 1]);
        let z = spec.interface_point(&y);
        let s = r.gen_range(0.0..=spec.horizon());
        for side in Side::BOTH {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for k in 0..spec.controls(side).len() {
                spec.dynamics(side, &z, s, k, &mut b);
                let beta = side.normal_component(&b);
                lo = lo.min(beta);
                hi = hi.max(beta);
            }
            let margin = (-lo).min(hi) - delta;
            worst = worst.min(margin);
            if margin < -tol {
                report.fail(Witness {
                    point: z.clone(),
                    time: s,
                    side: Some(side.index()),
                    observed: (-lo).min(hi),
                    bound: delta,
                    detail: format!("normal speeds span [{lo}, {hi}], which misses [-delta, delta]"),
                    ..Witness::default()
                });
            }
        }
    }
    report.push("worst_margin", worst, Some(0.0));
    Ok(report)
}

/// Measures how far convex combinations of sampled `(b, l)` pairs are from
/// the finite sample. Report-only: `passed` stays true and `flags` notes a
/// gap above `threshold`.
pub fn audit_convexity(spec: &ProblemSpec, samples: usize, seed: u64, threshold: f64) -> Result<AuditReport> {
    if samples == 0 {
        return Err(Error::invalid("audit needs at least one sample"));
    }
    let mut report = AuditReport::new("convexity", samples);
    let dim = spec.dim();
    let (lower, upper) = spec.domain();
    let mut r = rng(seed);
    let mut points = Vec::new();
    for side in Side::BOTH {
        let n = spec.controls(side).len();
        let mut gap = 0.0f64;
        let mut worst_at = None;
        for _ in 0..samples {
            let x = point_in_box(&mut r, lower, upper);
            let t = r.gen_range(0.0..=spec.horizon());
            points.clear();
            for k in 0..n {
                let mut p = vec![0.0; dim + 1];
                spec.dynamics(side, &x, t, k, &mut p[..dim]);
                p[dim] = spec.cost(side, &x, t, k);
                points.push(p);
            }
            let i = r.gen_range(0..n);
            let j = r.gen_range(0..n);
            for lambda in [0.25, 0.5, 0.75] {
                let mix: Vec<f64> = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                    .collect();
                let nearest = points.iter().map(|p| distance(p, &mix)).fold(f64::INFINITY, f64::min);
                if nearest > gap {
                    gap = nearest;
                    worst_at = Some((x.clone(), t, i, j));
                }
            }
        }
        report.push(&format!("side{}.max_gap", side.index()), gap, Some(threshold));
        if exceeds(gap, threshold) {
            report.flags.push(format!(
                "side{} convexification gap {gap} exceeds {threshold}",
                side.index()
            ));
            if report.witness.is_none() {
                if let Some((x, t, i, j)) = worst_at {
                    report.witness = Some(Witness {
                        point: x,
                        time: t,
                        side: Some(side.index()),
                        control: Some(i),
                        observed: gap,
                        bound: threshold,
                        detail: format!("mixtures of controls {i} and {j} are far from the sample"),
                        ..Witness::default()
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{Cost, Dynamics, Terminal};
    use crate::problem::{Bounds, ControlSet, SideData};
    use std::sync::Arc;

    fn bounds(speed: f64, lb: f64, cost: f64, ll: f64) -> Bounds {
        Bounds {
            speed,
            speed_lipschitz: lb,
            cost,
            cost_lipschitz: ll,
        }
    }

    fn spec_with(dim: usize, b: Dynamics, l: Cost, controls: ControlSet, bd: Bounds, delta: f64) -> ProblemSpec {
        let side = SideData {
            dynamics: b,
            cost: l,
            controls,
            bounds: bd,
        };
        ProblemSpec::new(
            dim,
            side.clone(),
            side,
            Terminal::Constant(0.0),
            1.0,
            delta,
            3,
            (vec![-1.0; dim], vec![1.0; dim]),
        )
        .unwrap()
    }

    fn scalar_controls(v: &[f64]) -> ControlSet {
        ControlSet::new(1, v.iter().map(|x| vec![*x]).collect()).unwrap()
    }

    #[test]
    fn constant_field_within_bound() {
        let spec = spec_with(
            2,
            Dynamics::Constant(vec![1.0, 0.0]),
            Cost::Constant(0.0),
            scalar_controls(&[0.0]),
            bounds(1.0, 0.0, 0.0, 0.0),
            0.5,
        );
        let report = audit_bounds(&spec, 200, 1).unwrap();
        assert!(report.passed);
        assert_eq!(report.metric("side1.max_speed"), Some(1.0));
    }

    #[test]
    fn constant_field_over_bound_fails_with_witness() {
        let spec = spec_with(
            2,
            Dynamics::Constant(vec![2.0, 0.0]),
            Cost::Constant(0.0),
            scalar_controls(&[0.0]),
            bounds(1.0, 0.0, 0.0, 0.0),
            0.5,
        );
        let report = audit_bounds(&spec, 50, 1).unwrap();
        assert!(!report.passed);
        let w = report.witness.unwrap();
        assert_eq!(w.observed, 2.0);
        assert_eq!(w.bound, 1.0);
    }

    #[test]
    fn sine_cost_quotient_below_one() {
        let cost = Cost::Custom(Arc::new(|x: &[f64], _t: f64, _a: &[f64]| x[0].sin()));
        let spec = spec_with(
            2,
            Dynamics::Constant(vec![0.0, 0.0]),
            cost,
            scalar_controls(&[0.0]),
            bounds(0.0, 0.0, 1.0, 1.0),
            0.5,
        );
        let report = audit_bounds(&spec, 10_000, 3).unwrap();
        assert!(report.passed, "{:?}", report.witness);
        let q = report.metric("side1.cost_lipschitz_quotient").unwrap();
        assert!(q <= 1.0 && q > 0.9, "{q}");
    }

    #[test]
    fn enlarging_constants_keeps_pass() {
        let spec = ProblemSpec::gap_demo(2, 11, &[0.5]).unwrap();
        assert!(audit_bounds(&spec, 500, 2).unwrap().passed);
        let mut bigger = spec.side(Side::One).bounds;
        bigger.speed *= 2.0;
        bigger.cost_lipschitz += 1.0;
        let spec = spec.with_bounds(Side::One, bigger);
        assert!(audit_bounds(&spec, 500, 2).unwrap().passed);
    }

    #[test]
    fn duplicate_controls_are_flagged() {
        let spec = spec_with(
            1,
            Dynamics::EikonalDemo { speed: 1.0 },
            Cost::Constant(1.0),
            scalar_controls(&[-1.0, 0.0, 0.0, 1.0]),
            bounds(1.0, 0.0, 1.0, 0.0),
            1.0,
        );
        let report = audit_bounds(&spec, 10, 0).unwrap();
        assert!(report.passed);
        assert_eq!(report.flags.len(), 2);
    }

    #[test]
    fn controllability_full_span() {
        let spec = spec_with(
            1,
            Dynamics::EikonalDemo { speed: 1.0 },
            Cost::Constant(1.0),
            scalar_controls(&[-1.0, -0.5, 0.0, 0.5, 1.0]),
            bounds(1.0, 0.0, 1.0, 0.0),
            1.0,
        );
        let report = audit_normal_controllability(&spec, 20, 0).unwrap();
        assert!(report.passed);
        assert_eq!(report.metric("worst_margin"), Some(0.0));
    }

    #[test]
    fn controllability_one_sided_fails_on_side_one() {
        let full = SideData {
            dynamics: Dynamics::EikonalDemo { speed: 1.0 },
            cost: Cost::Constant(1.0),
            controls: scalar_controls(&[-1.0, -0.5, 0.0, 0.5, 1.0]),
            bounds: bounds(1.0, 0.0, 1.0, 0.0),
        };
        let mut one = full.clone();
        one.controls = scalar_controls(&[0.0, 0.5, 1.0]);
        let spec = ProblemSpec::new(
            1,
            one,
            full,
            Terminal::Constant(0.0),
            1.0,
            0.5,
            3,
            (vec![-1.0], vec![1.0]),
        )
        .unwrap();
        let report = audit_normal_controllability(&spec, 5, 0).unwrap();
        assert!(!report.passed);
        assert_eq!(report.witness.unwrap().side, Some(1));
    }

    #[test]
    fn controllability_rejects_zero_delta() {
        let spec = ProblemSpec::eikonal_demo(5).unwrap();
        assert!(audit_normal_controllability(&spec, 0, 0).is_err());
        assert!(audit_normal_controllability(&spec.with_delta(0.0), 10, 0).is_err());
    }

    #[test]
    fn convexity_gap_of_uniform_sample() {
        let spec = spec_with(
            1,
            Dynamics::EikonalDemo { speed: 1.0 },
            Cost::Constant(1.0),
            ControlSet::uniform(&[-1.0], &[1.0], &[21]).unwrap(),
            bounds(1.0, 0.0, 1.0, 0.0),
            1.0,
        );
        let report = audit_convexity(&spec, 2000, 4, 0.05).unwrap();
        let gap = report.metric("side1.max_gap").unwrap();
        assert!(gap <= 0.05 + 1e-12, "{gap}");
        assert!(report.flags.is_empty());
    }

    #[test]
    fn convexity_two_points_flagged() {
        let spec = spec_with(
            1,
            Dynamics::EikonalDemo { speed: 1.0 },
            Cost::Constant(1.0),
            scalar_controls(&[-1.0, 1.0]),
            bounds(1.0, 0.0, 1.0, 0.0),
            1.0,
        );
        let report = audit_convexity(&spec, 400, 4, 0.05).unwrap();
        assert!(report.passed);
        assert_eq!(report.metric("side1.max_gap"), Some(1.0));
        assert!(!report.flags.is_empty());
    }

    #[test]
    fn convexity_gap_shrinks_with_refinement() {
        let gap = |n: usize| {
            let spec = spec_with(
                1,
                Dynamics::EikonalDemo { speed: 1.0 },
                Cost::Affine {
                    offset: 1.0,
                    state: vec![0.0],
                    control: vec![0.5],
                    time: 0.0,
                },
                ControlSet::uniform(&[-1.0], &[1.0], &[n]).unwrap(),
                bounds(1.0, 0.0, 1.5, 0.0),
                1.0,
            );
            audit_convexity(&spec, 500, 8, 1.0).unwrap().metric("side1.max_gap").unwrap()
        };
        let (a, b, c) = (gap(5), gap(21), gap(81));
        assert!(a > b && b > c, "{a} {b} {c}");
    }
}
