//! Euclidean distance from a point to the convex hull of finitely many
//! points, by Wolfe's minimum-norm-point algorithm.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct HullDistance {
    pub distance: f64,
    /// Nearest hull point.
    pub nearest: Vec<f64>,
    /// Convex weights `(index, λ)` of the nearest point.
    pub weights: Vec<(usize, f64)>,
}

/// Distance from `q` to `conv(points)`; `+∞` for an empty set.
pub fn distance_to_hull(points: &[Vec<f64>], q: &[f64]) -> HullDistance {
    if points.is_empty() {
        return HullDistance {
            distance: f64::INFINITY,
            nearest: Vec::new(),
            weights: Vec::new(),
        };
    }
    let y: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(q).map(|(a, b)| a - b).collect())
        .collect();
    let scale = y.iter().map(|v| dot(v, v)).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-12;

    let first = (0..y.len())
        .min_by(|&a, &b| dot(&y[a], &y[a]).total_cmp(&dot(&y[b], &y[b])))
        .unwrap_or(0);
    let mut active = vec![first];
    let mut lambda = vec![1.0];
    let mut x = y[first].clone();

    for _ in 0..(50 * y.len() + 100) {
        let xx = dot(&x, &x);
        let (j, xy) = (0..y.len())
            .map(|j| (j, dot(&x, &y[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0));
        if xx - xy <= eps * scale || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);
        loop {
            let alpha = affine_minimizer(&y, &active);
            if alpha.iter().all(|a| *a > eps) {
                lambda = alpha;
                x = combine(&y, &active, &lambda);
                break;
            }
            let mut theta = 1.0f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= eps && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            let mut k = 0;
            while k < active.len() {
                if lambda[k] <= eps {
                    active.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            x = combine(&y, &active, &lambda);
            if active.len() <= 1 {
                break;
            }
        }
    }
    let nearest = x.iter().zip(q).map(|(a, b)| a + b).collect();
    HullDistance {
        distance: dot(&x, &x).sqrt(),
        nearest,
        weights: active.into_iter().zip(lambda).collect(),
    }
}

fn affine_minimizer(y: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let m = active.len();
    let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            a[(r, c)] = dot(&y[i], &y[j]);
        }
        a[(r, m)] = 1.0;
        a[(m, r)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(m + 1);
    rhs[m] = 1.0;
    let sol = a
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| a.svd(true, true).solve(&rhs, 1e-14).unwrap_or(rhs.clone()));
    sol.iter().take(m).copied().collect()
}

fn combine(y: &[Vec<f64>], active: &[usize], lambda: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; y[active[0]].len()];
    for (&i, &l) in active.iter().zip(lambda) {
        for (xc, yc) in x.iter_mut().zip(&y[i]) {
            *xc += l * yc;
        }
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
