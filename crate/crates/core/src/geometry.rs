//! The two-region geometry `Ω₁ = {x_N > 0}`, `Ω₂ = {x_N < 0}`, `H = {x_N = 0}`.
//!
//! `n₁ = -e_N` and `n₂ = +e_N` are the outward unit normals of `Ω₁` and `Ω₂`,
//! so the gradient of the signed distance is `e_N = -n₁ = n₂`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lipschitz constant of the interface normal. Zero because `H` is flat.
pub const NORMAL_LIPSCHITZ: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Omega1,
    Omega2,
    Interface,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Omega1 => "omega1",
            Region::Omega2 => "omega2",
            Region::Interface => "interface",
        }
    }
}

/// Signed distance to `H`, positive in `Ω₁`.
#[inline]
pub fn signed_distance(x: &[f64]) -> f64 {
    *x.last().expect("points have at least one coordinate")
}

pub fn classify(x: &[f64], tol: f64) -> Region {
    let d = signed_distance(x);
    if d.abs() <= tol {
        Region::Interface
    } else if d > tol {
        Region::Omega1
    } else {
        Region::Omega2
    }
}

/// Outward unit normal of a side region, as a vector of length `dim`.
pub fn normal(region: Region, dim: usize) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let mut n = vec![0.0; dim];
    match region {
        Region::Omega1 => n[dim - 1] = -1.0,
        Region::Omega2 => n[dim - 1] = 1.0,
        Region::Interface => {
            return Err(Error::invalid("the interface has no outward normal of its own"))
        }
    }
    Ok(n)
}

/// `v · n₁`.
#[inline]
pub fn dot_n1(v: &[f64]) -> f64 {
    -signed_distance(v)
}

/// `v · n₂`.
#[inline]
pub fn dot_n2(v: &[f64]) -> f64 {
    signed_distance(v)
}

/// Default interface tolerance: `1e-9` times the diameter of the box.
pub fn default_tolerance(lower: &[f64], upper: &[f64]) -> f64 {
    let diam = lower
        .iter()
        .zip(upper)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    1e-9 * diam.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_distance_is_last_coordinate() {
        assert_eq!(signed_distance(&[0.3, 0.7]), 0.7);
        assert_eq!(signed_distance(&[1.0, 0.0]), 0.0);
        assert_eq!(signed_distance(&[0.0, -2.5]), -2.5);
    }

    #[test]
    fn classification_respects_tolerance() {
        assert_eq!(classify(&[0.0, 1e-12], 1e-9), Region::Interface);
        assert_eq!(classify(&[0.0, 0.5], 1e-9), Region::Omega1);
        assert_eq!(classify(&[0.0, -0.5], 1e-9), Region::Omega2);
        assert_eq!(classify(&[0.0, 0.0], 0.0), Region::Interface);
    }

    #[test]
    fn normals_point_out_of_each_side() {
        assert_eq!(normal(Region::Omega1, 2).unwrap(), vec![0.0, -1.0]);
        assert_eq!(normal(Region::Omega2, 2).unwrap(), vec![0.0, 1.0]);
        assert_eq!(normal(Region::Omega1, 1).unwrap(), vec![-1.0]);
        assert!(normal(Region::Interface, 2).is_err());
        let n1 = normal(Region::Omega1, 3).unwrap();
        let n2 = normal(Region::Omega2, 3).unwrap();
        let dot: f64 = n1.iter().zip(&n2).map(|(a, b)| a * b).sum();
        assert_eq!(dot, -1.0);
    }

    #[test]
    fn normal_projections_agree_with_vectors() {
        let v = [0.4, -0.25];
        let n1 = normal(Region::Omega1, 2).unwrap();
        let n2 = normal(Region::Omega2, 2).unwrap();
        assert_eq!(dot_n1(&v), v[0] * n1[0] + v[1] * n1[1]);
        assert_eq!(dot_n2(&v), v[0] * n2[0] + v[1] * n2[1]);
    }

    proptest::proptest! {
        #[test]
        fn omega1_iff_positive_distance(x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let p = [x, y];
            proptest::prop_assert_eq!(classify(&p, 0.0) == Region::Omega1, signed_distance(&p) > 0.0);
        }
    }
}
