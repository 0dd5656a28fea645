use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn point_in_box(rng: &mut ChaCha8Rng, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    lower
        .iter()
        .zip(upper)
        .map(|(a, b)| if b > a { rng.gen_range(*a..*b) } else { *a })
        .collect()
}

pub(crate) fn vector_in_cube(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-radius..radius)).collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
