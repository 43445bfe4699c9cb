//! Seeded point sets for the condition checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankwave::catalog::FamilySpec;

/// A spacetime point with the invariants the conditions are evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct SeededPoint {
    pub x: [f64; 4],
    pub r: Vec<f64>,
}

/// `n` points drawn uniformly from the family window. The invariants come
/// from solving at the point; where the solver fails, or its invariants do
/// not match the superposition's wave count, they are drawn from
/// `[-1, 1]^k` instead.
pub fn seeded_points(family: &FamilySpec, waves: usize, n: usize, seed: u64) -> Vec<SeededPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = family.window;
    (0..n)
        .map(|_| {
            let t = rng.gen_range(w.t.0..=w.t.1);
            let xs: [f64; 3] = std::array::from_fn(|i| rng.gen_range(w.x[i].0..=w.x[i].1));
            let x = [t, xs[0], xs[1], xs[2]];
            let r = match family.evaluate(t, xs, None) {
                Ok(p) if p.r.len() == waves => p.r,
                _ => (0..waves).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            };
            SeededPoint { x, r }
        })
        .collect()
}

/// `n` states with `a ∈ [0.5, 2]` and `u ∈ [-1, 1]^3`.
pub fn seeded_states(n: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            [
                rng.gen_range(0.5..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]
        })
        .collect()
}
