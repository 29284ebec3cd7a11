#![allow(dead_code)]

use g2c_core::ode::{solve, AProfile, CoclosedSystem, DSolution, SolveOptions};
use g2c_core::scalar::ScalarFn;
use g2c_core::structures::ProfileSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const B0S: [f64; 6] = [0.5, -0.5, 1.0, -1.0, 2.0, -2.0];

/// `a_{i,3}` in thousandths, so the same triples can be replayed exactly.
pub fn random_cubics(n: usize, seed: u64) -> Vec<[i64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-10..=100)))
        .collect()
}

pub fn system(milli: [i64; 3], b0: f64) -> CoclosedSystem {
    let a = milli.map(|m| AProfile::odd_poly(&[0.5, m as f64 / 1000.0]));
    CoclosedSystem::new(a, b0, f64::INFINITY).unwrap()
}

pub fn solve_to(sys: &CoclosedSystem, t_max: f64) -> DSolution {
    solve(sys, &SolveOptions { t_max, ..Default::default() }).unwrap()
}

/// Profile set with polynomial coefficients: `A_i` positive, `B_i` bounded away from 0.
pub fn random_profiles(rng: &mut impl Rng) -> ProfileSet {
    let a = std::array::from_fn(|_| {
        ScalarFn::poly(vec![
            rng.gen_range(0.1..1.0),
            rng.gen_range(0.1..1.0),
            rng.gen_range(0.0..0.5),
        ])
    });
    let b = std::array::from_fn(|_| {
        ScalarFn::poly(vec![
            rng.gen_range(0.2..1.5),
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.0..0.3),
        ])
    });
    ProfileSet::new(a, b, 1.0, f64::INFINITY)
}
