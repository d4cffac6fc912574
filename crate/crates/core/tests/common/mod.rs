#![allow(dead_code)]

use std::sync::OnceLock;

use polylab::{builtin, stream_rng, Polytope};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::Rng;
use rand_distr::StandardNormal;

/// Built-ins plus a few seeded random polytopes in d = 2, 3.
pub fn zoo() -> &'static [Polytope] {
    static ZOO: OnceLock<Vec<Polytope>> = OnceLock::new();
    ZOO.get_or_init(|| {
        let mut v = vec![
            builtin("cube", 2).unwrap(),
            builtin("simplex", 2).unwrap(),
            builtin("cube", 3).unwrap(),
            builtin("simplex", 3).unwrap(),
            builtin("cross-polytope", 3).unwrap(),
        ];
        for (seed, d, n) in [(1, 2, 9), (2, 2, 6), (3, 3, 14), (4, 3, 9)] {
            v.push(random_polytope(seed, d, n));
        }
        v
    })
}

/// Hull of n Gaussian directions pushed onto spheres of random radius.
pub fn random_polytope(seed: u64, d: usize, n: usize) -> Polytope {
    let mut rng = stream_rng(seed, 99);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let r = (0.6 + 0.4 * rng.random::<f64>()) / g.iter().map(|x| x * x).sum::<f64>().sqrt();
            g.iter().map(|x| x * r).collect()
        })
        .collect();
    Polytope::build_from_vertices(&pts).unwrap()
}

pub fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    g.iter().map(|x| x / n).collect()
}

/// a ≤ b up to relative TAU_VOL plus a tiny absolute slack.
pub fn le(a: f64, b: f64) -> bool {
    a <= b + polylab::TAU_VOL * a.abs().max(b.abs()) + 1e-15
}

/// Proptest runner with a fixed seed, so every run checks the same cases.
pub fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}
