mod common;

use common::runner;
use polylab::stats::{
    ks_normal, mean, rinott_bound, run_experiment, summary_json, variance, write_records_csv, ExperimentConfig,
};
use polylab::stream_rng;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn rinott_bound_is_monotone() {
    runner(2000)
        .run(
            &(1usize..10_000, 0usize..200, 1e-6f64..10.0, 1e-6f64..10.0, 1usize..100, 1.0f64..4.0),
            |(v, d, m, sigma, dv, scale)| {
                let b = rinott_bound(v, d, m, sigma).unwrap();
                prop_assert!(b >= 0.0);
                prop_assert!(rinott_bound(v + dv, d, m, sigma).unwrap() >= b);
                prop_assert!(rinott_bound(v, d + dv, m, sigma).unwrap() >= b);
                prop_assert!(rinott_bound(v, d, m * scale, sigma).unwrap() >= b);
                prop_assert!(rinott_bound(v, d, m, sigma * scale).unwrap() <= b);
                // only M/σ matters
                let same = rinott_bound(v, d, m * scale, sigma * scale).unwrap();
                prop_assert!((same - b).abs() <= 1e-12 * b.max(1.0));
                Ok(())
            },
        )
        .unwrap();
    assert!(rinott_bound(10, 1, 1.0, 0.0).is_err());
    assert!(rinott_bound(10, 1, 1.0, f64::NAN).is_err());
}

#[test]
fn ks_distance_is_affine_invariant() {
    runner(500)
        .run(&(any::<u64>(), 2usize..500, -1e3f64..1e3, 1e-3f64..1e3), |(seed, n, shift, scale)| {
            let mut rng = stream_rng(seed, 0);
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3)).collect();
            let ys: Vec<f64> = xs.iter().map(|x| shift + scale * x).collect();
            let (a, b) = (ks_normal(&xs).unwrap(), ks_normal(&ys).unwrap());
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            prop_assert!(a > 0.0 && a < 1.0);
            Ok(())
        })
        .unwrap();
}

/// The KS statistic from the empirical CDF evaluated just before and at
/// every order statistic, against an erf-free normal CDF by quadrature.
#[test]
fn ks_distance_matches_direct_computation() {
    fn normal_cdf(x: f64) -> f64 {
        // Simpson on [0, |x|] of the density, plus one half
        let n = 2000;
        let h = x.abs() / n as f64;
        let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(0.0) + f(x.abs());
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let half = s * h / 3.0;
        if x >= 0.0 { 0.5 + half } else { 0.5 - half }
    }
    for seed in 0..20u64 {
        let mut rng = stream_rng(seed, 1);
        let xs: Vec<f64> = (0..(50 + 30 * seed as usize)).map(|_| rng.random::<f64>() + rng.random::<f64>()).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
        let mut z: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
        z.sort_by(f64::total_cmp);
        let n = z.len() as f64;
        let direct = z
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = normal_cdf(x);
                ((i + 1) as f64 / n - f).abs().max((f - i as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        let ks = ks_normal(&xs).unwrap();
        assert!((ks - direct).abs() < 1e-9, "seed {seed}: {ks} vs {direct}");
    }
}

#[test]
fn ks_distance_of_normal_samples_is_small() {
    let mut over = 0;
    for seed in 0..100u64 {
        let mut rng = stream_rng(seed, 2);
        let xs: Vec<f64> = (0..400).map(|_| rng.sample(StandardNormal)).collect();
        // estimated parameters make the plain Kolmogorov quantile conservative
        if ks_normal(&xs).unwrap() * 20.0 > 1.63 {
            over += 1;
        }
    }
    assert!(over <= 3, "{over} of 100 over the 99% quantile");
}

/// mean(1 − V) and 1 − mean(V) agree up to rounding.
#[test]
fn missed_volume_mean_matches_volume_mean() {
    runner(500)
        .run(&(any::<u64>(), 2usize..3000), |(seed, n)| {
            let mut rng = stream_rng(seed, 3);
            let vs: Vec<f64> = (0..n).map(|_| 1.0 - 1e-3 * rng.random::<f64>()).collect();
            let missed: Vec<f64> = vs.iter().map(|v| 1.0 - v).collect();
            let gap = (mean(&missed) - (1.0 - mean(&vs))).abs();
            prop_assert!(gap <= 64.0 * f64::EPSILON, "{gap}");
            prop_assert!((variance(&missed) - variance(&vs)).abs() <= 1e-12 * variance(&vs).max(1e-300) + 1e-18);
            Ok(())
        })
        .unwrap();
}

fn small_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"polytope": "simplex:2", "etas": [500, 2000], "replications": 24, "seed": {seed},
            "constants": {{"mode": "desk", "alpha_desk": 12.0, "beta_desk": 4.0}}}}"#
    ))
    .unwrap()
}

#[test]
fn experiment_output_does_not_depend_on_threads() {
    let config = small_config(7);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let out = pool.install(|| run_experiment(&config)).unwrap();
        assert!(out.error.is_none());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        write_records_csv(&path, 2, &out.records).unwrap();
        (summary_json(&out.summary), std::fs::read(&path).unwrap())
    };
    let (s1, c1) = run(1);
    let (s4, c4) = run(4);
    assert_eq!(s1, s4);
    assert_eq!(c1, c4);
    assert_eq!(run(1).0, s1);
    assert_ne!(summary_json(&run_experiment(&small_config(8)).unwrap().summary), s1);
}

#[test]
fn record_file_has_one_row_per_replication() {
    let out = run_experiment(&small_config(9)).unwrap();
    assert_eq!(out.records.len(), 48);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_records_csv(&path, 2, &out.records).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    let header = rd.headers().unwrap().clone();
    assert_eq!(&header[0], "eta");
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 48);
    assert!(rows.iter().all(|r| r.len() == header.len()));
    for (row, rec) in rows.iter().zip(&out.records) {
        assert_eq!(row[3].parse::<f64>().unwrap(), rec.volume);
    }
}
