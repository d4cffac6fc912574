mod common;

use common::unit_vector;
use polylab::caps::level::{boundary_point_at_level, segment_max_v_below, visible_set_contains, wet_part_volume};
use polylab::caps::minimal::CapSearch;
use polylab::covering::{cap_covering, count_z_in_cap, m_bounds, saturate, verify_covering, z_of, CapCovering};
use polylab::depgraph::t_star;
use polylab::{builtin, stream_rng, Polytope};

fn covering(p: &Polytope, s: f64, seed: u64) -> CapCovering {
    cap_covering(p, saturate(p, s, seed, 200).unwrap()).unwrap()
}

#[test]
fn triangle_covering_checks() {
    let p = builtin("simplex", 2).unwrap();
    for s in [1e-2, 1e-3] {
        let cov = covering(&p, s, 3);
        let r = verify_covering(&p, &cov, 10_000, 2.0, 3);
        assert_eq!(r.volume_bound_pass.outer_violations, 0, "s = {s}");
        assert_eq!(r.volume_bound_pass.inner_violations, 0, "s = {s}");
        assert_eq!(r.coverage_fraction, 1.0, "s = {s}");
        assert_eq!(r.claim21_fraction, 1.0, "s = {s}");
        assert_eq!(r.inner_in_wet_fraction, 1.0);
        assert_eq!(r.inner_in_cap_fraction, 1.0);
        assert_eq!(r.small_cap_fraction, 1.0);
    }
}

/// m(s) inside the volume bounds, with V(P(v ≤ s)) estimated to 2%.
#[test]
fn system_size_within_volume_bounds() {
    for (name, d, s, budget) in
        [("cube", 2, 1e-2, 40_000), ("cube", 2, 1e-3, 250_000), ("simplex", 2, 1e-3, 150_000), ("cube", 3, 1e-2, 15_000)]
    {
        let p = builtin(name, d).unwrap();
        let cov = covering(&p, s, 1);
        let wet = wet_part_volume(&p, s, budget, &mut stream_rng(2, 0)).unwrap();
        assert!(wet.se <= 0.02 * wet.value, "{name}:{d} s = {s}: se {} of {}", wet.se, wet.value);
        let (lo, hi) = m_bounds(d, wet.value, s);
        let m = cov.m() as f64;
        assert!(lo <= m && m <= hi, "{name}:{d} s = {s}: m = {m} outside [{lo}, {hi}]");
    }
}

/// m(s)/ln(1/s) and V(wet)/(s·ln(1/s)) on the square over two decades of s
/// stay inside one window [c_low, c_high·F(P)].
#[test]
fn wet_part_and_system_size_scale_together() {
    let p = builtin("cube", 2).unwrap();
    let f = p.flag_count() as f64;
    let mut m_ratio = Vec::new();
    let mut v_ratio = Vec::new();
    for (k, s) in [1e-2f64, 1e-3, 1e-4].into_iter().enumerate() {
        let l = (1.0 / s).ln();
        m_ratio.push(covering(&p, s, 5).m() as f64 / l);
        let budget = [20_000, 100_000, 600_000][k];
        let wet = wet_part_volume(&p, s, budget, &mut stream_rng(6, k as u64)).unwrap();
        v_ratio.push(wet.value / (s * l));
    }
    eprintln!("m/ln(1/s) {m_ratio:?}  V/(s ln(1/s)) {v_ratio:?}");
    let (c_low, c_high) = (0.2, 1.0);
    for r in m_ratio.iter().chain(&v_ratio) {
        assert!(*r >= c_low && *r <= c_high * f, "{r} outside [{c_low}, {}]", c_high * f);
    }
}

/// For z on P(v = s), the caps K_j^λ(T) holding z, counted against
/// F(P)·ln(T/s) for T/s from 2 to 100.
#[test]
fn caps_through_a_level_point_are_few() {
    let p = builtin("cube", 2).unwrap();
    let f = p.flag_count() as f64;
    let s = 1e-4;
    let mut rng = stream_rng(7, 0);
    let zs: Vec<Vec<f64>> = (0..40).map(|_| boundary_point_at_level(&p, &unit_vector(2, &mut rng), s).unwrap()).collect();
    let mut ratios = Vec::new();
    for r in [2.0, 10.0, 100.0] {
        let cov = covering(&p, r * s, 8);
        let worst = zs.iter().map(|z| (0..cov.m()).filter(|&j| cov.in_cap(j, z, 1.0)).count()).max().unwrap();
        ratios.push(worst as f64 / (f * f64::ln(r)));
    }
    eprintln!("caps through a level point / (F ln(T/s)): {ratios:?}");
    assert!(ratios.iter().all(|&x| x <= 2.0), "{ratios:?}");
}

/// |Z(s) ∩ S(z, T)| against F(P)·ln(T/s).
#[test]
fn visible_system_points_are_few() {
    let p = builtin("cube", 2).unwrap();
    let f = p.flag_count() as f64;
    let s = 1e-4;
    let system = saturate(&p, s, 9, 200).unwrap();
    let mut rng = stream_rng(9, 1);
    let zs: Vec<Vec<f64>> = (0..20).map(|_| boundary_point_at_level(&p, &unit_vector(2, &mut rng), s).unwrap()).collect();
    let mut ratios = Vec::new();
    for r in [2.0, 10.0, 100.0] {
        let t = r * s;
        let worst = zs
            .iter()
            .map(|z| system.points.iter().filter(|zi| visible_set_contains(&p, z, t, zi).unwrap()).count())
            .max()
            .unwrap();
        ratios.push(worst as f64 / (f * f64::ln(r)));
    }
    eprintln!("visible system points / (F ln(T/s)): {ratios:?}");
    assert!(ratios.iter().all(|&x| x <= 2.0), "{ratios:?}");
}

/// Segments [a, b] between points of P(v = s) that avoid P(v ≥ T) have
/// [z(a), z(b)] avoiding P(v ≥ T*), T* = d·6^d·T.
#[test]
fn visible_pairs_stay_visible_through_their_system_points() {
    for (name, d, s, r) in [("cube", 2, 1e-3, 4.0), ("simplex", 2, 1e-3, 4.0), ("cube", 2, 1e-4, 10.0)] {
        let p = builtin(name, d).unwrap();
        let t = r * s;
        let ts = t_star(d, t);
        let system = saturate(&p, s, 10, 200).unwrap();
        let search = CapSearch::default_for(d);
        let mut rng = stream_rng(10, 0);
        let mut checked = 0;
        let mut unsaturated = 0;
        for _ in 0..3000 {
            let u = unit_vector(d, &mut rng);
            // nearby directions, so that many segments avoid P(v ≥ T)
            let w: Vec<f64> = u.iter().zip(unit_vector(d, &mut rng)).map(|(a, b)| a + 0.3 * b).collect();
            let a = boundary_point_at_level(&p, &u, s).unwrap();
            let b = boundary_point_at_level(&p, &w, s).unwrap();
            if !segment_max_v_below(&p, &a, &b, t, search) {
                continue;
            }
            let (Some(i), Some(k)) = (z_of(&p, &system, &a), z_of(&p, &system, &b)) else {
                unsaturated += 1;
                continue;
            };
            checked += 1;
            assert!(
                segment_max_v_below(&p, &system.points[i], &system.points[k], ts, search),
                "{name}: z({a:?}) = {:?}, z({b:?}) = {:?}",
                system.points[i],
                system.points[k]
            );
            // M(z(a), 1) lies in C⁶(a)
            let ca = polylab::caps::minimal_cap(&p, &a, search).unwrap().cap;
            let m1 = polylab::caps::macbeath(&p, &system.points[i], 1.0).unwrap();
            assert!(m1.vertices.iter().all(|v| ca.dilate_contains(v, 6.0)));
        }
        assert_eq!(unsaturated, 0, "{name} s = {s}: level points whose half region meets no M(z_i, 1/2)");
        assert!(checked >= 300, "{name}: only {checked} visible pairs");
    }
}

#[test]
fn small_caps_hold_few_system_points() {
    let p = builtin("cube", 2).unwrap();
    let s = 1e-3;
    let system = saturate(&p, s, 11, 200).unwrap();
    let mut rng = stream_rng(11, 0);
    let mut worst = 0;
    for _ in 0..500 {
        if let Some(c) = polylab::covering::random_cap_with_volume(&p, 4.0 * s, &mut rng) {
            worst = worst.max(count_z_in_cap(&p, &system, &c));
        }
    }
    let f = p.flag_count() as f64;
    eprintln!("max |Z ∩ C| for V(C) = 4s: {worst}");
    assert!((worst as f64) <= f * 4f64.ln().max(1.0) * 2.0);
}
