mod common;

use common::{random_polytope, runner, unit_vector, zoo};
use polylab::polytope::lattice::euler_defect;
use polylab::polytope::tightness_ok;
use polylab::{builtin, convex_hull, stream_rng, TAU_GEOM};
use proptest::prelude::*;
use rand::Rng;


/// Andrew's monotone chain; hull vertex indices in counterclockwise order,
/// collinear points dropped.
fn monotone_chain(pts: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].partial_cmp(&pts[b]).unwrap());
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    let cross = |o: usize, a: usize, b: usize| {
        (pts[a][0] - pts[o][0]) * (pts[b][1] - pts[o][1]) - (pts[a][1] - pts[o][1]) * (pts[b][0] - pts[o][0])
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], i) <= 0.0 {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], i) <= 0.0 {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Signed distance of x beyond the edges of a counterclockwise polygon;
/// at most 0 inside.
fn outside_by(pts: &[[f64; 2]], ring: &[usize], x: [f64; 2]) -> f64 {
    (0..ring.len())
        .map(|k| {
            let (a, b) = (pts[ring[k]], pts[ring[(k + 1) % ring.len()]]);
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            -(ex * (x[1] - a[1]) - ey * (x[0] - a[0])) / ex.hypot(ey)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn random_cloud(seed: u64, d: usize, n: usize) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 0);
    match seed % 3 {
        // uniform square
        0 => (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect(),
        // points on a sphere, all of them vertices
        1 => (0..n).map(|_| unit_vector(d, &mut rng)).collect(),
        // Gaussian
        _ => (0..n).map(|_| (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()).collect(),
    }
}

#[test]
fn planar_hull_matches_monotone_chain() {
    runner(1000)
        .run(&(any::<u64>(), 3usize..=200), |(seed, n)| {
            let pts = random_cloud(seed, 2, n);
            let h = convex_hull(&pts);
            let arr: Vec<[f64; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
            let ring = monotone_chain(&arr);
            let mut oracle = ring.clone();
            oracle.sort_unstable();
            // vertices found by only one side must be collinear up to the incidence tolerance
            for &i in oracle.iter().filter(|i| h.hull_vertices.binary_search(i).is_err()) {
                prop_assert!(h.contains(&pts[i]), "oracle vertex {i} outside the hull");
            }
            for &i in h.hull_vertices.iter().filter(|i| oracle.binary_search(i).is_err()) {
                prop_assert!(outside_by(&arr, &ring, arr[i]).abs() <= TAU_GEOM, "hull vertex {i} off the oracle boundary");
            }
            prop_assert!(h.f_vector[0] <= n);
            prop_assert_eq!(euler_defect(&h.f_vector), 0);
            Ok(())
        })
        .unwrap();
}

#[test]
fn hull_volume_is_monotone_under_subsets() {
    runner(300)
        .run(&(any::<u64>(), 2usize..=3, 8usize..=120, any::<u64>()), |(seed, d, n, mask_seed)| {
            let pts = random_cloud(seed, d, n);
            let mut rng = stream_rng(mask_seed, 1);
            let sub: Vec<Vec<f64>> = pts.iter().filter(|_| rng.random::<f64>() < 0.6).cloned().collect();
            let full = convex_hull(&pts);
            prop_assert!(!full.degenerate);
            prop_assert!(full.f_vector[0] <= n);
            prop_assert_eq!(euler_defect(&full.f_vector), 0);
            if sub.len() > d {
                let part = convex_hull(&sub);
                prop_assert!(part.volume <= full.volume * (1.0 + 1e-12), "{} > {}", part.volume, full.volume);
            }
            Ok(())
        })
        .unwrap();
}

/// Hull volume against the hit rate of uniform points in the bounding box.
#[test]
fn hull_volume_matches_monte_carlo() {
    for seed in 0..12u64 {
        let d = 2 + (seed % 2) as usize;
        let pts = random_cloud(seed, d, 40);
        let h = convex_hull(&pts);
        let lo: Vec<f64> = (0..d).map(|k| pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..d).map(|k| pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let boxv: f64 = (0..d).map(|k| hi[k] - lo[k]).product();
        let mut rng = stream_rng(seed, 2);
        let n = 40_000;
        let hits = (0..n)
            .filter(|_| {
                let x: Vec<f64> = (0..d).map(|k| lo[k] + (hi[k] - lo[k]) * rng.random::<f64>()).collect();
                h.contains(&x)
            })
            .count();
        let f = hits as f64 / n as f64;
        let se = (f * (1.0 - f) / n as f64).sqrt() * boxv;
        assert!((f * boxv - h.volume).abs() <= 3.0 * se + 1e-12, "seed {seed}: {} vs {}", f * boxv, h.volume);
    }
}

#[test]
fn generated_polytopes_are_consistent() {
    for p in zoo() {
        assert!(tightness_ok(p));
        assert_eq!(p.lattice.euler_defect(), 0);
    }
    for seed in 10..60u64 {
        let p = random_polytope(seed, 2 + (seed % 2) as usize, 5 + (seed % 17) as usize);
        assert!(tightness_ok(&p), "seed {seed}");
        assert_eq!(p.lattice.euler_defect(), 0, "seed {seed}");
    }
}

#[test]
fn cube_flag_counts() {
    for (d, f) in [(2usize, 8u64), (3, 48), (4, 384)] {
        let p = builtin("cube", d).unwrap();
        assert_eq!(p.flag_count(), f);
        assert_eq!(f, (1u64 << d) * (1..=d as u64).product::<u64>());
    }
}

#[test]
fn support_is_sublinear() {
    runner(1000)
        .run(&(0..zoo().len(), any::<u64>(), 0.01f64..10.0), |(k, seed, scale)| {
            let p = &zoo()[k];
            let mut rng = stream_rng(seed, 3);
            let u = unit_vector(p.dim, &mut rng);
            let v: Vec<f64> = unit_vector(p.dim, &mut rng).iter().map(|x| x * scale).collect();
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            prop_assert!(p.support(&w) <= p.support(&u) + p.support(&v) + 1e-12);
            Ok(())
        })
        .unwrap();
}

/// Chi-square of uniform samples over a 4×4 grid of boxes (4×4×4 in d = 3),
/// expected counts from exact clipped volumes.
#[test]
fn uniform_sampling_passes_chi_square() {
    for name in ["simplex", "cross-polytope", "cube"] {
        for d in [2usize, 3] {
            let p = builtin(name, d).unwrap();
            let lo: Vec<f64> = (0..d).map(|k| p.vertices.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min)).collect();
            let hi: Vec<f64> = (0..d).map(|k| p.vertices.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
            let g = 4usize;
            let cells = g.pow(d as u32);
            let mut expected = vec![0.0; cells];
            for (c, e) in expected.iter_mut().enumerate() {
                // box ∩ P through halfspaces: P's facets plus the box walls
                let mut normals: Vec<Vec<f64>> = p.facets.iter().map(|f| f.normal.clone()).collect();
                let mut offsets: Vec<f64> = p.facets.iter().map(|f| f.offset).collect();
                let mut idx = c;
                for k in 0..d {
                    let i = idx % g;
                    idx /= g;
                    let w = (hi[k] - lo[k]) / g as f64;
                    let mut n = vec![0.0; d];
                    n[k] = 1.0;
                    normals.push(n.clone());
                    offsets.push(lo[k] + w * (i + 1) as f64);
                    n[k] = -1.0;
                    normals.push(n);
                    offsets.push(-(lo[k] + w * i as f64));
                }
                *e = box_volume(&normals, &offsets, d) / p.volume;
            }
            let n = 50_000;
            let mut counts = vec![0usize; cells];
            let mut rng = stream_rng(11, d as u64);
            for _ in 0..n {
                let x = p.sample_uniform(&mut rng);
                let mut c = 0;
                for k in (0..d).rev() {
                    let i = (((x[k] - lo[k]) / (hi[k] - lo[k]) * g as f64) as usize).min(g - 1);
                    c = c * g + i;
                }
                counts[c] += 1;
            }
            let mut chi2 = 0.0;
            let mut dof = 0;
            for (o, e) in counts.iter().zip(&expected) {
                let e = e * n as f64;
                if e > 5.0 {
                    chi2 += (*o as f64 - e).powi(2) / e;
                    dof += 1;
                } else {
                    assert!(*o as f64 <= e + 5.0 * e.sqrt() + 5.0);
                }
            }
            // 99.9% quantile by the Wilson–Hilferty approximation
            let k = (dof - 1) as f64;
            let q = k * (1.0 - 2.0 / (9.0 * k) + 3.09 * (2.0 / (9.0 * k)).sqrt()).powi(3);
            assert!(chi2 < q, "{name}:{d} chi2 {chi2} over {q}");
        }
    }
}

/// Volume of {a_i·x ≤ b_i}, 0 when it has no interior. The interior point
/// is the Chebyshev center.
fn box_volume(normals: &[Vec<f64>], offsets: &[f64], d: usize) -> f64 {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<_> = (0..d).map(|_| lp.add_var(0.0, (-10.0, 10.0))).collect();
    let r = lp.add_var(1.0, (0.0, 10.0));
    for (a, &b) in normals.iter().zip(offsets) {
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut row: Vec<_> = xs.iter().copied().zip(a.iter().copied()).collect();
        row.push((r, norm));
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, b);
    }
    let Ok(out) = lp.solve() else { return 0.0 };
    let Some(sol) = out.solution() else { return 0.0 };
    if sol.objective() < 1e-9 {
        return 0.0;
    }
    let c: Vec<f64> = xs.iter().map(|&x| sol[x]).collect();
    polylab::Polytope::from_halfspaces(normals, offsets, &c).map(|q| q.volume).unwrap()
}
