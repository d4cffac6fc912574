//! The minimal cap through a point: v(z) = min over half-spaces H ∋ z of
//! V(P ∩ H).
//!
//! In the plane the cut area A(θ) of the chord through z with direction θ
//! has derivative (r₁² − r₂²)/2, where r₁, r₂ are the distances from z to
//! the two chord ends. A is C¹ on the circle, so its minimum sits on a chord
//! with midpoint z, and those chords are found exactly by intersecting the
//! boundary with its reflection through z. In higher dimension a
//! quasi-uniform direction grid seeds Nelder-Mead runs on the sphere.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::volume::{polygon_clip_area, slice_volume_with_apex};
use super::Cap;
use crate::linalg::{dot, norm, normalized, orthonormal_basis};
use crate::polytope::Polytope;
use crate::{Error, Result, TAU_GEOM, TAU_V};

/// Parameters of the direction search.
#[derive(Debug, Clone)]
pub struct CapSearch {
    pub dim: usize,
    pub n_dir: usize,
    pub k_seed: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Use the exact midpoint-chord solver in the plane.
    pub exact_planar: bool,
    grid: Vec<f64>,
}

impl CapSearch {
    /// Grid + Nelder-Mead search: 512 directions in the plane, 2048 on S²,
    /// 4096 seeded Gaussian directions above.
    pub fn grid(dim: usize) -> Self {
        let n_dir = match dim {
            2 => 512,
            3 => 2048,
            _ => 4096,
        };
        Self::with_size(dim, n_dir)
    }

    pub fn with_size(dim: usize, n_dir: usize) -> Self {
        let grid = direction_grid(dim, n_dir);
        CapSearch { dim, n_dir, k_seed: 8, tol: TAU_V, max_iter: 400, exact_planar: false, grid }
    }

    /// Default search for `dim`: exact in the plane, grid search otherwise.
    pub fn default_for(dim: usize) -> &'static CapSearch {
        static CACHE: [OnceLock<CapSearch>; 9] = [const { OnceLock::new() }; 9];
        CACHE[dim].get_or_init(|| {
            let mut s = CapSearch::grid(dim);
            s.exact_planar = dim == 2;
            s
        })
    }

    pub fn directions(&self) -> impl Iterator<Item = &[f64]> {
        self.grid.chunks_exact(self.dim)
    }
}

fn direction_grid(dim: usize, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * dim);
    match dim {
        2 => {
            for k in 0..n {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                out.extend_from_slice(&[t.cos(), t.sin()]);
            }
        }
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for k in 0..n {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * k as f64;
                out.extend_from_slice(&[r * phi.cos(), r * phi.sin(), z]);
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + dim as u64);
            for _ in 0..n {
                let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                out.extend(normalized(&g));
            }
        }
    }
    out
}

/// Result of a minimal-cap search.
#[derive(Debug, Clone)]
pub struct MinimalCapResult {
    pub value: f64,
    pub cap: Cap,
    pub direction_grid_size: usize,
}

/// Volume of the cap with inner normal direction `u` whose bounding
/// hyperplane passes through `z`.
#[inline]
pub fn cap_volume_through(p: &Polytope, z: &[f64], u: &[f64]) -> f64 {
    slice_volume_with_apex(p, u, dot(u, z), z)
}

/// Minimal cap through an interior point.
pub fn minimal_cap(p: &Polytope, z: &[f64], search: &CapSearch) -> Result<MinimalCapResult> {
    minimal_cap_hinted(p, z, search, &[])
}

/// Minimal cap search with extra seed directions (tried before the grid).
pub fn minimal_cap_hinted(
    p: &Polytope,
    z: &[f64],
    search: &CapSearch,
    hints: &[Vec<f64>],
) -> Result<MinimalCapResult> {
    if p.slack(z) <= TAU_GEOM {
        return Err(Error::BoundaryPoint);
    }
    let (value, u) = minimal_direction(p, z, search, hints);
    let cap = Cap::through(p, &u, z, value);
    Ok(MinimalCapResult { value, cap, direction_grid_size: if search.exact_planar { 0 } else { search.n_dir } })
}

/// (v(z), minimizing direction) for interior z.
pub fn minimal_direction(p: &Polytope, z: &[f64], search: &CapSearch, hints: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let (mut best, mut best_u) = if p.dim == 2 && search.exact_planar {
        planar_exact(p, z)
    } else {
        grid_search(p, z, search)
    };
    for h in hints {
        let u = normalized(h);
        let v = cap_volume_through(p, z, &u);
        if v < best {
            best = v;
            best_u = u;
        }
    }
    (best, best_u)
}

/// v(z) with 0 on the boundary and outside P.
pub fn v_or_zero(p: &Polytope, z: &[f64], search: &CapSearch) -> f64 {
    if p.slack(z) <= TAU_GEOM {
        return 0.0;
    }
    minimal_direction(p, z, search, &[]).0
}

/// Exact planar solver over midpoint chords.
fn planar_exact(p: &Polytope, z: &[f64]) -> (f64, Vec<f64>) {
    let poly = p.polygon();
    let n = poly.len();
    let total = p.volume;
    let mut best = f64::INFINITY;
    let mut best_u = vec![1.0, 0.0];
    let consider = |q: [f64; 2], best: &mut f64, best_u: &mut Vec<f64>| {
        let w = [q[0] - z[0], q[1] - z[1]];
        let l = (w[0] * w[0] + w[1] * w[1]).sqrt();
        if l < 1e-300 {
            return;
        }
        let u = [-w[1] / l, w[0] / l];
        let c = u[0] * z[0] + u[1] * z[1];
        let a = polygon_clip_area(poly, &u, c);
        let (v, dir) = if a <= total - a { (a, u) } else { (total - a, [-u[0], -u[1]]) };
        if v < *best {
            *best = v;
            *best_u = dir.to_vec();
        }
    };
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        for j in 0..n {
            // reflected edge 2z − e_j
            let c0 = [2.0 * z[0] - poly[j][0], 2.0 * z[1] - poly[j][1]];
            let c1 = [2.0 * z[0] - poly[(j + 1) % n][0], 2.0 * z[1] - poly[(j + 1) % n][1]];
            for q in segment_intersections(a, b, c0, c1) {
                consider(q, &mut best, &mut best_u);
            }
        }
        consider(a, &mut best, &mut best_u);
    }
    (best, best_u)
}

/// Intersection points of two closed segments; for collinear overlaps the
/// overlap endpoints.
fn segment_intersections(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Vec<[f64; 2]> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let cross = |x: [f64; 2], y: [f64; 2]| x[0] * y[1] - x[1] * y[0];
    let rxs = cross(r, s);
    let qp = [c[0] - a[0], c[1] - a[1]];
    let scale = (r[0].abs() + r[1].abs()) * (s[0].abs() + s[1].abs());
    if rxs.abs() > 1e-14 * scale {
        let t = cross(qp, s) / rxs;
        let u = cross(qp, r) / rxs;
        let e = 1e-12;
        if (-e..=1.0 + e).contains(&t) && (-e..=1.0 + e).contains(&u) {
            let t = t.clamp(0.0, 1.0);
            return vec![[a[0] + t * r[0], a[1] + t * r[1]]];
        }
        return Vec::new();
    }
    // parallel: collinear overlap only
    if cross(qp, r).abs() > 1e-12 * (r[0].abs() + r[1].abs()).max(1e-300) {
        return Vec::new();
    }
    let rr = r[0] * r[0] + r[1] * r[1];
    if rr == 0.0 {
        return Vec::new();
    }
    let t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr;
    let t1 = ((d[0] - a[0]) * r[0] + (d[1] - a[1]) * r[1]) / rr;
    let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
    if lo > hi {
        return Vec::new();
    }
    vec![[a[0] + lo * r[0], a[1] + lo * r[1]], [a[0] + hi * r[0], a[1] + hi * r[1]]]
}

/// Grid of directions followed by Nelder-Mead from the best `k_seed`.
fn grid_search(p: &Polytope, z: &[f64], search: &CapSearch) -> (f64, Vec<f64>) {
    let d = p.dim;
    let mut scored: Vec<(f64, usize)> =
        search.directions().enumerate().map(|(i, u)| (cap_volume_through(p, z, u), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    // seeds come from the front of the ranking; sorting all of it is wasted work
    let keep = (16 * search.k_seed).max(1);
    if scored.len() > keep {
        scored.select_nth_unstable_by(keep, cmp);
        scored.truncate(keep);
    }
    scored.sort_by(cmp);
    let step = match d {
        2 => std::f64::consts::TAU / search.n_dir as f64,
        _ => (4.0 * std::f64::consts::PI / search.n_dir as f64).sqrt(),
    };
    let mut best = scored[0].0;
    let mut best_u = search.grid[scored[0].1 * d..(scored[0].1 + 1) * d].to_vec();
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for &(_, i) in &scored {
        if seeds.len() >= search.k_seed {
            break;
        }
        let u = &search.grid[i * d..(i + 1) * d];
        if seeds.iter().any(|s| dot(s, u) > (1.5 * step).cos()) {
            continue;
        }
        seeds.push(u.to_vec());
    }
    for s in seeds {
        let (v, u) = nelder_mead_sphere(p, z, &s, step, search);
        if v < best {
            best = v;
            best_u = u;
        }
    }
    (best, best_u)
}

fn nelder_mead_sphere(p: &Polytope, z: &[f64], u0: &[f64], step: f64, search: &CapSearch) -> (f64, Vec<f64>) {
    let d = p.dim;
    let m = d - 1;
    // tangent basis at u0
    let mut vecs = vec![u0.to_vec()];
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        vecs.push(e);
    }
    let basis = orthonormal_basis(&vecs, 1e-9);
    let tangent: Vec<Vec<f64>> = basis[1..].to_vec();
    let to_u = |y: &[f64]| -> Vec<f64> {
        let mut u = u0.to_vec();
        for (j, t) in tangent.iter().enumerate() {
            for k in 0..d {
                u[k] += y[j] * t[k];
            }
        }
        let n = norm(&u);
        u.iter().map(|x| x / n).collect()
    };
    let f = |y: &[f64]| cap_volume_through(p, z, &to_u(y));

    let mut simplex: Vec<Vec<f64>> = vec![vec![0.0; m]];
    for j in 0..m {
        let mut y = vec![0.0; m];
        y[j] = step;
        simplex.push(y);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|y| f(y)).collect();
    for _ in 0..search.max_iter {
        let mut idx: Vec<usize> = (0..=m).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let spread = vals[m] - vals[0];
        let size = simplex[1..].iter().map(|y| y.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if spread <= search.tol * vals[0].abs().max(1e-300) * 0.1 && size < 1e-7 || size < 1e-12 {
            break;
        }
        let mut centroid = vec![0.0; m];
        for y in &simplex[..m] {
            for j in 0..m {
                centroid[j] += y[j] / m as f64;
            }
        }
        let lerp = |t: f64| -> Vec<f64> { (0..m).map(|j| centroid[j] + t * (simplex[m][j] - centroid[j])).collect() };
        let xr = lerp(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = lerp(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[m] = xe;
                vals[m] = fe;
            } else {
                simplex[m] = xr;
                vals[m] = fr;
            }
        } else if fr < vals[m - 1] {
            simplex[m] = xr;
            vals[m] = fr;
        } else {
            let (xc, fc) = if fr < vals[m] {
                let x = lerp(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = lerp(0.5);
                let v = f(&x);
                (x, v)
            };
            if fc < vals[m].min(fr) {
                simplex[m] = xc;
                vals[m] = fc;
            } else {
                for i in 1..=m {
                    simplex[i] = (0..m).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
                    vals[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut bi = 0;
    for i in 1..=m {
        if vals[i] < vals[bi] {
            bi = i;
        }
    }
    (vals[bi], to_u(&simplex[bi]))
}
