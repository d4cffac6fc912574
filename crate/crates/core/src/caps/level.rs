//! Level sets of v: floating bodies, wet parts, points on P(v = s) and
//! visibility within the wet part.
//!
//! v is quasi-concave (its superlevel sets, the floating bodies, are
//! convex), so it is monotone along rays leaving the centroid and unimodal
//! on segments. Both facts are still checked where they are used.

use rand::Rng;
use serde::Serialize;

use super::macbeath::u_value;
use super::minimal::{cap_volume_through, minimal_direction, v_or_zero, CapSearch};
use super::{dilate, Cap};
use crate::linalg::{dot, normalized};
use crate::polytope::Polytope;
use crate::{Error, Result, TAU_GEOM, TAU_LEVEL, TAU_V};

/// Number of samples along a segment before golden-section refinement.
pub const N_SEG: usize = 64;

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// Whether z lies in the floating body P(v ≥ t). Boundary and outside
/// points have v = 0.
pub fn floating_body_contains(p: &Polytope, z: &[f64], t: f64) -> Result<bool> {
    if !(t > 0.0) {
        return Err(Error::PreconditionViolated(format!("level must be positive, got {t}")));
    }
    Ok(v_or_zero(p, z, CapSearch::default_for(p.dim)) >= t)
}

/// v(x) ≤ t, deciding cheaply where possible: any cap through x of volume
/// at most t settles it, and so does u(x)/2 > t in the other direction,
/// since a hyperplane through x halves the symmetric region M(x, 1).
pub fn v_at_most(p: &Polytope, x: &[f64], t: f64, hints: &[&[f64]]) -> bool {
    if p.slack(x) <= TAU_GEOM {
        return true;
    }
    for h in hints {
        if cap_volume_through(p, x, h) <= t {
            return true;
        }
    }
    if p.dim >= 3 {
        if let Ok(u) = u_value(p, x) {
            if 0.5 * u > t * (1.0 + TAU_V) {
                return false;
            }
        }
    }
    v_or_zero(p, x, CapSearch::default_for(p.dim)) <= t
}

/// V(P(v ≤ s)) by plain membership sampling.
pub fn wet_part_volume<R: Rng + ?Sized>(p: &Polytope, s: f64, budget: usize, rng: &mut R) -> Result<Estimate> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::PreconditionViolated(format!("level must lie in (0,1), got {s}")));
    }
    let mut x = vec![0.0; p.dim];
    let mut hits = 0usize;
    for _ in 0..budget {
        p.sample_uniform_into(rng, &mut x);
        if v_at_most(p, &x, s, &[]) {
            hits += 1;
        }
    }
    let f = hits as f64 / budget as f64;
    Ok(Estimate { value: f * p.volume, se: (f * (1.0 - f) / budget as f64).sqrt() * p.volume })
}

/// Distance from `c` to ∂P along the unit direction `u`.
pub fn exit_distance(p: &Polytope, c: &[f64], u: &[f64]) -> f64 {
    p.facets
        .iter()
        .filter_map(|f| {
            let au = dot(&f.normal, u);
            (au > 1e-15).then(|| (f.offset - dot(&f.normal, c)) / au)
        })
        .fold(f64::INFINITY, f64::min)
}

/// The point with v = s on the ray from the centroid in direction `dir`.
pub fn boundary_point_at_level(p: &Polytope, dir: &[f64], s: f64) -> Result<Vec<f64>> {
    boundary_point_at_level_with(p, dir, s, CapSearch::default_for(p.dim), TAU_LEVEL)
}

/// As [`boundary_point_at_level`] with an explicit search and relative
/// tolerance on v.
pub fn boundary_point_at_level_with(
    p: &Polytope,
    dir: &[f64],
    s: f64,
    search: &CapSearch,
    tol: f64,
) -> Result<Vec<f64>> {
    let c = &p.centroid;
    let u = normalized(dir);
    let v = |r: f64| v_or_zero(p, &point_on(c, &u, r), search);
    let vc = v(0.0);
    if vc < s * (1.0 - tol) {
        return Err(Error::LevelNotBracketed { s, v_center: vc });
    }
    if (vc - s).abs() <= tol * s {
        return Ok(c.clone());
    }
    let rmax = exit_distance(p, c, &u);
    let r = bracketed_root(&v, s, 0.0, vc, rmax, 0.0, tol);
    let x = point_on(c, &u, r);
    if (v(r) - s).abs() <= tol * s {
        return Ok(x);
    }
    // monotonicity failed numerically: locate a crossing on a fine scan
    let n = 64;
    let mut prev = (0.0, vc);
    for k in 1..=n {
        let rk = rmax * k as f64 / n as f64;
        let vk = if k == n { 0.0 } else { v(rk) };
        if prev.1 >= s && vk < s {
            let r = bracketed_root(&v, s, prev.0, prev.1, rk, vk, tol);
            return Ok(point_on(c, &u, r));
        }
        prev = (rk, vk);
    }
    Ok(x)
}

fn point_on(c: &[f64], u: &[f64], r: f64) -> Vec<f64> {
    c.iter().zip(u).map(|(a, b)| a + r * b).collect()
}

/// Root of v(r) = s on [lo, hi] with v(lo) ≥ s > v(hi): regula falsi with
/// the Illinois modification, interleaved with bisection steps whenever the
/// bracket fails to halve.
fn bracketed_root(v: &dyn Fn(f64) -> f64, s: f64, mut lo: f64, vlo: f64, mut hi: f64, vhi: f64, tol: f64) -> f64 {
    let (mut flo, mut fhi) = (vlo - s, vhi - s);
    let mut side = 0i8;
    let span0 = hi - lo;
    let mut last_width = hi - lo;
    for it in 0..200 {
        let width = hi - lo;
        let bisect = it % 3 == 2 && width > 0.5 * last_width;
        if it % 3 == 2 {
            last_width = width;
        }
        let mut r = if bisect || flo == fhi { 0.5 * (lo + hi) } else { (lo * fhi - hi * flo) / (fhi - flo) };
        if !(r > lo && r < hi) {
            r = 0.5 * (lo + hi);
        }
        let fr = v(r) - s;
        if fr.abs() <= tol * s * 0.5 {
            return r;
        }
        if fr >= 0.0 {
            lo = r;
            flo = fr;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = r;
            fhi = fr;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
        if hi - lo <= 1e-16 * span0.max(1e-300) {
            break;
        }
    }
    lo
}

/// Samples of [0,1] in coarse-to-fine order: 1/2, 1/4, 3/4, 1/8, ...,
/// then the endpoints.
fn segment_order(n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n + 1);
    let mut step = n / 2;
    let mut seen = vec![false; n + 1];
    while step >= 1 {
        let mut k = step;
        while k < n {
            if !seen[k] {
                seen[k] = true;
                out.push(k);
            }
            k += step;
        }
        step /= 2;
    }
    out.push(0);
    out.push(n);
    out
}

/// max over the segment [a, b] of v is below `t`: N_SEG samples with early
/// exit, then golden-section refinement around the best sample.
pub fn segment_max_v_below(p: &Polytope, a: &[f64], b: &[f64], t: f64, search: &CapSearch) -> bool {
    let at = |s: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect() };
    let val = |s: f64| v_or_zero(p, &at(s), search);
    let n = N_SEG;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for k in segment_order(n) {
        let vk = val(k as f64 / n as f64);
        if vk >= t {
            return false;
        }
        if vk > best.0 {
            best = (vk, k);
        }
    }
    let h = 1.0 / n as f64;
    let mut lo = (best.1 as f64 * h - h).max(0.0);
    let mut hi = (best.1 as f64 * h + h).min(1.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (val(x1), val(x2));
    for _ in 0..60 {
        if f1.max(f2) >= t {
            return false;
        }
        if hi - lo < 1e-9 || (f1 - f2).abs() <= TAU_LEVEL * t * 1e-3 && hi - lo < 1e-6 {
            break;
        }
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = val(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = val(x2);
        }
    }
    f1.max(f2) < t
}

/// x ∈ S(z, T): the segment [x, z] avoids P(v ≥ T).
pub fn visible_set_contains(p: &Polytope, z: &[f64], t: f64, x: &[f64]) -> Result<bool> {
    let search = CapSearch::default_for(p.dim);
    let vz = v_or_zero(p, z, search);
    if vz > t {
        return Err(Error::PreconditionViolated(format!("v(z) = {vz} exceeds T = {t}")));
    }
    Ok(segment_max_v_below(p, z, x, t, search))
}

/// Points of P(v = t) along `n` rays from the centroid: equally spaced
/// angles in the plane, a Fibonacci sphere in d = 3, seeded Gaussian
/// directions otherwise. Empty when t is not below v(centroid).
pub fn level_points(p: &Polytope, t: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let dirs: Vec<Vec<f64>> = match p.dim {
        2 => (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        d => {
            let mut rng = crate::stream_rng(seed, 0);
            (0..n).map(|_| (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()).collect()
        }
    };
    let mut out = Vec::with_capacity(n);
    for u in dirs {
        match boundary_point_at_level(p, &u, t) {
            Ok(x) => out.push(x),
            Err(_) => return Vec::new(),
        }
    }
    out
}

/// conv of points on P(v = t'), t' slightly above t: membership certifies
/// v > t because floating bodies are convex.
#[derive(Debug, Clone)]
pub struct DryCertificate {
    pub level: f64,
    hull: Option<crate::hull::HullComplex>,
    polygon: Option<crate::hull::ConvexPolygon>,
}

impl DryCertificate {
    pub fn new(p: &Polytope, t: f64, rays: usize, seed: u64) -> Self {
        let pts = level_points(p, t * (1.0 + 4.0 * TAU_LEVEL), rays, seed);
        let hull = (pts.len() > p.dim).then(|| crate::hull::convex_hull(&pts)).filter(|h| !h.degenerate);
        let polygon = hull.as_ref().and_then(|h| {
            let flat: Vec<f64> = pts.iter().flatten().copied().collect();
            crate::hull::ConvexPolygon::from_hull(h, &flat)
        });
        DryCertificate { level: t, hull, polygon }
    }

    pub fn is_empty(&self) -> bool {
        self.hull.is_none()
    }

    /// x certainly lies in P(v > level).
    #[inline]
    pub fn certifies(&self, x: &[f64]) -> bool {
        match &self.polygon {
            Some(poly) => poly.contains_within(x, 0.0),
            None => self.hull.as_ref().is_some_and(|h| h.contains_within(x, 0.0)),
        }
    }
}

/// β = 2e·d³ + 1.
pub fn superset_beta(d: usize) -> f64 {
    2.0 * std::f64::consts::E * (d as f64).powi(3) + 1.0
}

/// The cap C^{βT/v(z)}(z) containing S(z, T).
pub fn visibility_superset(p: &Polytope, z: &[f64], t: f64) -> Result<Cap> {
    if p.slack(z) <= TAU_GEOM {
        return Err(Error::BoundaryPoint);
    }
    let search = CapSearch::default_for(p.dim);
    let (vz, u) = minimal_direction(p, z, search, &[]);
    if vz >= 0.5 * p.volume || vz > t {
        return Err(Error::PreconditionViolated(format!("need v(z) < 1/2 and v(z) ≤ T, got v(z) = {vz}, T = {t}")));
    }
    let cap = Cap::through(p, &u, z, vz);
    dilate(p, &cap, superset_beta(p.dim) * t / vz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::builtin;

    #[test]
    fn level_points_on_square() {
        let p = builtin("cube", 2).unwrap();
        let x = boundary_point_at_level(&p, &[1.0, 0.0], 0.25).unwrap();
        assert!((x[0] - 0.75).abs() < 1e-6 && (x[1] - 0.5).abs() < 1e-12, "{x:?}");
        let x = boundary_point_at_level(&p, &[1.0, 1.0], 1.0 / 32.0).unwrap();
        assert!((x[0] - 0.875).abs() < 1e-6 && (x[1] - 0.875).abs() < 1e-6, "{x:?}");
        let x = boundary_point_at_level(&p, &[0.3, 1.0], 0.5).unwrap();
        assert_eq!(x, p.centroid);
    }

    #[test]
    fn visibility_examples() {
        let p = builtin("cube", 2).unwrap();
        assert!(!visible_set_contains(&p, &[0.125, 0.125], 0.05, &[0.875, 0.875]).unwrap());
        assert!(visible_set_contains(&p, &[0.125, 0.125], 0.05, &[0.125, 0.0625]).unwrap());
        assert!(visible_set_contains(&p, &[0.125, 0.125], 0.05, &[0.125, 0.125]).unwrap());
    }

    #[test]
    fn floating_body_examples() {
        let p = builtin("cube", 2).unwrap();
        assert!(floating_body_contains(&p, &[0.5, 0.5], 0.4).unwrap());
        assert!(!floating_body_contains(&p, &[0.125, 0.125], 0.05).unwrap());
        assert!(floating_body_contains(&p, &[0.125, 0.125], 1.0 / 64.0).unwrap());
    }

    #[test]
    fn order_covers_all_samples() {
        let mut o = segment_order(64);
        assert_eq!(o[0], 32);
        o.sort_unstable();
        assert_eq!(o, (0..=64).collect::<Vec<_>>());
    }
}
