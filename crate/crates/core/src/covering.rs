//! Saturated systems on a level set of v and the economic cap covering
//! built from them.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::caps::level::boundary_point_at_level;
use crate::caps::minimal::{minimal_direction, v_or_zero, CapSearch};
use crate::caps::{gauge, macbeath, macbeath_regions_intersect, make_cap, u_value, Cap, MacbeathRegion};
use crate::caps::volume::slice_volume;
use crate::hull::{convex_hull, HullComplex};
use crate::polytope::Polytope;
use crate::{stream_rng, Error, Result, TAU_GEOM, TAU_LEVEL};

/// Default number of consecutive rejected candidates before a system is
/// declared saturated.
pub const DEFAULT_PATIENCE: usize = 200;

/// Hard cap on candidates per system, far above what saturation needs.
const MAX_CANDIDATES: usize = 1_000_000;

/// Equally spaced rays tried after the random phase in the plane; they fill
/// gaps the random candidates left behind.
pub const PLANAR_SWEEP_RAYS: usize = 1024;

/// s₀ = (2d)^(−2d).
pub fn s0(d: usize) -> f64 {
    (2.0 * d as f64).powi(-2 * d as i32)
}

/// Bounds on m(s) from the usual volume arguments:
/// V(wet)/(6^d s) ≤ m ≤ V(wet)/((6d)^(−d) s).
pub fn m_bounds(d: usize, wet_volume: f64, s: f64) -> (f64, f64) {
    let d_i = d as i32;
    (wet_volume / (6f64.powi(d_i) * s), wet_volume / ((6.0 * d as f64).powi(-d_i) * s))
}

/// Points z_1..z_m on P(v = s) with pairwise disjoint M(z_i, 1/2).
#[derive(Debug, Clone, Serialize)]
pub struct SaturatedSystem {
    pub level: f64,
    pub points: Vec<Vec<f64>>,
    /// Minimal caps C(z_i).
    pub caps: Vec<Cap>,
    pub patience: usize,
    /// Consecutive rejections when the construction stopped; equals
    /// `patience` unless the candidate cap was hit.
    pub final_rejections: usize,
    pub candidates: usize,
    pub seed: u64,
}

impl SaturatedSystem {
    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn above_s0(&self, p: &Polytope) -> bool {
        self.level > s0(p.dim) * p.volume
    }
}

/// Greedy saturated system: candidates on P(v = s) along random rays from
/// the centroid, accepted when their half-scale Macbeath region misses all
/// accepted ones, until `patience` consecutive rejections. In the plane a
/// sweep over equally spaced rays follows.
pub fn saturate(p: &Polytope, s: f64, seed: u64, patience: usize) -> Result<SaturatedSystem> {
    if !(s > 0.0) {
        return Err(Error::PreconditionViolated(format!("level must be positive, got {s}")));
    }
    if patience == 0 {
        return Err(Error::PreconditionViolated("patience must be at least 1".into()));
    }
    let search = CapSearch::default_for(p.dim);
    let v_center = v_or_zero(p, &p.centroid, search);
    if v_center < s {
        return Err(Error::LevelTooHigh { s, v_max: v_center });
    }
    let mut rng = stream_rng(seed, 0);
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut caps = Vec::new();
    let mut rejections = 0;
    let mut candidates = 0;
    while rejections < patience && candidates < MAX_CANDIDATES {
        candidates += 1;
        let dir: Vec<f64> = (0..p.dim).map(|_| rng.sample(StandardNormal)).collect();
        let z = match boundary_point_at_level(p, &dir, s) {
            Ok(z) => z,
            Err(Error::LevelNotBracketed { v_center, .. }) => return Err(Error::LevelTooHigh { s, v_max: v_center }),
            Err(e) => return Err(e),
        };
        if p.slack(&z) <= TAU_GEOM || points.iter().any(|zi| macbeath_regions_intersect(p, zi, 0.5, &z, 0.5)) {
            rejections += 1;
            continue;
        }
        let (v, u) = minimal_direction(p, &z, search, &[]);
        caps.push(Cap::through(p, &u, &z, v));
        points.push(z);
        rejections = 0;
    }
    if p.dim == 2 {
        for k in 0..PLANAR_SWEEP_RAYS {
            let a = std::f64::consts::TAU * k as f64 / PLANAR_SWEEP_RAYS as f64;
            candidates += 1;
            let z = boundary_point_at_level(p, &[a.cos(), a.sin()], s)?;
            if p.slack(&z) <= TAU_GEOM || points.iter().any(|zi| macbeath_regions_intersect(p, zi, 0.5, &z, 0.5)) {
                continue;
            }
            let (v, u) = minimal_direction(p, &z, search, &[]);
            caps.push(Cap::through(p, &u, &z, v));
            points.push(z);
        }
    }
    Ok(SaturatedSystem { level: s, points, caps, patience, final_rejections: rejections, candidates, seed })
}

/// K'_i = M(z_i, 1/2) ∩ C(z_i).
#[derive(Debug, Clone)]
pub struct HalfRegion {
    pub region: MacbeathRegion,
    pub body: Polytope,
    pub volume: f64,
}

/// K'_i = M(z_i, 1/2) ∩ C(z_i) and K_i = C⁶(z_i) for a saturated system.
#[derive(Debug, Clone)]
pub struct CapCovering {
    pub system: SaturatedSystem,
    pub half_regions: Vec<HalfRegion>,
    /// K_i = C⁶(z_i), clipped to P.
    pub caps: Vec<Cap>,
}

impl CapCovering {
    pub fn m(&self) -> usize {
        self.system.m()
    }

    pub fn level(&self) -> f64 {
        self.system.level
    }

    /// x ∈ K'_i.
    pub fn in_half_region(&self, i: usize, x: &[f64]) -> bool {
        self.system.caps[i].dilate_contains(x, 1.0) && self.half_regions[i].region.contains(x)
    }

    /// x ∈ K_i^λ = C^(6λ)(z_i) for x already known to lie in P.
    #[inline]
    pub fn in_cap(&self, i: usize, x: &[f64], lambda: f64) -> bool {
        self.system.caps[i].dilate_contains(x, 6.0 * lambda)
    }

    /// Uniform point of K'_i by rejection from M(z_i, 1/2).
    pub fn sample_half_region<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Option<Vec<f64>> {
        let h = &self.half_regions[i];
        (0..256).map(|_| h.body.sample_uniform(rng)).find(|x| self.system.caps[i].dilate_contains(x, 1.0))
    }
}

pub fn cap_covering(p: &Polytope, system: SaturatedSystem) -> Result<CapCovering> {
    let mut half_regions = Vec::with_capacity(system.m());
    let mut caps = Vec::with_capacity(system.m());
    for (z, c) in system.points.iter().zip(&system.caps) {
        let region = macbeath(p, z, 0.5)?;
        let body = region.body()?;
        let volume = slice_volume(&body, &c.direction, c.threshold());
        half_regions.push(HalfRegion { region, body, volume });
        caps.push(make_cap(p, &c.direction, 6.0 * c.depth)?);
    }
    Ok(CapCovering { system, half_regions, caps })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VolumeBoundPass {
    /// Fraction of i with s ≤ V(K_i) ≤ 6^d s.
    pub outer: f64,
    /// Fraction of i with (6d)^(−d) s ≤ V(K'_i) ≤ 2^(−d) s.
    pub inner: f64,
    pub outer_violations: usize,
    pub inner_violations: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CoveringReport {
    pub level: f64,
    pub m: usize,
    pub dim: usize,
    pub budget: usize,
    pub volume_bound_pass: VolumeBoundPass,
    /// Sampled points of P(v ≤ s) lying in some K_i.
    pub coverage_fraction: f64,
    pub wet_samples: usize,
    /// Sampled points of the K'_i lying in P(v ≤ s).
    pub inner_in_wet_fraction: f64,
    /// Sampled points of each K'_i lying in K_i.
    pub inner_in_cap_fraction: f64,
    /// Random caps of volume at most s contained in some K_i^(3d).
    pub small_cap_fraction: f64,
    /// The same caps contained in some M(z_i, 15d).
    pub small_cap_macbeath_fraction: f64,
    pub small_caps: usize,
    pub claim21_lambda: f64,
    /// Sampled points of P(v ≤ λs) lying in some K_i^(3d²λ).
    pub claim21_fraction: f64,
    pub claim21_wet_samples: usize,
    /// The system is empty: no point of P reaches level s.
    pub level_too_high: bool,
    pub above_s0: bool,
    pub patience: usize,
    pub candidates: usize,
}

const CHUNK: usize = 256;

fn fraction(hit: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

/// v(x) where it matters for thresholds up to `t_max`; above that a lower
/// bound (u(x)/2) may be returned instead.
fn v_for_thresholds(p: &Polytope, x: &[f64], t_max: f64) -> f64 {
    if p.slack(x) <= TAU_GEOM {
        return 0.0;
    }
    if p.dim >= 3 {
        if let Ok(u) = u_value(p, x) {
            if 0.5 * u > t_max {
                return 0.5 * u;
            }
        }
    }
    v_or_zero(p, x, CapSearch::default_for(p.dim))
}

/// Sampled checks of the covering properties: coverage of the wet part,
/// the two-sided volume bounds, containment of small caps, and coverage of
/// P(v ≤ λs) by the 3d²λ-dilated caps.
pub fn verify_covering(p: &Polytope, cov: &CapCovering, budget: usize, lambda: f64, seed: u64) -> CoveringReport {
    let d = p.dim;
    let di = d as i32;
    let s = cov.level();
    let m = cov.m();
    let slack_s = s * (1.0 + TAU_LEVEL);

    let mut outer_violations = 0;
    let mut inner_violations = 0;
    for (k, h) in cov.caps.iter().zip(&cov.half_regions) {
        if !(k.volume >= s * (1.0 - TAU_LEVEL) && k.volume <= 6f64.powi(di) * s * (1.0 + TAU_LEVEL)) {
            outer_violations += 1;
        }
        let lo = (6.0 * d as f64).powi(-di) * s * (1.0 - TAU_LEVEL);
        let hi = 2f64.powi(-di) * s * (1.0 + TAU_LEVEL);
        if !(h.volume >= lo && h.volume <= hi) {
            inner_violations += 1;
        }
    }
    let volume_bound_pass = VolumeBoundPass {
        outer: fraction(m - outer_violations, m),
        inner: fraction(m - inner_violations, m),
        outer_violations,
        inner_violations,
    };

    // uniform samples of P: coverage of P(v ≤ s) and of P(v ≤ λs)
    let z_hull: HullComplex = convex_hull(&cov.system.points);
    let claim_dilation = 3.0 * (d * d) as f64 * lambda;
    let chunks = budget.div_ceil(CHUNK);
    let counts: Vec<[usize; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, 1 + c as u64);
            let n = CHUNK.min(budget - c * CHUNK);
            let mut out = [0usize; 4];
            for _ in 0..n {
                let x = p.sample_uniform(&mut rng);
                let in_min_cap = cov.system.caps.iter().any(|c| c.dilate_contains(&x, 1.0));
                let (wet, wet_l) = if in_min_cap {
                    (true, true)
                } else {
                    let t_max = slack_s.max(lambda * slack_s);
                    let dry_s = z_hull.contains(&x);
                    if dry_s && lambda <= 1.0 {
                        (false, false)
                    } else {
                        let v = v_for_thresholds(p, &x, t_max);
                        (!dry_s && v <= slack_s, v <= lambda * slack_s)
                    }
                };
                if wet {
                    out[0] += 1;
                    if (0..m).any(|i| cov.in_cap(i, &x, 1.0)) {
                        out[1] += 1;
                    }
                }
                if wet_l {
                    out[2] += 1;
                    if (0..m).any(|i| cov.in_cap(i, &x, claim_dilation)) {
                        out[3] += 1;
                    }
                }
            }
            out
        })
        .collect();
    let tot = counts.iter().fold([0usize; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);

    // samples of the K'_i
    let per = if m == 0 { 0 } else { (budget / m).max(8) };
    let inner: Vec<[usize; 3]> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, (1 << 32) + i as u64);
            let mut out = [0usize; 3];
            let u = cov.system.caps[i].direction.as_slice();
            for _ in 0..per {
                let Some(x) = cov.sample_half_region(i, &mut rng) else { continue };
                out[0] += 1;
                if crate::caps::v_at_most(p, &x, slack_s, &[u]) {
                    out[1] += 1;
                }
                if cov.in_cap(i, &x, 1.0) {
                    out[2] += 1;
                }
            }
            out
        })
        .collect();
    let inner_tot = inner.iter().fold([0usize; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);

    // random caps of volume at most s
    let n_caps = (budget / 40).clamp(16, 512);
    let small: Vec<(bool, bool)> = (0..n_caps)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, (2 << 32) + k as u64);
            let Some(cap) = random_cap_with_volume(p, s * rng.random_range(0.05..=1.0), &mut rng) else {
                return (true, true);
            };
            let verts = cap.slice_vertices(p);
            let in_k = (0..m).any(|i| verts.iter().all(|x| cov.in_cap(i, x, 3.0 * d as f64)));
            let in_m = cov
                .system
                .points
                .iter()
                .any(|z| verts.iter().all(|x| gauge(p, z, x) <= 15.0 * d as f64 + TAU_GEOM));
            (in_k, in_m)
        })
        .collect();

    CoveringReport {
        level: s,
        m,
        dim: d,
        budget,
        volume_bound_pass,
        coverage_fraction: fraction(tot[1], tot[0]),
        wet_samples: tot[0],
        inner_in_wet_fraction: fraction(inner_tot[1], inner_tot[0]),
        inner_in_cap_fraction: fraction(inner_tot[2], inner_tot[0]),
        small_cap_fraction: fraction(small.iter().filter(|x| x.0).count(), n_caps),
        small_cap_macbeath_fraction: fraction(small.iter().filter(|x| x.1).count(), n_caps),
        small_caps: n_caps,
        claim21_lambda: lambda,
        claim21_fraction: fraction(tot[3], tot[2]),
        claim21_wet_samples: tot[2],
        level_too_high: m == 0,
        above_s0: cov.system.above_s0(p),
        patience: cov.system.patience,
        candidates: cov.system.candidates,
    }
}

/// A cap with uniformly random direction and the given volume, found by
/// bisection on the depth.
pub fn random_cap_with_volume<R: Rng + ?Sized>(p: &Polytope, volume: f64, rng: &mut R) -> Option<Cap> {
    let g: Vec<f64> = (0..p.dim).map(|_| rng.sample(StandardNormal)).collect();
    let u = crate::linalg::normalized(&g);
    let w = p.width(&u);
    if volume >= p.volume {
        return make_cap(p, &u, w).ok();
    }
    let (mut lo, mut hi) = (0.0, w);
    for _ in 0..80 {
        let t = 0.5 * (lo + hi);
        if make_cap(p, &u, t).ok()?.volume > volume {
            hi = t;
        } else {
            lo = t;
        }
    }
    if lo <= 0.0 {
        return None;
    }
    make_cap(p, &u, lo).ok()
}

/// |{i : z_i ∈ C}|.
pub fn count_z_in_cap(p: &Polytope, system: &SaturatedSystem, cap: &Cap) -> usize {
    system.points.iter().filter(|z| cap.contains(p, z)).count()
}

/// Sampled check that P(v ≥ t_star) lies in the hull of `picks`.
pub fn convexhull_sandwich_witness(p: &Polytope, picks: &[Vec<f64>], t_star: f64, budget: usize, seed: u64) -> bool {
    let hull = if picks.len() > p.dim { Some(convex_hull(picks)) } else { None };
    let chunks = budget.div_ceil(CHUNK);
    (0..chunks).into_par_iter().all(|c| {
        let mut rng = stream_rng(seed, c as u64);
        let n = CHUNK.min(budget - c * CHUNK);
        (0..n).all(|_| {
            let x = p.sample_uniform(&mut rng);
            if hull.as_ref().is_some_and(|h| h.contains(&x)) {
                return true;
            }
            // outside the hull: fine only if x is in the wet part
            crate::caps::v_at_most(p, &x, t_star, &[])
        })
    })
}

/// z(a): the first z_i in system order whose M(z_i, 1/2) meets M(a, 1/2).
pub fn z_of(p: &Polytope, system: &SaturatedSystem, a: &[f64]) -> Option<usize> {
    system.points.iter().position(|z| macbeath_regions_intersect(p, z, 0.5, a, 0.5))
}
