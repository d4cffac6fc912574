//! Poisson samples in P, the Poisson polytope, the events A and B, the
//! sandwich checks and the ζ-variables for volume and face counts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::caps::level::{level_points, DryCertificate};
use crate::caps::minimal::{v_or_zero, CapSearch};
use crate::covering::{cap_covering, saturate, DEFAULT_PATIENCE};
use crate::depgraph::{build_cells, build_graph, build_pool, CellDecomposition, CellPool, DependencyGraph};
use crate::hull::{convex_hull_flat, ConvexPolygon, HullComplex};
use crate::polytope::Polytope;
use crate::{stream_rng, Error, Result};

/// Desk-scale α: T = α_desk·lln η/η.
pub const ALPHA_DESK: f64 = 12.0;
/// Desk-scale β: s = 1/(η·ln^β η).
pub const BETA_DESK: f64 = 4.0;

/// ln ln x.
pub fn lln(x: f64) -> f64 {
    x.ln().ln()
}

/// The constants α, β behind the scales. `alpha` is always the full value
/// (6d)^d(4d²+d−1); desk runs shrink it through `scale_factor`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Constants {
    pub alpha: f64,
    pub beta: f64,
    pub scale_factor: f64,
    pub desk: bool,
}

impl Constants {
    pub fn paper(d: usize) -> Self {
        let df = d as f64;
        let beta = 4.0 * df * df + df - 1.0;
        Constants { alpha: (6.0 * df).powi(d as i32) * beta, beta, scale_factor: 1.0, desk: false }
    }

    pub fn desk(d: usize, alpha_desk: f64, beta_desk: f64) -> Self {
        let paper = Self::paper(d);
        Constants { alpha: paper.alpha, beta: beta_desk, scale_factor: alpha_desk / paper.alpha, desk: true }
    }

    pub fn desk_default(d: usize) -> Self {
        Self::desk(d, ALPHA_DESK, BETA_DESK)
    }

    pub fn effective_alpha(&self) -> f64 {
        self.alpha * self.scale_factor
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ExperimentScales {
    pub eta: f64,
    pub dim: usize,
    pub constants: Constants,
    pub lln: f64,
    pub t: f64,
    pub t_star: f64,
    pub s: f64,
    pub u: f64,
    pub u_star: f64,
    pub gamma: f64,
}

impl ExperimentScales {
    pub fn new(d: usize, eta: f64, constants: Constants) -> Result<Self> {
        if !(eta > std::f64::consts::E) || !eta.is_finite() {
            return Err(Error::PreconditionViolated(format!("η must exceed e for lln η > 0, got {eta}")));
        }
        let l = lln(eta);
        let k = d as f64 * 6f64.powi(d as i32);
        let t = constants.effective_alpha() * l / eta;
        let s = 1.0 / (eta * eta.ln().powf(constants.beta));
        let u = eta.ln() / eta;
        if !(t > s && s > 0.0) {
            return Err(Error::PreconditionViolated(format!("scales need T > s > 0, got T = {t}, s = {s}")));
        }
        Ok(ExperimentScales {
            eta,
            dim: d,
            constants,
            lln: l,
            t,
            t_star: k * t,
            s,
            u,
            u_star: k * u,
            gamma: crate::depgraph::gamma(d),
        })
    }

    /// 3(6γ)^d·α·lln η, the cap on |S'_j ∩ X| in event A.
    pub fn s_prime_bound(&self) -> f64 {
        3.0 * (6.0 * self.gamma).powi(self.dim as i32) * self.constants.effective_alpha() * self.lln
    }
}

/// Poisson(mean) by inversion below mean 30 and by the transformed
/// rejection method PTRS above.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 30.0 {
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        let u: f64 = rng.random();
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
            if p < 1e-300 && cdf >= 1.0 - 1e-16 {
                break;
            }
        }
        return k;
    }
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln() <= -mean + k * loglam - libm::lgamma(k + 1.0) {
            return k as u64;
        }
    }
}

/// P(N ≥ k) for N ~ Poisson(mean), summed from the upper tail.
pub fn poisson_upper_tail(mean: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let log_pk = |j: u64| -mean + j as f64 * mean.ln() - libm::lgamma(j as f64 + 1.0);
    let mut total = 0.0;
    let mut j = k;
    loop {
        let term = log_pk(j).exp();
        total += term;
        if (j as f64 > mean && term < 1e-18 * total) || j > k + 100_000 {
            break;
        }
        j += 1;
    }
    total.min(1.0)
}

/// The bound P(N ≥ 3p) ≤ 3/(3 − e)·e^(−p) for N ~ Poisson(p).
pub fn poisson_tail_bound(p: f64) -> f64 {
    3.0 / (3.0 - std::f64::consts::E) * (-p).exp()
}

#[derive(Debug, Clone)]
pub struct PoissonSample {
    pub eta: f64,
    pub dim: usize,
    /// Row-major, N·d values.
    pub points: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl PoissonSample {
    pub fn n(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn from_points(eta: f64, dim: usize, points: Vec<f64>) -> Self {
        PoissonSample { eta, dim, points, seed: 0, stream: 0 }
    }
}

/// N ~ Poisson(η·V(P)) uniform points of P.
pub fn sample_poisson<R: Rng + ?Sized>(p: &Polytope, eta: f64, rng: &mut R) -> Result<PoissonSample> {
    let mean = eta * p.volume;
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::InvalidIntensity(mean));
    }
    let n = poisson(mean, rng) as usize;
    let d = p.dim;
    let mut points = vec![0.0; n * d];
    for x in points.chunks_exact_mut(d) {
        p.sample_uniform_into(rng, x);
    }
    Ok(PoissonSample { eta, dim: d, points, seed: 0, stream: 0 })
}

/// `sample_poisson` on the stream (seed, stream).
pub fn sample_poisson_seeded(p: &Polytope, eta: f64, seed: u64, stream: u64) -> Result<PoissonSample> {
    let mut rng = stream_rng(seed, stream);
    let mut s = sample_poisson(p, eta, &mut rng)?;
    s.seed = seed;
    s.stream = stream;
    Ok(s)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Uniform samples behind the cell validation.
    pub cell_validation: usize,
    /// Pool points per cell for ζ_vol.
    pub pool_per_cell: usize,
    /// Random witness pairs per pair of cells.
    pub visibility_probes: usize,
    /// Rays for level-set points (dry certificates and inclusion probes).
    pub level_rays: usize,
    /// Uniform samples for the wet-part volume behind b₂.
    pub wet_samples: usize,
    pub patience: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            cell_validation: 10_000,
            pool_per_cell: crate::depgraph::DEFAULT_POOL_PER_CELL,
            visibility_probes: crate::depgraph::DEFAULT_PROBES,
            level_rays: 256,
            wet_samples: 20_000,
            patience: DEFAULT_PATIENCE,
        }
    }
}

/// Everything that depends on η but not on the replication.
#[derive(Debug, Clone)]
pub struct ExperimentContext {
    pub scales: ExperimentScales,
    pub cells: CellDecomposition,
    pub pool: CellPool,
    pub graph: DependencyGraph,
    pub b2: f64,
    pub flags: u64,
    /// Certifies v > max(T*, U*).
    pub cert_top: DryCertificate,
    /// Points of P(v ≥ T*) whose inclusion in Π_η stands for the whole
    /// floating body: its boundary points, or uniform points of it when
    /// it misses the centroid.
    pub t_star_probe: Vec<Vec<f64>>,
    pub u_star_probe: Vec<Vec<f64>>,
    /// max_j V̂(S'_j), the almost sure bound on ζ_j in volume mode.
    pub m_vol: f64,
}

fn floating_probe(p: &Polytope, t: f64, rays: usize, seed: u64) -> Vec<Vec<f64>> {
    let pts = level_points(p, t, rays, seed);
    if !pts.is_empty() {
        return pts;
    }
    let search = CapSearch::default_for(p.dim);
    let mut rng = stream_rng(seed, 1);
    (0..4 * rays).map(|_| p.sample_uniform(&mut rng)).filter(|x| v_or_zero(p, x, search) >= t).collect()
}

impl ExperimentContext {
    pub fn build(p: &Polytope, scales: ExperimentScales, b2: f64, budgets: &Budgets, seed: u64) -> Result<Self> {
        let system = saturate(p, scales.t, seed, budgets.patience)?;
        let covering = cap_covering(p, system)?;
        let cells = build_cells(p, covering, budgets.cell_validation, seed ^ 0x5eed_0001)?;
        let pool = build_pool(p, &cells, budgets.pool_per_cell, seed ^ 0x5eed_0002);
        let graph = build_graph(p, &cells, &pool, scales.s, budgets.visibility_probes, seed ^ 0x5eed_0003, false);
        let top = scales.t_star.max(scales.u_star);
        let m_vol = (0..cells.m()).map(|j| pool.trimmed_volume(j)).fold(0.0, f64::max);
        Ok(ExperimentContext {
            cert_top: DryCertificate::new(p, top, budgets.level_rays, seed),
            t_star_probe: floating_probe(p, scales.t_star, budgets.level_rays, seed ^ 0x5eed_0004),
            u_star_probe: floating_probe(p, scales.u_star, budgets.level_rays, seed ^ 0x5eed_0005),
            flags: p.flag_count(),
            scales,
            cells,
            pool,
            graph,
            b2,
            m_vol,
        })
    }

    pub fn m(&self) -> usize {
        self.cells.m()
    }

    /// 3·b₂·F(P)·ln^d η, the cap on |P(v ≤ U*) ∩ X| in event B.
    pub fn b_count_bound(&self) -> f64 {
        3.0 * self.b2 * self.flags as f64 * self.scales.eta.ln().powi(self.scales.dim as i32)
    }
}

/// b₂ fitted as max over the grid of V̂(P(v ≤ U*))·η/(F(P)·ln^d η).
pub fn fit_b2(p: &Polytope, etas: &[f64], constants: Constants, budget: usize, seed: u64) -> Result<f64> {
    let flags = p.flag_count() as f64;
    let mut b2: f64 = 0.0;
    for (k, &eta) in etas.iter().enumerate() {
        let sc = ExperimentScales::new(p.dim, eta, constants)?;
        let mut rng = stream_rng(seed, k as u64);
        let est = crate::caps::wet_part_volume(p, sc.u_star, budget, &mut rng)?;
        b2 = b2.max(est.value * eta / (flags * eta.ln().powi(p.dim as i32)));
    }
    Ok(b2)
}

/// Counts from classifying every sample point by v.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct PointCounts {
    pub wet_s: usize,
    pub wet_u_star: usize,
    pub wet_t_star: usize,
    /// K'_j containing at least one point.
    pub half_regions_hit: usize,
    /// max_j |S'_j ∩ X|, or an upper bound (|P(v ≤ T*) ∩ X|) when the
    /// event-A bound already exceeds N.
    pub s_prime_max: usize,
    pub s_prime_exact: bool,
}

pub fn classify(p: &Polytope, ctx: &ExperimentContext, sample: &PoissonSample) -> PointCounts {
    let sc = &ctx.scales;
    let search = CapSearch::default_for(p.dim);
    let cov = &ctx.cells.covering;
    let m = ctx.m();
    let n = sample.n();
    let exact = sc.s_prime_bound() < n as f64;
    let mut hit = vec![false; m];
    let mut per_cell = vec![0usize; if exact { m } else { 0 }];
    let mut c = PointCounts::default();
    for i in 0..n {
        let x = sample.point(i);
        if ctx.cert_top.certifies(x) {
            continue;
        }
        let v = v_or_zero(p, x, search);
        c.wet_s += (v <= sc.s) as usize;
        c.wet_u_star += (v <= sc.u_star) as usize;
        if v <= sc.t_star {
            c.wet_t_star += 1;
            if exact {
                per_cell[ctx.cells.assign(p, x)] += 1;
            }
        }
        // K'_j ⊂ C(z_j), so its points have v ≤ V(C(z_j)) = T
        if v <= sc.t * (1.0 + 1e-3) {
            for (j, h) in hit.iter_mut().enumerate() {
                if !*h && cov.in_half_region(j, x) {
                    *h = true;
                }
            }
        }
    }
    c.half_regions_hit = hit.iter().filter(|&&h| h).count();
    c.s_prime_exact = exact;
    c.s_prime_max = if exact { per_cell.into_iter().max().unwrap_or(0) } else { c.wet_t_star };
    c
}

fn event_a_from(ctx: &ExperimentContext, c: &PointCounts) -> bool {
    c.half_regions_hit == ctx.m() && c.wet_s == 0 && (c.s_prime_max as f64) <= ctx.scales.s_prime_bound()
}

/// Every K'_j holds a point, P(v ≤ s) holds none and every S'_j holds at
/// most 3(6γ)^d·α·lln η.
pub fn event_a(p: &Polytope, ctx: &ExperimentContext, sample: &PoissonSample) -> bool {
    event_a_from(ctx, &classify(p, ctx, sample))
}

/// P(v ≥ U*) ⊂ Π_η and |P(v ≤ U*) ∩ X| ≤ 3b₂F(P)ln^d η.
pub fn event_b(p: &Polytope, ctx: &ExperimentContext, sample: &PoissonSample) -> bool {
    let r = realize(p, ctx, sample.clone());
    r.event_b
}

#[derive(Debug, Clone)]
pub struct Realization {
    pub sample: PoissonSample,
    pub hull: HullComplex,
    polygon: Option<ConvexPolygon>,
    pub volume: f64,
    pub f_vector: Vec<usize>,
    pub sandwich_inner: bool,
    pub sandwich_outer: bool,
    pub event_a: bool,
    pub event_b: bool,
    pub counts: PointCounts,
}

impl Realization {
    /// x ∈ Π_η (closed, no tolerance).
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.polygon {
            Some(poly) => poly.contains_within(x, 0.0),
            None => self.hull.contains_within(x, 0.0),
        }
    }

    pub fn n(&self) -> usize {
        self.sample.n()
    }
}

pub fn realize(p: &Polytope, ctx: &ExperimentContext, sample: PoissonSample) -> Realization {
    let d = p.dim;
    let hull = convex_hull_flat(&sample.points, d, 0x51ab_1e5e_ed00_0001);
    let polygon = ConvexPolygon::from_hull(&hull, &sample.points);
    let volume = if hull.degenerate { 0.0 } else { hull.volume };
    let f_vector = hull.f_vector.clone();
    let counts = classify(p, ctx, &sample);
    let mut r = Realization {
        sample,
        hull,
        polygon,
        volume,
        f_vector,
        sandwich_inner: false,
        sandwich_outer: counts.wet_s == 0,
        event_a: event_a_from(ctx, &counts),
        event_b: false,
        counts,
    };
    r.sandwich_inner = ctx.t_star_probe.iter().all(|x| r.contains(x));
    r.event_b = ctx.u_star_probe.iter().all(|x| r.contains(x)) && (r.counts.wet_u_star as f64) <= ctx.b_count_bound();
    r
}

/// The sandwich flags of a hull of `flat` at an arbitrary pair (T*, s),
/// with boundary points of P(v ≥ T*) as inclusion probes.
pub fn sandwich_flags(p: &Polytope, flat: &[f64], t_star: f64, s: f64, rays: usize) -> (bool, bool) {
    let d = p.dim;
    let hull = convex_hull_flat(flat, d, 0x51ab_1e5e_ed00_0001);
    let probe = floating_probe(p, t_star, rays, 0);
    let inner = probe.iter().all(|x| hull.contains_within(x, 0.0));
    let search = CapSearch::default_for(d);
    let outer = flat.chunks_exact(d).all(|x| v_or_zero(p, x, search) > s);
    (inner, outer)
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ZetaMode {
    Volume,
    Faces(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct ZetaVector {
    pub mode: ZetaMode,
    pub values: Vec<f64>,
    /// Volume mode: missed volume not attributed to any cell.
    pub overflow: f64,
    pub total: f64,
    /// Faces mode: some ℓ-face has more than ℓ+1 vertices.
    pub non_simplicial: bool,
}

impl ZetaVector {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum::<f64>() + self.overflow
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(self.overflow, f64::max)
    }
}

/// ζ_j = V(S_j \ Π_η), estimated from the cell pool and rescaled so that
/// Σζ_j = V(P) − V(Π_η). When the inner sandwich fails, or the pool sees
/// no missed volume at all, the unattributed rest goes to `overflow`.
pub fn zeta_volume(ctx: &ExperimentContext, r: &Realization, mother_volume: f64) -> ZetaVector {
    let pool = &ctx.pool;
    let m = ctx.m();
    let mut outside = vec![0usize; m];
    for i in 0..pool.len() {
        if !r.contains(pool.point(i)) {
            outside[pool.cell[i] as usize] += 1;
        }
    }
    let unit = pool.mother_volume / pool.draws.max(1) as f64;
    let mut values: Vec<f64> = outside.iter().map(|&k| k as f64 * unit).collect();
    let total = (mother_volume - r.volume).max(0.0);
    let est: f64 = values.iter().sum();
    let mut overflow = 0.0;
    if r.sandwich_inner && est > 0.0 {
        let f = total / est;
        values.iter_mut().for_each(|v| *v *= f);
    } else {
        if est > total {
            let f = total / est;
            values.iter_mut().for_each(|v| *v *= f);
        }
        overflow = (total - values.iter().sum::<f64>()).max(0.0);
    }
    ZetaVector { mode: ZetaMode::Volume, values, overflow, total, non_simplicial: false }
}

/// ζ_i = (1/(ℓ+1))·Σ_F f_0(S_i, F) over the ℓ-faces F of Π_η.
pub fn zeta_faces(p: &Polytope, ctx: &ExperimentContext, r: &Realization, ell: usize) -> ZetaVector {
    let m = ctx.m();
    let mut values = vec![0.0; m];
    let faces = r.hull.faces(ell);
    let mut cell_of = std::collections::HashMap::new();
    let mut non_simplicial = false;
    let w = 1.0 / (ell + 1) as f64;
    for f in &faces {
        if f.len() > ell + 1 {
            non_simplicial = true;
        }
        for &v in f {
            let j = *cell_of.entry(v).or_insert_with(|| ctx.cells.assign(p, r.sample.point(v)));
            values[j] += w;
        }
    }
    ZetaVector { mode: ZetaMode::Faces(ell), values, overflow: 0.0, total: faces.len() as f64, non_simplicial }
}

/// One CSV row per replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub eta: f64,
    pub seed_index: u64,
    pub n: usize,
    pub volume: f64,
    pub f: Vec<usize>,
    pub event_a: bool,
    pub event_b: bool,
    pub sandwich_inner: bool,
    pub sandwich_outer: bool,
    pub max_zeta_vol: f64,
    pub max_zeta_face: f64,
    /// |Σζ_j − (V(P) − V(Π_η))| in volume mode.
    pub zeta_vol_residual: f64,
    pub zeta_vol_overflow: f64,
    /// Σζ_i = f_ℓ held for every ℓ.
    pub zeta_face_exact: bool,
    pub non_simplicial: bool,
    pub wet_t_star: usize,
    pub wet_u_star: usize,
}

impl ReplicationRecord {
    pub fn header(d: usize) -> Vec<String> {
        let mut h: Vec<String> = ["eta", "seed_index", "N", "V"].iter().map(|s| s.to_string()).collect();
        h.extend((0..d).map(|l| format!("f_{l}")));
        h.extend(
            [
                "A",
                "B",
                "sandwich_inner",
                "sandwich_outer",
                "max_zeta_vol",
                "max_zeta_face",
                "zeta_vol_residual",
                "zeta_vol_overflow",
                "zeta_face_exact",
                "non_simplicial",
                "wet_t_star",
                "wet_u_star",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        h
    }

    pub fn fields(&self) -> Vec<String> {
        let b = |x: bool| (x as u8).to_string();
        let mut r = vec![format!("{}", self.eta), self.seed_index.to_string(), self.n.to_string(), format!("{:e}", self.volume)];
        r.extend(self.f.iter().map(|x| x.to_string()));
        r.extend([
            b(self.event_a),
            b(self.event_b),
            b(self.sandwich_inner),
            b(self.sandwich_outer),
            format!("{:e}", self.max_zeta_vol),
            format!("{:e}", self.max_zeta_face),
            format!("{:e}", self.zeta_vol_residual),
            format!("{:e}", self.zeta_vol_overflow),
            b(self.zeta_face_exact),
            b(self.non_simplicial),
            self.wet_t_star.to_string(),
            self.wet_u_star.to_string(),
        ]);
        r
    }
}

/// Sample, realize and summarize replication `index` at the context's η.
pub fn replicate(p: &Polytope, ctx: &ExperimentContext, seed: u64, stream: u64, index: u64) -> Result<ReplicationRecord> {
    let sample = sample_poisson_seeded(p, ctx.scales.eta, seed, stream)?;
    let r = realize(p, ctx, sample);
    let zv = zeta_volume(ctx, &r, p.volume);
    let mut zeta_face_exact = true;
    let mut non_simplicial = false;
    let mut max_zeta_face = 0.0;
    if !r.hull.degenerate {
        for ell in 0..p.dim {
            let zf = zeta_faces(p, ctx, &r, ell);
            non_simplicial |= zf.non_simplicial;
            let want = r.f_vector[ell] as f64;
            zeta_face_exact &= zf.non_simplicial || (zf.sum() - want).abs() <= 1e-9 * want.max(1.0);
            if ell == 0 {
                max_zeta_face = zf.max();
            }
        }
    }
    Ok(ReplicationRecord {
        eta: ctx.scales.eta,
        seed_index: index,
        n: r.n(),
        volume: r.volume,
        f: r.f_vector.clone(),
        event_a: r.event_a,
        event_b: r.event_b,
        sandwich_inner: r.sandwich_inner,
        sandwich_outer: r.sandwich_outer,
        max_zeta_vol: zv.max(),
        max_zeta_face,
        zeta_vol_residual: (zv.sum() - zv.total).abs(),
        zeta_vol_overflow: zv.overflow,
        zeta_face_exact,
        non_simplicial,
        wet_t_star: r.counts.wet_t_star,
        wet_u_star: r.counts.wet_u_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::builtin;

    #[test]
    fn scales_at_desk() {
        let sc = ExperimentScales::new(2, 1e5, Constants::desk_default(2)).unwrap();
        assert!((sc.t - 12.0 * lln(1e5) / 1e5).abs() < 1e-15);
        assert!((sc.t_star - 72.0 * sc.t).abs() < 1e-15);
        assert!(sc.t > sc.s && sc.s > 0.0);
        assert_eq!(sc.gamma, 864.0);
        let paper = Constants::paper(2);
        assert_eq!(paper.alpha, 144.0 * 17.0);
        assert_eq!(paper.beta, 17.0);
        assert!(ExperimentScales::new(2, 2.0, paper).is_err());
    }

    #[test]
    fn poisson_small_and_large_means() {
        for mean in [3.5, 100.0] {
            let mut rng = stream_rng(1, 0);
            let n = 20_000;
            let xs: Vec<f64> = (0..n).map(|_| poisson(mean, &mut rng) as f64).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((m - mean).abs() < 4.0 * (mean / n as f64).sqrt(), "{mean}: {m}");
            assert!((v / mean - 1.0).abs() < 0.05, "{mean}: {v}");
        }
    }

    #[test]
    fn invalid_intensity() {
        let p = builtin("cube", 2).unwrap();
        let mut rng = stream_rng(1, 0);
        assert!(matches!(sample_poisson(&p, 0.0, &mut rng), Err(Error::InvalidIntensity(_))));
    }

    #[test]
    fn tail_bound_holds() {
        for p in [1.0, 5.0, 20.0] {
            let exact = poisson_upper_tail(p, (3.0 * p) as u64);
            assert!(exact <= poisson_tail_bound(p), "{p}");
        }
        assert!((poisson_upper_tail(1.0, 3) - (1.0 - 2.5 * (-1f64).exp())).abs() < 1e-12);
    }
}
