//! Cells S_j, trimmed cells S'_j, visibility regions L_i and the dependency
//! graph on the covering indices.

use std::collections::BTreeSet;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::caps::level::{segment_max_v_below, superset_beta, v_at_most, DryCertificate};
use crate::caps::minimal::{v_or_zero, CapSearch};
use crate::caps::{gauge, Cap};
use crate::covering::CapCovering;
use crate::polytope::Polytope;
use crate::{stream_rng, Error, Result, TAU_GEOM};

/// Random witness pairs tried per pair of cells.
pub const DEFAULT_PROBES: usize = 256;

/// Points per cell in the trimmed-cell pool.
pub const DEFAULT_POOL_PER_CELL: usize = 4096;

/// T* = d·6^d·T.
pub fn t_star(d: usize, t: f64) -> f64 {
    d as f64 * 6f64.powi(d as i32) * t
}

/// γ = 3d³·6^d.
pub fn gamma(d: usize) -> f64 {
    3.0 * (d as f64).powi(3) * 6f64.powi(d as i32)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CellValidation {
    pub samples: usize,
    pub half_region_samples: usize,
    /// Samples with v ≤ T* whose cap K_j^γ had to be checked.
    pub wet_checked: usize,
}

/// Cells S_j: x belongs to the j minimizing the Macbeath gauge
/// min{μ : x ∈ M(z_j, μ)}, ties to the smaller index.
#[derive(Debug, Clone)]
pub struct CellDecomposition {
    pub covering: CapCovering,
    pub t: f64,
    pub t_star: f64,
    pub gamma: f64,
    pub validation: CellValidation,
}

impl CellDecomposition {
    pub fn m(&self) -> usize {
        self.covering.m()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.covering.system.points
    }

    pub fn assign(&self, p: &Polytope, x: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (j, z) in self.centers().iter().enumerate() {
            let g = gauge(p, z, x);
            if g < best.0 {
                best = (g, j);
            }
        }
        best.1
    }

    /// x ∈ K_j^γ.
    pub fn in_gamma_cap(&self, j: usize, x: &[f64]) -> bool {
        self.covering.in_cap(j, x, self.gamma)
    }

    /// x ∈ S'_j = S_j ∩ P(v ≤ T*).
    pub fn in_trimmed(&self, p: &Polytope, x: &[f64], j: usize) -> bool {
        p.contains(x) && self.assign(p, x) == j && v_at_most(p, x, self.t_star, &[])
    }
}

/// Cells for a covering at level T, validated on `budget` uniform samples
/// and on samples of every K'_j.
pub fn build_cells(p: &Polytope, covering: CapCovering, budget: usize, seed: u64) -> Result<CellDecomposition> {
    let d = p.dim;
    let t = covering.level();
    let cells = CellDecomposition {
        t,
        t_star: t_star(d, t),
        gamma: gamma(d),
        covering,
        validation: CellValidation { samples: 0, half_region_samples: 0, wet_checked: 0 },
    };
    let m = cells.m();
    if m == 0 {
        return Err(Error::PreconditionViolated("empty covering".into()));
    }

    // invariant 2: K'_j ⊂ S_j
    let per = (budget / m).max(8);
    let inner: Vec<std::result::Result<usize, Error>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(seed, (1 << 40) + j as u64);
            let mut n = 0;
            for _ in 0..per {
                let Some(x) = cells.covering.sample_half_region(j, &mut rng) else { continue };
                n += 1;
                if cells.assign(p, &x) != j {
                    return Err(Error::CellInvariantViolated { invariant: 2, point: x });
                }
            }
            Ok(n)
        })
        .collect();
    let mut half_region_samples = 0;
    for r in inner {
        half_region_samples += r?;
    }

    // invariants 1 and 3 on uniform samples
    const CHUNK: usize = 256;
    let chunks = budget.div_ceil(CHUNK);
    let outer: Vec<std::result::Result<usize, Error>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let mut wet = 0;
            for _ in 0..CHUNK.min(budget - c * CHUNK) {
                let x = p.sample_uniform(&mut rng);
                let j = cells.assign(p, &x);
                if j >= m {
                    return Err(Error::CellInvariantViolated { invariant: 1, point: x });
                }
                if !cells.in_gamma_cap(j, &x) {
                    wet += 1;
                    if v_at_most(p, &x, cells.t_star, &[]) {
                        return Err(Error::CellInvariantViolated { invariant: 3, point: x });
                    }
                }
            }
            Ok(wet)
        })
        .collect();
    let mut wet_checked = 0;
    for r in outer {
        wet_checked += r?;
    }
    Ok(CellDecomposition {
        validation: CellValidation { samples: budget, half_region_samples, wet_checked },
        ..cells
    })
}

/// Uniform points of P(v ≤ T*) tagged with their cell and v, drawn by
/// rejection from P until every cell has `per_cell` points on average.
#[derive(Debug, Clone)]
pub struct CellPool {
    pub dim: usize,
    pub points: Vec<f64>,
    pub v: Vec<f64>,
    pub cell: Vec<u32>,
    pub by_cell: Vec<Vec<u32>>,
    /// Uniform draws of P behind the pool.
    pub draws: usize,
    pub mother_volume: f64,
}

impl CellPool {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Monte Carlo estimate of V(S'_j).
    pub fn trimmed_volume(&self, j: usize) -> f64 {
        self.mother_volume * self.by_cell[j].len() as f64 / self.draws as f64
    }
}

pub fn build_pool(p: &Polytope, cells: &CellDecomposition, per_cell: usize, seed: u64) -> CellPool {
    const CHUNK: usize = 4096;
    const BATCH: usize = 16;
    let d = p.dim;
    let m = cells.m();
    let target = per_cell * m;
    let dry = DryCertificate::new(p, cells.t_star, 128, seed);
    let search = CapSearch::default_for(d);
    let mut pool = CellPool {
        dim: d,
        points: Vec::new(),
        v: Vec::new(),
        cell: Vec::new(),
        by_cell: vec![Vec::new(); m],
        draws: 0,
        mother_volume: p.volume,
    };
    let mut batch = 0u64;
    // the cap on draws only matters when P(v ≤ T*) is tiny
    while pool.len() < target && pool.draws < 4096 * target.max(1) {
        let parts: Vec<(Vec<f64>, Vec<f64>, Vec<u32>)> = (0..BATCH as u64)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream_rng(seed, batch * BATCH as u64 + c);
                let mut x = vec![0.0; d];
                let (mut pts, mut vs, mut cs) = (Vec::new(), Vec::new(), Vec::new());
                for _ in 0..CHUNK {
                    p.sample_uniform_into(&mut rng, &mut x);
                    if dry.certifies(&x) {
                        continue;
                    }
                    let v = v_or_zero(p, &x, search);
                    if v <= cells.t_star {
                        pts.extend_from_slice(&x);
                        vs.push(v);
                        cs.push(cells.assign(p, &x) as u32);
                    }
                }
                (pts, vs, cs)
            })
            .collect();
        for (pts, vs, cs) in parts {
            for (k, &c) in cs.iter().enumerate() {
                pool.by_cell[c as usize].push((pool.v.len() + k) as u32);
            }
            pool.points.extend(pts);
            pool.v.extend(vs);
            pool.cell.extend(cs);
        }
        pool.draws += CHUNK * BATCH;
        batch += 1;
    }
    pool
}

/// Whether P ∩ C1^λ1 ∩ C2^λ2 is nonempty.
pub fn caps_intersect(p: &Polytope, c1: &Cap, l1: f64, c2: &Cap, l2: f64) -> bool {
    let d = p.dim;
    let mut prob = Problem::new(OptimizationDirection::Maximize);
    let (lo, hi) = p.vertices.iter().fold((vec![f64::INFINITY; d], vec![f64::NEG_INFINITY; d]), |(mut lo, mut hi), v| {
        for k in 0..d {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
        (lo, hi)
    });
    let xs: Vec<_> = (0..d).map(|k| prob.add_var(0.0, (lo[k], hi[k]))).collect();
    let delta = prob.add_var(1.0, (-1e6, 1.0));
    for f in &p.facets {
        let mut row: Vec<_> = xs.iter().copied().zip(f.normal.iter().copied()).collect();
        row.push((delta, 1.0));
        prob.add_constraint(row.as_slice(), ComparisonOp::Le, f.offset);
    }
    for (c, l) in [(c1, l1), (c2, l2)] {
        // u·x ≥ h − λt  ⇔  −u·x + δ ≤ −(h − λt)
        let mut row: Vec<_> = xs.iter().copied().zip(c.direction.iter().map(|x| -x)).collect();
        row.push((delta, 1.0));
        prob.add_constraint(row.as_slice(), ComparisonOp::Le, -(c.support - l * c.depth));
    }
    match prob.solve() {
        Ok(out) => out.solution().is_none_or(|sol| sol.objective() >= -TAU_GEOM),
        Err(_) => false,
    }
}

/// Witness search for S'_k ⊂ L_i: a ∈ S'_i ∩ P(v ≥ s), b ∈ S'_k ∩ P(v ≥ s)
/// with [a, b] disjoint from P(v ≥ T*). Four deterministic probes pair the
/// centers z_i, z_k with the pool points of least v ≥ s in each cell, then
/// `budget` random pool pairs. One-sided: false means no witness was found.
#[allow(clippy::too_many_arguments)]
pub fn visible_pair(
    p: &Polytope,
    cells: &CellDecomposition,
    pool: &CellPool,
    i: usize,
    k: usize,
    s: f64,
    t_star: f64,
    budget: usize,
    seed: u64,
) -> bool {
    if i == k {
        return true;
    }
    let search = CapSearch::default_for(p.dim);
    let side = |j: usize| -> Vec<usize> { pool.by_cell[j].iter().map(|&q| q as usize).filter(|&q| pool.v[q] >= s).collect() };
    let (a_side, b_side) = (side(i), side(k));
    let edge_point = |pts: &[usize]| pts.iter().copied().min_by(|&a, &b| pool.v[a].total_cmp(&pool.v[b]).then(a.cmp(&b)));
    let zi = cells.centers()[i].as_slice();
    let zk = cells.centers()[k].as_slice();
    let mut probes: Vec<(&[f64], &[f64])> = vec![(zi, zk)];
    let ei = edge_point(&a_side).map(|q| pool.point(q));
    let ek = edge_point(&b_side).map(|q| pool.point(q));
    if let Some(b) = ek {
        probes.push((zi, b));
    }
    if let Some(a) = ei {
        probes.push((a, zk));
    }
    if let (Some(a), Some(b)) = (ei, ek) {
        probes.push((a, b));
    }
    if probes.iter().any(|(a, b)| segment_max_v_below(p, a, b, t_star, search)) {
        return true;
    }
    if a_side.is_empty() || b_side.is_empty() {
        return false;
    }
    let mut rng = stream_rng(seed, 0);
    (0..budget).any(|_| {
        let a = pool.point(a_side[rng.random_range(0..a_side.len())]);
        let b = pool.point(b_side[rng.random_range(0..b_side.len())]);
        segment_max_v_below(p, a, b, t_star, search)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DependencyGraph {
    pub m: usize,
    pub edges: Vec<[usize; 2]>,
    pub degrees: Vec<usize>,
    #[serde(rename = "D")]
    pub max_degree: usize,
    /// For each i, the sorted k with S'_k ⊂ L_i.
    pub l_membership: Vec<Vec<usize>>,
    pub probe_budget: usize,
    pub probed_pairs: usize,
    pub pruned_pairs: usize,
}

#[derive(Serialize)]
struct GraphExport<'a> {
    m: usize,
    edges: &'a [[usize; 2]],
    degrees: &'a [usize],
    #[serde(rename = "D")]
    d: usize,
}

impl DependencyGraph {
    /// From the L relation, with ij ∈ ℰ iff some k has S'_k ⊂ L_i ∩ L_j.
    pub fn from_membership(l_membership: Vec<Vec<usize>>) -> Self {
        let m = l_membership.len();
        let sets: Vec<Vec<bool>> = l_membership
            .iter()
            .map(|l| {
                let mut b = vec![false; m];
                for &k in l {
                    b[k] = true;
                }
                b
            })
            .collect();
        let mut edges = Vec::new();
        let mut degrees = vec![0; m];
        for i in 0..m {
            for j in i + 1..m {
                if (0..m).any(|k| sets[i][k] && sets[j][k]) {
                    edges.push([i, j]);
                    degrees[i] += 1;
                    degrees[j] += 1;
                }
            }
        }
        let max_degree = degrees.iter().copied().max().unwrap_or(0);
        DependencyGraph { m, edges, degrees, max_degree, l_membership, probe_budget: 0, probed_pairs: 0, pruned_pairs: 0 }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphExport { m: self.m, edges: &self.edges, degrees: &self.degrees, d: self.max_degree })
            .expect("graph export serializes")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for i in 0..self.m {
            out.push_str(&format!("  {i};\n"));
        }
        for [i, j] in &self.edges {
            out.push_str(&format!("  {i} -- {j};\n"));
        }
        out.push_str("}\n");
        out
    }

    pub fn is_reflexive(&self) -> bool {
        self.l_membership.iter().enumerate().all(|(i, l)| l.binary_search(&i).is_ok())
    }

    pub fn is_symmetric(&self) -> bool {
        self.l_membership.iter().enumerate().all(|(i, l)| l.iter().all(|&k| self.l_membership[k].binary_search(&i).is_ok()))
    }

    /// max_i Σ_{k : S'_k ⊂ L_i} |{j : S'_j ⊂ L_k}|.
    pub fn degree_bound(&self) -> usize {
        self.l_membership.iter().map(|l| l.iter().map(|&k| self.l_membership[k].len()).sum()).max().unwrap_or(0)
    }
}

/// |{k : S'_k ⊂ L_i}|.
pub fn count_sk_li(graph: &DependencyGraph, i: usize) -> usize {
    graph.l_membership[i].len()
}

/// The L relation over all pairs, then the graph. With `prune`, a pair is
/// probed only if K^γ of one cell meets the visibility superset cap
/// C^(βT*/v(z)) of the other's center.
#[allow(clippy::too_many_arguments)]
pub fn build_graph(
    p: &Polytope,
    cells: &CellDecomposition,
    pool: &CellPool,
    s: f64,
    budget: usize,
    seed: u64,
    prune: bool,
) -> DependencyGraph {
    let m = cells.m();
    let beta = superset_beta(p.dim);
    let caps = &cells.covering.system.caps;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |k| (i, k))).collect();
    let results: Vec<(bool, bool)> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, k))| {
            if prune {
                let sup_i = beta * cells.t_star / caps[i].volume;
                let sup_k = beta * cells.t_star / caps[k].volume;
                let g = 6.0 * cells.gamma;
                let reach = caps_intersect(p, &caps[i], sup_i, &caps[k], g) || caps_intersect(p, &caps[k], sup_k, &caps[i], g);
                if !reach {
                    return (false, true);
                }
            }
            let pair_seed = seed ^ (idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            (visible_pair(p, cells, pool, i, k, s, cells.t_star, budget, pair_seed), false)
        })
        .collect();
    let mut l: Vec<BTreeSet<usize>> = (0..m).map(|i| BTreeSet::from([i])).collect();
    let mut pruned = 0;
    for (&(i, k), &(vis, was_pruned)) in pairs.iter().zip(&results) {
        pruned += was_pruned as usize;
        if vis {
            l[i].insert(k);
            l[k].insert(i);
        }
    }
    let mut g = DependencyGraph::from_membership(l.into_iter().map(|s| s.into_iter().collect()).collect());
    g.probe_budget = budget;
    g.probed_pairs = pairs.len() - pruned;
    g.pruned_pairs = pruned;
    g
}
