//! Convex hulls in R^d by beneath-beyond insertion with conflict lists.
//!
//! The boundary is kept as a simplicial complex during insertion. Coplanar
//! simplices are merged afterwards into the facets of the polytope, so exact
//! degeneracies such as cube corners give the true face counts.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{dot, factorial, hyperplane_normal, orthonormal_basis, rank, sub};
use crate::polytope::lattice::FaceLattice;
use crate::{Error, Result, TAU_GEOM};

const MAXD: usize = 8;
const NONE: usize = usize::MAX;

/// A facet of the hull: outward unit normal, offset and its vertices
/// (indices into the input point list).
#[derive(Debug, Clone, Serialize)]
pub struct HullFacet {
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HullComplex {
    pub dim: usize,
    /// Indices of input points that are vertices of the hull, sorted.
    pub hull_vertices: Vec<usize>,
    pub facets: Vec<HullFacet>,
    pub f_vector: Vec<usize>,
    pub volume: f64,
    pub degenerate: bool,
    /// Boundary triangulation, each simplex given by `dim` input indices.
    #[serde(skip)]
    pub simplices: Vec<Vec<usize>>,
    #[serde(skip)]
    pub interior: Vec<f64>,
    #[serde(skip)]
    normals_flat: Vec<f64>,
    #[serde(skip)]
    offsets: Vec<f64>,
}

impl HullComplex {
    pub fn f_vector(&self) -> Result<Vec<usize>> {
        if self.degenerate {
            return Err(Error::DegenerateHull);
        }
        Ok(self.f_vector.clone())
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Membership in the closed hull with tolerance `TAU_GEOM`. Always false
    /// for degenerate hulls.
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        if self.degenerate {
            return false;
        }
        let d = self.dim;
        for (i, &b) in self.offsets.iter().enumerate() {
            let n = &self.normals_flat[i * d..(i + 1) * d];
            let mut s = 0.0;
            for k in 0..d {
                s += n[k] * x[k];
            }
            if s > b + TAU_GEOM {
                return false;
            }
        }
        true
    }

    /// Membership with an explicit outward tolerance.
    #[inline]
    pub fn contains_within(&self, x: &[f64], tol: f64) -> bool {
        if self.degenerate {
            return false;
        }
        let d = self.dim;
        self.offsets.iter().enumerate().all(|(i, &b)| {
            let n = &self.normals_flat[i * d..(i + 1) * d];
            n.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() <= b + tol
        })
    }

    /// Vertex sets of the ℓ-faces of a non-degenerate hull.
    pub fn faces(&self, ell: usize) -> Vec<Vec<usize>> {
        let d = self.dim;
        if self.degenerate || ell >= d {
            return Vec::new();
        }
        if ell == 0 {
            return self.hull_vertices.iter().map(|&v| vec![v]).collect();
        }
        if ell == d - 1 {
            return self.facets.iter().map(|f| f.vertices.clone()).collect();
        }
        let sets: Vec<Vec<usize>> = self.facets.iter().map(|f| f.vertices.clone()).collect();
        FaceLattice::from_facets(d, &sets).faces_by_dim[ell].clone()
    }
}

/// A convex polygon with counterclockwise vertices and an O(log n)
/// membership test by binary search over the fan from the first vertex.
#[derive(Debug, Clone)]
pub struct ConvexPolygon {
    pub vertices: Vec<[f64; 2]>,
}

#[inline(always)]
fn orient2(o: [f64; 2], a: [f64; 2], x: &[f64]) -> f64 {
    (a[0] - o[0]) * (x[1] - o[1]) - (a[1] - o[1]) * (x[0] - o[0])
}

impl ConvexPolygon {
    /// The boundary polygon of a non-degenerate planar hull of `flat`.
    pub fn from_hull(h: &HullComplex, flat: &[f64]) -> Option<Self> {
        if h.degenerate || h.dim != 2 {
            return None;
        }
        let mut pts: Vec<[f64; 2]> = h.hull_vertices.iter().map(|&i| [flat[2 * i], flat[2 * i + 1]]).collect();
        let n = pts.len() as f64;
        let c = pts.iter().fold([0.0; 2], |a, q| [a[0] + q[0] / n, a[1] + q[1] / n]);
        pts.sort_by(|a, b| {
            let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
            let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
            ta.total_cmp(&tb)
        });
        Some(ConvexPolygon { vertices: pts })
    }

    /// x lies within distance `tol` outside every edge line. The binary
    /// search is used for `tol == 0`; positive tolerances check every edge.
    #[inline]
    pub fn contains_within(&self, x: &[f64], tol: f64) -> bool {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return false;
        }
        if tol > 0.0 {
            return self.contains_clamped(x, tol);
        }
        let o = v[0];
        if orient2(o, v[1], x) < 0.0 || orient2(o, v[n - 1], x) > 0.0 {
            return false;
        }
        // sector: orient(o, v[lo]) ≥ 0 > orient(o, v[hi])
        let (mut lo, mut hi) = (1, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if orient2(o, v[mid], x) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        orient2(v[lo], v[hi], x) >= 0.0
    }

    fn contains_clamped(&self, x: &[f64], tol: f64) -> bool {
        let v = &self.vertices;
        let n = v.len();
        (0..n).all(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            orient2(a, b, x) >= -tol * len
        })
    }

    pub fn area(&self) -> f64 {
        crate::caps::volume::polygon_area(&self.vertices)
    }
}

#[derive(Clone)]
struct WFacet {
    verts: [usize; MAXD],
    nbr: [usize; MAXD],
    normal: [f64; MAXD],
    offset: f64,
    alive: bool,
    outside: Vec<usize>,
}

/// Convex hull with the default insertion seed.
pub fn convex_hull(points: &[Vec<f64>]) -> HullComplex {
    convex_hull_seeded(points, 0x9e37_79b9_7f4a_7c15)
}

/// Convex hull; `seed` only affects the insertion order.
pub fn convex_hull_seeded(points: &[Vec<f64>], seed: u64) -> HullComplex {
    let d = points.first().map(|p| p.len()).unwrap_or(2);
    let flat: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
    convex_hull_flat(&flat, d, seed)
}

/// Convex hull of `n = flat.len() / d` points stored row-major.
pub fn convex_hull_flat(flat: &[f64], d: usize, seed: u64) -> HullComplex {
    assert!((1..=MAXD).contains(&d), "dimension {d} unsupported");
    let n = flat.len() / d;
    let pt = |i: usize| &flat[i * d..(i + 1) * d];
    if n == 0 {
        return degenerate_result(d, Vec::new(), vec![0; d]);
    }
    let scale = bbox_scale(flat, d);
    let eps = TAU_GEOM * scale.max(1e-300);

    let init = match initial_simplex(flat, d, eps) {
        Ok(s) => s,
        Err(r) => return lower_dimensional(flat, d, r, seed),
    };

    let mut interior = vec![0.0; d];
    for &i in &init {
        for k in 0..d {
            interior[k] += pt(i)[k] / (d + 1) as f64;
        }
    }

    let mut facets: Vec<WFacet> = Vec::new();
    // facet j of the initial simplex omits init[j]; its neighbor across the
    // ridge opposite vertex init[k] is facet k.
    for j in 0..=d {
        let mut verts = [NONE; MAXD];
        let mut nbr = [NONE; MAXD];
        let mut c = 0;
        for k in 0..=d {
            if k != j {
                verts[c] = init[k];
                nbr[c] = k;
                c += 1;
            }
        }
        let mut f = WFacet {
            verts,
            nbr,
            normal: [0.0; MAXD],
            offset: 0.0,
            alive: true,
            outside: Vec::new(),
        };
        orient(&mut f, flat, d, &interior);
        facets.push(f);
    }

    let mut is_init = vec![false; n];
    for &i in &init {
        is_init[i] = true;
    }
    let (seeds, mut rest) = insertion_order(flat, d, &is_init);
    let mut conflict = vec![NONE; n];
    // seeds first, against the initial simplex only; the bulk of the points
    // is assigned once the seed hull is in place
    for &q in &seeds {
        let x = pt(q);
        for (fi, f) in facets.iter_mut().enumerate() {
            if signed_dist(f, x, d) > eps {
                conflict[q] = fi;
                f.outside.push(q);
                break;
            }
        }
    }

    let mut visible: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut mark: Vec<u32> = vec![0; facets.len()];
    let mut stamp: u32 = 0;
    let mut ridge_map: HashMap<[usize; MAXD], (usize, usize)> = HashMap::new();
    let mut new_ids: Vec<usize> = Vec::new();
    let mut orphans: Vec<usize> = Vec::new();

    for phase in 0..2 {
        if phase == 1 {
            // points outside the seed hull, inserted in seeded random order
            let live: Vec<usize> = (0..facets.len()).filter(|&i| facets[i].alive).collect();
            rest.retain(|&q| {
                let x = pt(q);
                for &fi in &live {
                    if signed_dist(&facets[fi], x, d) > eps {
                        conflict[q] = fi;
                        facets[fi].outside.push(q);
                        return true;
                    }
                }
                false
            });
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rest.shuffle(&mut rng);
        }
        let order = if phase == 0 { &seeds } else { &rest };
        for &p in order {
            let f0 = conflict[p];
            if f0 == NONE {
                continue;
            }
            let x = pt(p);
            stamp += 1;
            if mark.len() < facets.len() {
                mark.resize(facets.len(), 0);
            }
            // visible region: connected set of facets seeing p
            visible.clear();
            stack.clear();
            stack.push(f0);
            mark[f0] = stamp;
            while let Some(f) = stack.pop() {
                visible.push(f);
                for k in 0..d {
                    let g = facets[f].nbr[k];
                    if mark[g] != stamp && signed_dist(&facets[g], x, d) > eps {
                        mark[g] = stamp;
                        stack.push(g);
                    }
                }
            }
            // horizon ridges become new facets through p
            new_ids.clear();
            ridge_map.clear();
            for vi in 0..visible.len() {
                let f = visible[vi];
                for k in 0..d {
                    let g = facets[f].nbr[k];
                    if mark[g] == stamp {
                        continue;
                    }
                    let mut verts = [NONE; MAXD];
                    let mut nbr = [NONE; MAXD];
                    let mut c = 0;
                    for j in 0..d {
                        if j != k {
                            verts[c] = facets[f].verts[j];
                            c += 1;
                        }
                    }
                    verts[d - 1] = p;
                    nbr[d - 1] = g;
                    let mut nf = WFacet {
                        verts,
                        nbr,
                        normal: [0.0; MAXD],
                        offset: 0.0,
                        alive: true,
                        outside: Vec::new(),
                    };
                    orient(&mut nf, flat, d, &interior);
                    let id = facets.len();
                    facets.push(nf);
                    mark.push(0);
                    for j in 0..d {
                        if facets[g].nbr[j] == f {
                            facets[g].nbr[j] = id;
                        }
                    }
                    new_ids.push(id);
                    // sub-ridges through p link new facets to each other
                    for j in 0..d - 1 {
                        let mut key = [NONE; MAXD];
                        let mut c = 0;
                        for m in 0..d {
                            if m != j {
                                key[c] = facets[id].verts[m];
                                c += 1;
                            }
                        }
                        key[..d - 1].sort_unstable();
                        match ridge_map.remove(&key) {
                            Some((other, slot)) => {
                                facets[id].nbr[j] = other;
                                facets[other].nbr[slot] = id;
                            }
                            None => {
                                ridge_map.insert(key, (id, j));
                            }
                        }
                    }
                }
            }
            // reassign conflicts of dead facets
            orphans.clear();
            for &f in &visible {
                facets[f].alive = false;
                orphans.append(&mut facets[f].outside);
            }
            conflict[p] = NONE;
            for &q in &orphans {
                if q == p || conflict[q] == NONE {
                    continue;
                }
                let y = pt(q);
                conflict[q] = NONE;
                for &id in &new_ids {
                    if signed_dist(&facets[id], y, d) > eps {
                        conflict[q] = id;
                        facets[id].outside.push(q);
                        break;
                    }
                }
            }
        }
    }

    finish(flat, d, &facets, interior, scale)
}

#[inline]
fn signed_dist(f: &WFacet, x: &[f64], d: usize) -> f64 {
    let mut s = -f.offset;
    for k in 0..d {
        s += f.normal[k] * x[k];
    }
    s
}

fn orient(f: &mut WFacet, flat: &[f64], d: usize, interior: &[f64]) {
    let pts: Vec<&[f64]> = (0..d)
        .map(|j| &flat[f.verts[j] * d..(f.verts[j] + 1) * d])
        .collect();
    let nv = hyperplane_normal(&pts);
    let len = dot(&nv, &nv).sqrt();
    let mut off = 0.0;
    for k in 0..d {
        f.normal[k] = nv[k] / len;
        off += f.normal[k] * pts[0][k];
    }
    f.offset = off;
    if signed_dist(f, interior, d) > 0.0 {
        for k in 0..d {
            f.normal[k] = -f.normal[k];
        }
        f.offset = -f.offset;
        // keep a consistent orientation of the vertex list (not needed for
        // correctness, neighbors are tracked per slot)
    }
}

fn bbox_scale(flat: &[f64], d: usize) -> f64 {
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in flat.chunks_exact(d) {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut s: f64 = 0.0;
    for k in 0..d {
        s = s.max(hi[k] - lo[k]).max(hi[k].abs()).max(lo[k].abs());
    }
    s
}

/// d+1 affinely independent points with large spread, or the affine rank
/// when the input is degenerate.
fn initial_simplex(flat: &[f64], d: usize, eps: f64) -> std::result::Result<Vec<usize>, usize> {
    let n = flat.len() / d;
    let pt = |i: usize| &flat[i * d..(i + 1) * d];
    let mut i0 = 0;
    for i in 1..n {
        if pt(i)[0] < pt(i0)[0] {
            i0 = i;
        }
    }
    let mut chosen = vec![i0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for _ in 0..d {
        let o = pt(i0);
        let mut best = NONE;
        let mut best_d = 0.0;
        let mut w = [0.0f64; MAXD];
        for i in 0..n {
            let x = pt(i);
            for k in 0..d {
                w[k] = x[k] - o[k];
            }
            for b in &basis {
                let mut c = 0.0;
                for k in 0..d {
                    c += w[k] * b[k];
                }
                for k in 0..d {
                    w[k] -= c * b[k];
                }
            }
            let dd: f64 = w[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
            if dd > best_d {
                best_d = dd;
                best = i;
            }
        }
        if best == NONE || best_d <= eps * 10.0 {
            return Err(basis.len());
        }
        chosen.push(best);
        let v = sub(pt(best), o);
        let mut all = basis.clone();
        all.push(v);
        basis = orthonormal_basis(&all, 0.0);
    }
    Ok(chosen)
}

/// Extreme points along axis and diagonal directions, and every other point.
fn insertion_order(flat: &[f64], d: usize, is_init: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let n = is_init.len();
    let pt = |i: usize| &flat[i * d..(i + 1) * d];
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for k in 0..d {
        for s in [1.0, -1.0] {
            let mut u = vec![0.0; d];
            u[k] = s;
            dirs.push(u);
        }
    }
    if d <= 4 {
        for mask in 0..(1usize << d) {
            dirs.push(
                (0..d)
                    .map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 })
                    .collect(),
            );
        }
    }
    let mut best = vec![NONE; dirs.len()];
    let mut best_v = vec![f64::NEG_INFINITY; dirs.len()];
    for i in 0..n {
        if is_init[i] {
            continue;
        }
        let x = pt(i);
        for (j, u) in dirs.iter().enumerate() {
            let v = dot(u, x);
            if v > best_v[j] {
                best_v[j] = v;
                best[j] = i;
            }
        }
    }
    let mut seen = vec![false; n];
    let mut seeds = Vec::new();
    for &b in &best {
        if b != NONE && !seen[b] {
            seen[b] = true;
            seeds.push(b);
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !seen[i] && !is_init[i]).collect();
    (seeds, rest)
}

struct Dsu(Vec<usize>);
impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let nx = self.0[y];
            self.0[y] = r;
            y = nx;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn finish(
    flat: &[f64],
    d: usize,
    facets: &[WFacet],
    interior: Vec<f64>,
    scale: f64,
) -> HullComplex {
    let pt = |i: usize| &flat[i * d..(i + 1) * d];
    let alive: Vec<usize> = (0..facets.len()).filter(|&i| facets[i].alive).collect();
    let mut local = vec![NONE; facets.len()];
    for (li, &fi) in alive.iter().enumerate() {
        local[fi] = li;
    }

    let mut volume = 0.0;
    let mut simplices = Vec::with_capacity(alive.len());
    for &fi in &alive {
        let f = &facets[fi];
        let rows: Vec<&[f64]> = (0..d).map(|j| pt(f.verts[j])).collect();
        volume += crate::linalg::det_rows(&rows, &interior).abs();
        simplices.push(f.verts[..d].to_vec());
    }
    volume /= factorial(d);

    // merge coplanar neighbors
    let tol_off = TAU_GEOM * scale.max(1.0);
    let mut dsu = Dsu((0..alive.len()).collect());
    let mut any_merge = false;
    for (li, &fi) in alive.iter().enumerate() {
        let f = &facets[fi];
        for k in 0..d {
            let g = f.nbr[k];
            let lg = local[g];
            if lg == NONE || lg <= li {
                continue;
            }
            let h = &facets[g];
            let c: f64 = (0..d).map(|j| f.normal[j] * h.normal[j]).sum();
            if 1.0 - c < TAU_GEOM && (f.offset - h.offset).abs() < tol_off {
                dsu.union(li, lg);
                any_merge = true;
            }
        }
    }
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for li in 0..alive.len() {
        let r = dsu.find(li);
        let g = *group_of.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(li);
    }

    let mut merged: Vec<HullFacet> = Vec::with_capacity(groups.len());
    let mut facet_group = vec![0usize; alive.len()];
    for (gi, members) in groups.iter().enumerate() {
        let mut normal = vec![0.0; d];
        let mut verts: Vec<usize> = Vec::new();
        for &li in members {
            facet_group[li] = gi;
            let f = &facets[alive[li]];
            for k in 0..d {
                normal[k] += f.normal[k];
            }
            verts.extend_from_slice(&f.verts[..d]);
        }
        let len = dot(&normal, &normal).sqrt();
        for x in normal.iter_mut() {
            *x /= len;
        }
        verts.sort_unstable();
        verts.dedup();
        let offset = verts
            .iter()
            .map(|&v| dot(&normal, pt(v)))
            .fold(f64::NEG_INFINITY, f64::max);
        merged.push(HullFacet {
            vertices: verts,
            normal,
            offset,
        });
    }

    // drop boundary points that are not vertices (only possible after merging)
    let mut vert_groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (gi, f) in merged.iter().enumerate() {
        for &v in &f.vertices {
            vert_groups.entry(v).or_default().push(gi);
        }
    }
    let mut hull_vertices: Vec<usize> = Vec::new();
    for (&v, gs) in &vert_groups {
        let ok = if !any_merge {
            true
        } else {
            gs.len() >= d
                && rank(
                    &gs.iter()
                        .map(|&g| merged[g].normal.clone())
                        .collect::<Vec<_>>(),
                    1e-7,
                ) == d
        };
        if ok {
            hull_vertices.push(v);
        }
    }
    hull_vertices.sort_unstable();
    if any_merge {
        for f in merged.iter_mut() {
            f.vertices
                .retain(|v| hull_vertices.binary_search(v).is_ok());
        }
    }

    let f_vector = match d {
        2 => vec![hull_vertices.len(), merged.len()],
        3 => {
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for (li, &fi) in alive.iter().enumerate() {
                for k in 0..d {
                    let lg = local[facets[fi].nbr[k]];
                    let (a, b) = (facet_group[li], facet_group[lg]);
                    if a < b {
                        pairs.push((a, b));
                    }
                }
            }
            pairs.sort_unstable();
            pairs.dedup();
            vec![hull_vertices.len(), pairs.len(), merged.len()]
        }
        _ => {
            let sets: Vec<Vec<usize>> = merged.iter().map(|f| f.vertices.clone()).collect();
            FaceLattice::from_facets(d, &sets).f_vector()
        }
    };

    let normals_flat: Vec<f64> = merged
        .iter()
        .flat_map(|f| f.normal.iter().copied())
        .collect();
    let offsets: Vec<f64> = merged.iter().map(|f| f.offset).collect();
    HullComplex {
        dim: d,
        hull_vertices,
        facets: merged,
        f_vector,
        volume,
        degenerate: false,
        simplices,
        interior,
        normals_flat,
        offsets,
    }
}

fn degenerate_result(d: usize, hull_vertices: Vec<usize>, f_vector: Vec<usize>) -> HullComplex {
    HullComplex {
        dim: d,
        hull_vertices,
        facets: Vec::new(),
        f_vector,
        volume: 0.0,
        degenerate: true,
        simplices: Vec::new(),
        interior: Vec::new(),
        normals_flat: Vec::new(),
        offsets: Vec::new(),
    }
}

/// Hull of a point set whose affine hull has dimension `r < d`, computed in
/// coordinates of that affine hull.
fn lower_dimensional(flat: &[f64], d: usize, r: usize, seed: u64) -> HullComplex {
    let n = flat.len() / d;
    let pt = |i: usize| &flat[i * d..(i + 1) * d];
    let mut f_vector = vec![0; d];
    if r == 0 {
        f_vector[0] = 1;
        return degenerate_result(d, vec![0], f_vector);
    }
    let o = pt(0).to_vec();
    let diffs: Vec<Vec<f64>> = (1..n).map(|i| sub(pt(i), &o)).collect();
    let scale = bbox_scale(flat, d).max(1e-300);
    let basis = orthonormal_basis(&diffs, TAU_GEOM * scale * 10.0);
    let basis = &basis[..r.min(basis.len())];
    if r == 1 {
        let t: Vec<f64> = (0..n).map(|i| dot(&sub(pt(i), &o), &basis[0])).collect();
        let (mut lo, mut hi) = (0, 0);
        for i in 0..n {
            if t[i] < t[lo] {
                lo = i;
            }
            if t[i] > t[hi] {
                hi = i;
            }
        }
        let mut hv = vec![lo, hi];
        hv.sort_unstable();
        f_vector[0] = 2;
        if d > 1 {
            f_vector[1] = 1;
        }
        return degenerate_result(d, hv, f_vector);
    }
    let proj: Vec<f64> = (0..n)
        .flat_map(|i| {
            let w = sub(pt(i), &o);
            basis.iter().map(move |b| dot(&w, b)).collect::<Vec<_>>()
        })
        .collect();
    let sub_hull = convex_hull_flat(&proj, r, seed);
    for k in 0..r {
        f_vector[k] = sub_hull.f_vector.get(k).copied().unwrap_or(0);
    }
    if r < d {
        f_vector[r] = 1;
    }
    degenerate_result(d, sub_hull.hull_vertices, f_vector)
}
