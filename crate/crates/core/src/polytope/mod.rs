//! The mother body: a full-dimensional convex polytope with both
//! representations, its face lattice and a sampler for the uniform law.

pub mod lattice;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hull::{convex_hull, convex_hull_flat};
use crate::linalg::{dot, factorial, norm, orthonormal_basis, sub};
use crate::{Error, Result, TAU_GEOM};
pub use lattice::FaceLattice;

#[derive(Debug, Clone, Serialize)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Indices into `Polytope::vertices`.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
    pub volume: f64,
    pub centroid: Vec<f64>,
    pub lattice: FaceLattice,
    /// Fan triangulation from the centroid: `dim` boundary points per simplex.
    simplex_points: Vec<f64>,
    cumulative: Vec<f64>,
    /// d = 2: counterclockwise vertex cycle.
    polygon: Vec<[f64; 2]>,
    /// d = 3: each facet's vertices in counterclockwise order seen from outside.
    loops: Vec<Vec<[f64; 3]>>,
    facet_data: Vec<FacetLoop>,
    normals_flat: Vec<f64>,
    offsets: Vec<f64>,
}

/// A facet of a 3-polytope in fixed-size form.
#[derive(Debug, Clone)]
pub struct FacetLoop {
    pub normal: [f64; 3],
    pub offset: f64,
    pub area: f64,
    /// Counterclockwise seen from outside.
    pub corners: Vec<[f64; 3]>,
}

impl Polytope {
    /// Hull of the given points with full combinatorial structure.
    pub fn build_from_vertices(points: &[Vec<f64>]) -> Result<Self> {
        let d = points
            .first()
            .map(|p| p.len())
            .ok_or(Error::DegenerateInput { rank: 0, dim: 0 })?;
        if d < 2 {
            return Err(Error::PreconditionViolated(
                "dimension must be at least 2".into(),
            ));
        }
        let hull = convex_hull(points);
        if hull.degenerate || points.len() <= d {
            let rank = crate::linalg::rank(
                &points
                    .iter()
                    .map(|p| sub(p, &points[0]))
                    .collect::<Vec<_>>(),
                TAU_GEOM,
            );
            return Err(Error::DegenerateInput { rank, dim: d });
        }
        let mut renum = vec![usize::MAX; points.len()];
        let vertices: Vec<Vec<f64>> = hull
            .hull_vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                renum[v] = i;
                points[v].clone()
            })
            .collect();
        let facets: Vec<Facet> = hull
            .facets
            .iter()
            .map(|f| {
                let mut vs: Vec<usize> = f.vertices.iter().map(|&v| renum[v]).collect();
                vs.sort_unstable();
                Facet {
                    normal: f.normal.clone(),
                    offset: f.offset,
                    vertices: vs,
                }
            })
            .collect();
        let sets: Vec<Vec<usize>> = facets.iter().map(|f| f.vertices.clone()).collect();
        let lattice = FaceLattice::from_facets(d, &sets);

        // centroid from the hull's own fan, then the sampling fan around it
        let mut centroid = vec![0.0; d];
        let mut total = 0.0;
        for s in &hull.simplices {
            let rows: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
            let v = crate::linalg::det_rows(&rows, &hull.interior).abs();
            for k in 0..d {
                let c = (hull.interior[k] + s.iter().map(|&i| points[i][k]).sum::<f64>())
                    / (d + 1) as f64;
                centroid[k] += v * c;
            }
            total += v;
        }
        for c in centroid.iter_mut() {
            *c /= total;
        }
        let volume = total / factorial(d);

        let mut simplex_points = Vec::with_capacity(hull.simplices.len() * d * d);
        let mut cumulative = Vec::with_capacity(hull.simplices.len());
        let mut acc = 0.0;
        for s in &hull.simplices {
            let rows: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
            acc += crate::linalg::det_rows(&rows, &centroid).abs();
            cumulative.push(acc);
            for r in rows {
                simplex_points.extend_from_slice(r);
            }
        }

        let normals_flat = facets
            .iter()
            .flat_map(|f| f.normal.iter().copied())
            .collect();
        let offsets = facets.iter().map(|f| f.offset).collect();
        let mut p = Polytope {
            dim: d,
            vertices,
            facets,
            volume,
            centroid,
            lattice,
            simplex_points,
            cumulative,
            polygon: Vec::new(),
            loops: Vec::new(),
            facet_data: Vec::new(),
            normals_flat,
            offsets,
        };
        match d {
            2 => p.polygon = p.ccw_polygon(),
            3 => {
                p.loops = p.facet_loops();
                p.facet_data = p
                    .loops
                    .iter()
                    .zip(&p.facets)
                    .map(|(l, f)| {
                        let normal = [f.normal[0], f.normal[1], f.normal[2]];
                        FacetLoop { normal, offset: f.offset, area: loop_area(l, &f.normal), corners: l.clone() }
                    })
                    .collect();
            }
            _ => {}
        }
        Ok(p)
    }

    /// Polytope {x : a_i·x ≤ b_i}; `interior` must satisfy every inequality
    /// strictly and the region must be bounded.
    pub fn from_halfspaces(
        normals: &[Vec<f64>],
        offsets: &[f64],
        interior: &[f64],
    ) -> Result<Self> {
        let verts = halfspace_vertices(normals, offsets, interior)?;
        Self::build_from_vertices(&verts)
    }

    pub fn flag_count(&self) -> u64 {
        self.lattice.flag_count
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.lattice.f_vector()
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(u, v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Vertex attaining the support value; the lexicographically smallest one
    /// when the supporting face is not a point.
    pub fn support_point(&self, u: &[f64]) -> Vec<f64> {
        let h = self.support(u);
        let mut best: Option<&Vec<f64>> = None;
        for v in &self.vertices {
            if dot(u, v) >= h - TAU_GEOM {
                best = match best {
                    Some(b) if lex_le(b, v) => Some(b),
                    _ => Some(v),
                };
            }
        }
        best.unwrap().clone()
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        self.slack(x) >= -TAU_GEOM
    }

    /// min_i (b_i − a_i·x): distance to the boundary for interior points,
    /// negative outside.
    #[inline]
    pub fn slack(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let mut m = f64::INFINITY;
        for (i, &b) in self.offsets.iter().enumerate() {
            let n = &self.normals_flat[i * d..(i + 1) * d];
            let s = b - dot(n, x);
            if s < m {
                m = s;
            }
        }
        m
    }

    pub fn width(&self, u: &[f64]) -> f64 {
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        self.support(u) + self.support(&neg)
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sample_uniform_into(rng, &mut out);
        out
    }

    /// Uniform point written into `out`: a fan simplex is picked with
    /// probability proportional to its volume, then sorted-uniform spacings
    /// give barycentric weights.
    pub fn sample_uniform_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.dim;
        let total = *self.cumulative.last().unwrap();
        let r = rng.random::<f64>() * total;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1);
        let base = &self.simplex_points[idx * d * d..(idx + 1) * d * d];
        let mut u = [0.0f64; 9];
        for x in u.iter_mut().take(d) {
            *x = rng.random::<f64>();
        }
        u[..d].sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        // weights: u0, u1-u0, ..., 1-u_{d-1}; the first goes to the centroid
        out.copy_from_slice(&self.centroid);
        let mut weights = [0.0f64; 9];
        let mut prev = 0.0;
        for k in 0..d {
            weights[k] = u[k] - prev;
            prev = u[k];
        }
        weights[d] = 1.0 - prev;
        for k in 0..d {
            out[k] *= weights[0];
        }
        for j in 0..d {
            let w = weights[j + 1];
            let p = &base[j * d..(j + 1) * d];
            for k in 0..d {
                out[k] += w * p[k];
            }
        }
    }

    /// Affine copy scaled about the centroid to unit volume.
    pub fn normalize(&self) -> Result<Self> {
        let f = self.volume.powf(-1.0 / self.dim as f64);
        let verts: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&self.centroid)
                    .map(|(x, c)| c + f * (x - c))
                    .collect()
            })
            .collect();
        Self::build_from_vertices(&verts)
    }

    pub fn polygon(&self) -> &[[f64; 2]] {
        &self.polygon
    }

    pub fn facet_loops_3d(&self) -> &[Vec<[f64; 3]>] {
        &self.loops
    }

    /// d = 3: facet planes with their corner loops and areas.
    pub fn facet_data_3d(&self) -> &[FacetLoop] {
        &self.facet_data
    }

    pub fn normals_flat(&self) -> &[f64] {
        &self.normals_flat
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    fn ccw_polygon(&self) -> Vec<[f64; 2]> {
        let c = &self.centroid;
        let mut vs: Vec<[f64; 2]> = self.vertices.iter().map(|v| [v[0], v[1]]).collect();
        vs.sort_by(|a, b| {
            let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
            let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
            ta.partial_cmp(&tb).unwrap()
        });
        vs
    }

    fn facet_loops(&self) -> Vec<Vec<[f64; 3]>> {
        self.facets
            .iter()
            .map(|f| {
                let pts: Vec<&Vec<f64>> = f.vertices.iter().map(|&i| &self.vertices[i]).collect();
                let mut c = [0.0; 3];
                for p in &pts {
                    for k in 0..3 {
                        c[k] += p[k] / pts.len() as f64;
                    }
                }
                let n = &f.normal;
                let e1 = crate::linalg::normalized(&sub(pts[0], &c));
                let e2 = [
                    n[1] * e1[2] - n[2] * e1[1],
                    n[2] * e1[0] - n[0] * e1[2],
                    n[0] * e1[1] - n[1] * e1[0],
                ];
                let mut l: Vec<(f64, [f64; 3])> = pts
                    .iter()
                    .map(|p| {
                        let w = sub(p, &c);
                        (dot(&w, &e2).atan2(dot(&w, &e1)), [p[0], p[1], p[2]])
                    })
                    .collect();
                l.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                l.into_iter().map(|x| x.1).collect()
            })
            .collect()
    }
}

fn loop_area(l: &[[f64; 3]], n: &[f64]) -> f64 {
    let o = l[0];
    let mut acc = [0.0; 3];
    for w in l[1..].windows(2) {
        let a = [w[0][0] - o[0], w[0][1] - o[1], w[0][2] - o[2]];
        let b = [w[1][0] - o[0], w[1][1] - o[1], w[1][2] - o[2]];
        acc[0] += a[1] * b[2] - a[2] * b[1];
        acc[1] += a[2] * b[0] - a[0] * b[2];
        acc[2] += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * (acc[0] * n[0] + acc[1] * n[1] + acc[2] * n[2]).abs()
}

fn lex_le(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    true
}

/// Vertices of the bounded polyhedron {x : a_i·x ≤ b_i} via the dual hull
/// around a strictly interior point.
pub fn halfspace_vertices(
    normals: &[Vec<f64>],
    offsets: &[f64],
    interior: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let d = interior.len();
    let mut dual = Vec::with_capacity(normals.len() * d);
    for (a, &b) in normals.iter().zip(offsets) {
        let bp = b - dot(a, interior);
        if bp <= 0.0 {
            return Err(Error::PreconditionViolated(
                "interior point is not strictly inside".into(),
            ));
        }
        for &x in a {
            dual.push(x / bp);
        }
    }
    let h = convex_hull_flat(&dual, d, 17);
    if h.degenerate {
        return Err(Error::DegenerateInput {
            rank: d - 1,
            dim: d,
        });
    }
    let mut out = Vec::with_capacity(h.facets.len());
    for f in &h.facets {
        if f.offset <= 0.0 {
            return Err(Error::PreconditionViolated(
                "halfspace region is unbounded".into(),
            ));
        }
        out.push(
            f.normal
                .iter()
                .zip(interior)
                .map(|(n, c)| c + n / f.offset)
                .collect(),
        );
    }
    Ok(out)
}

/// Named built-ins: `cube:d` = [0,1]^d, `simplex:d` = conv{0, e_1..e_d},
/// `cross-polytope:d` = conv{±e_i}.
pub fn builtin(name: &str, d: usize) -> Result<Polytope> {
    if d < 2 {
        return Err(Error::Parse(format!("dimension {d} must be at least 2")));
    }
    let pts: Vec<Vec<f64>> = match name {
        "cube" => (0..1usize << d)
            .map(|m| (0..d).map(|k| (m >> k & 1) as f64).collect())
            .collect(),
        "simplex" => {
            let mut v = vec![vec![0.0; d]];
            for i in 0..d {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                v.push(e);
            }
            v
        }
        "cross-polytope" => {
            let mut v = Vec::new();
            for i in 0..d {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; d];
                    e[i] = s;
                    v.push(e);
                }
            }
            v
        }
        other => return Err(Error::Parse(format!("unknown built-in polytope '{other}'"))),
    };
    Polytope::build_from_vertices(&pts)
}

/// Polytope input: a built-in name with dimension, or explicit vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolytopeSpec {
    Named(String),
    Vertices { dim: usize, vertices: Vec<Vec<f64>> },
}

impl PolytopeSpec {
    /// Parses `cube:2`-style names or an inline JSON document.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('{') {
            return serde_json::from_str(t)
                .map_err(|e| Error::Parse(format!("polytope JSON: {e}")));
        }
        Ok(PolytopeSpec::Named(t.to_string()))
    }

    pub fn build(&self) -> Result<Polytope> {
        match self {
            PolytopeSpec::Named(s) => {
                let (name, dim) = s
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("expected name:dim, got '{s}'")))?;
                let d: usize = dim
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad dimension in '{s}'")))?;
                builtin(name, d)
            }
            PolytopeSpec::Vertices { dim, vertices } => {
                if vertices.iter().any(|v| v.len() != *dim) {
                    return Err(Error::Parse("vertex length does not match dim".into()));
                }
                Polytope::build_from_vertices(vertices)
            }
        }
    }
}

/// Checks used by tests and reports: vertex-facet tightness counts.
pub fn tightness_ok(p: &Polytope) -> bool {
    let d = p.dim;
    let vert_ok = p.vertices.iter().all(|v| {
        p.facets
            .iter()
            .filter(|f| (dot(&f.normal, v) - f.offset).abs() <= 1e-7)
            .count()
            >= d
    });
    let facet_ok = p.facets.iter().all(|f| {
        let pts: Vec<&Vec<f64>> = p
            .vertices
            .iter()
            .filter(|v| (dot(&f.normal, v) - f.offset).abs() <= 1e-7)
            .collect();
        if pts.len() < d {
            return false;
        }
        let diffs: Vec<Vec<f64>> = pts.iter().map(|v| sub(v, pts[0])).collect();
        orthonormal_basis(&diffs, 1e-9).len() == d - 1
    });
    let inside = p.vertices.iter().all(|v| {
        p.facets
            .iter()
            .all(|f| dot(&f.normal, v) <= f.offset + TAU_GEOM)
    });
    vert_ok
        && facet_ok
        && inside
        && p.facets
            .iter()
            .all(|f| (norm(&f.normal) - 1.0).abs() < 1e-12)
}
