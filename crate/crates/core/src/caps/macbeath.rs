//! Macbeath regions M(z, λ) = z + λ[(P − z) ∩ (z − P)].

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::caps::volume::polygon_area;
use crate::hull::convex_hull;
use crate::linalg::dot;
use crate::polytope::{halfspace_vertices, Polytope};
use crate::{Error, Result, TAU_GEOM};

#[derive(Debug, Clone)]
pub struct MacbeathRegion {
    pub center: Vec<f64>,
    pub factor: f64,
    /// H-representation: rows `normals[i]·x ≤ offsets[i]`.
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub vertices: Vec<Vec<f64>>,
    pub volume: f64,
}

impl MacbeathRegion {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.normals.iter().zip(&self.offsets).all(|(a, &b)| dot(a, x) <= b + TAU_GEOM)
    }

    pub fn body(&self) -> Result<Polytope> {
        Polytope::build_from_vertices(&self.vertices)
    }
}

/// The smallest λ with x ∈ M(z, λ): max_i |a_i·(x − z)| / (b_i − a_i·z).
#[inline]
pub fn gauge(p: &Polytope, z: &[f64], x: &[f64]) -> f64 {
    let d = p.dim;
    let nf = p.offsets();
    let normals = p.normals_flat();
    let mut g: f64 = 0.0;
    for (i, &b) in nf.iter().enumerate() {
        let a = &normals[i * d..(i + 1) * d];
        let mut az = 0.0;
        let mut ax = 0.0;
        for k in 0..d {
            az += a[k] * z[k];
            ax += a[k] * x[k];
        }
        let r = (ax - az).abs() / (b - az);
        if r > g {
            g = r;
        }
    }
    g
}

/// Rows of the H-representation of M(z, λ).
pub fn macbeath_halfspaces(p: &Polytope, z: &[f64], lambda: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut normals = Vec::with_capacity(2 * p.facets.len());
    let mut offsets = Vec::with_capacity(2 * p.facets.len());
    for f in &p.facets {
        let az = dot(&f.normal, z);
        let c = f.offset - az;
        normals.push(f.normal.clone());
        offsets.push(az + lambda * c);
        normals.push(f.normal.iter().map(|x| -x).collect());
        offsets.push(-az + lambda * c);
    }
    (normals, offsets)
}

pub fn macbeath(p: &Polytope, z: &[f64], lambda: f64) -> Result<MacbeathRegion> {
    if !(lambda > 0.0) {
        return Err(Error::PreconditionViolated(format!("factor must be positive, got {lambda}")));
    }
    if p.slack(z) <= TAU_GEOM {
        return Err(Error::BoundaryPoint);
    }
    let (normals, offsets) = macbeath_halfspaces(p, z, lambda);
    let unit = unit_vertices(p, z)?;
    let vertices: Vec<Vec<f64>> =
        unit.iter().map(|v| v.iter().zip(z).map(|(x, c)| c + lambda * (x - c)).collect()).collect();
    let volume = unit_volume(p, &unit) * lambda.powi(p.dim as i32);
    Ok(MacbeathRegion { center: z.to_vec(), factor: lambda, normals, offsets, vertices, volume })
}

/// u(z) = V(M(z, 1)).
pub fn u_value(p: &Polytope, z: &[f64]) -> Result<f64> {
    if p.slack(z) <= TAU_GEOM {
        return Err(Error::BoundaryPoint);
    }
    let unit = unit_vertices(p, z)?;
    Ok(unit_volume(p, &unit))
}

fn unit_vertices(p: &Polytope, z: &[f64]) -> Result<Vec<Vec<f64>>> {
    if p.dim == 2 {
        return Ok(planar_unit_polygon(p, z).into_iter().map(|q| q.to_vec()).collect());
    }
    let (normals, offsets) = macbeath_halfspaces(p, z, 1.0);
    halfspace_vertices(&normals, &offsets, z)
}

fn unit_volume(p: &Polytope, verts: &[Vec<f64>]) -> f64 {
    if p.dim == 2 {
        let poly: Vec<[f64; 2]> = verts.iter().map(|v| [v[0], v[1]]).collect();
        return polygon_area(&poly);
    }
    convex_hull(verts).volume
}

/// P ∩ (2z − P) as a counterclockwise polygon, by clipping P with each
/// reflected edge half-plane.
fn planar_unit_polygon(p: &Polytope, z: &[f64]) -> Vec<[f64; 2]> {
    let mut poly: Vec<[f64; 2]> = p.polygon().to_vec();
    for f in &p.facets {
        // reflected constraint: a·(2z − x) ≤ b  ⇔  −a·x ≤ b − 2a·z
        let a = [-f.normal[0], -f.normal[1]];
        let b = f.offset - 2.0 * (f.normal[0] * z[0] + f.normal[1] * z[1]);
        poly = clip_le(&poly, a, b);
    }
    poly
}

fn clip_le(poly: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = b - (a[0] * p[0] + a[1] * p[1]);
        let sq = b - (a[0] * q[0] + a[1] * q[1]);
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Whether M(z1, λ1) and M(z2, λ2) meet. Cheap separating-axis and
/// segment tests first, then a linear program maximizing a common slack δ:
/// the regions meet iff δ* ≥ −τ_geom.
pub fn macbeath_regions_intersect(p: &Polytope, z1: &[f64], l1: f64, z2: &[f64], l2: f64) -> bool {
    let d = p.dim;
    // facet normals as separating axes
    for f in &p.facets {
        let a1 = dot(&f.normal, z1);
        let a2 = dot(&f.normal, z2);
        let r1 = l1 * (f.offset - a1);
        let r2 = l2 * (f.offset - a2);
        if (a1 - a2).abs() > r1 + r2 + TAU_GEOM {
            return false;
        }
    }
    // a common point on the segment [z1, z2]
    let g1 = gauge(p, z1, z2);
    let g2 = gauge(p, z2, z1);
    if g1 == 0.0 || g2 == 0.0 || l1 / g1 + l2 / g2 >= 1.0 {
        return true;
    }
    let mut prob = Problem::new(OptimizationDirection::Maximize);
    let (lo, hi) = bbox(p);
    let margin = (l1.max(l2) + 1.0) * (0..d).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let xs: Vec<_> = (0..d).map(|k| prob.add_var(0.0, (lo[k] - margin, hi[k] + margin))).collect();
    let delta = prob.add_var(1.0, (-margin, 1.0));
    for (z, l) in [(z1, l1), (z2, l2)] {
        let (normals, offsets) = macbeath_halfspaces(p, z, l);
        for (a, b) in normals.iter().zip(offsets) {
            let mut row: Vec<(microlp::Variable, f64)> = xs.iter().copied().zip(a.iter().copied()).collect();
            row.push((delta, 1.0));
            prob.add_constraint(row.as_slice(), ComparisonOp::Le, b);
        }
    }
    match prob.solve() {
        Ok(out) => match out.solution() {
            Some(sol) => sol.objective() >= -TAU_GEOM,
            None => true,
        },
        Err(_) => false,
    }
}

fn bbox(p: &Polytope) -> (Vec<f64>, Vec<f64>) {
    let d = p.dim;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for v in &p.vertices {
        for k in 0..d {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}
