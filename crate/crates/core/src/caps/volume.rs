//! Volumes of half-space slices P ∩ {u·x ≥ c}.

use crate::linalg::dot;
use crate::polytope::Polytope;

/// Volume of P ∩ {u·x ≥ c}. `apex` must lie on the hyperplane u·x = c; it
/// is the cone apex for the facet decomposition in d = 3 and should be
/// close to the slice for accuracy.
pub fn slice_volume_with_apex(p: &Polytope, u: &[f64], c: f64, apex: &[f64]) -> f64 {
    match p.dim {
        2 => polygon_clip_area(p.polygon(), u, c),
        3 => cone_volume_3d(p, u, c, apex),
        _ => general_slice_volume(p, u, c),
    }
}

/// Volume of P ∩ {u·x ≥ c} for unit `u`.
pub fn slice_volume(p: &Polytope, u: &[f64], c: f64) -> f64 {
    if p.dim == 3 {
        let s = p.support_point(u);
        let h = dot(u, &s);
        let apex: Vec<f64> = s.iter().zip(u).map(|(x, ui)| x - (h - c) * ui).collect();
        return cone_volume_3d(p, u, c, &apex);
    }
    slice_volume_with_apex(p, u, c, &[])
}

/// Area of the part of a counterclockwise polygon with u·x ≥ c, by streaming
/// Sutherland-Hodgman clipping and a shoelace sum anchored at the first
/// emitted vertex.
pub fn polygon_clip_area(poly: &[[f64; 2]], u: &[f64], c: f64) -> f64 {
    let n = poly.len();
    let mut first: Option<[f64; 2]> = None;
    let mut prev = [0.0; 2];
    let mut acc = 0.0;
    let mut emit = |q: [f64; 2], first: &mut Option<[f64; 2]>, prev: &mut [f64; 2]| {
        match first {
            None => *first = Some(q),
            Some(f) => {
                acc += (prev[0] - f[0]) * (q[1] - f[1]) - (prev[1] - f[1]) * (q[0] - f[0]);
            }
        }
        *prev = q;
    };
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let sa = u[0] * a[0] + u[1] * a[1] - c;
        let sb = u[0] * b[0] + u[1] * b[1] - c;
        if sa >= 0.0 {
            emit(a, &mut first, &mut prev);
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            let t = sa / (sa - sb);
            emit([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], &mut first, &mut prev);
        }
    }
    0.5 * acc.max(0.0)
}

/// Shoelace area of a counterclockwise polygon.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let o = poly[0];
    let mut acc = 0.0;
    for i in 1..n - 1 {
        let (a, b) = (poly[i], poly[i + 1]);
        acc += (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    }
    0.5 * acc
}

/// Cone decomposition from an apex on the cutting plane: the slice volume
/// is (1/3) Σ_f dist(apex, f) · area(f ∩ H).
fn cone_volume_3d(p: &Polytope, u: &[f64], c: f64, apex: &[f64]) -> f64 {
    let u = [u[0], u[1], u[2]];
    let apex = [apex[0], apex[1], apex[2]];
    let mut vol = 0.0;
    for f in p.facet_data_3d() {
        let lp = &f.corners;
        let mut above = false;
        let mut below = false;
        for q in lp {
            if dot3(&u, q) >= c {
                above = true;
            } else {
                below = true;
            }
        }
        if !above {
            continue;
        }
        let h = f.offset - dot3(&f.normal, &apex);
        let area = if below { clipped_loop_area(lp, &f.normal, &u, c) } else { f.area };
        vol += h * area;
    }
    (vol / 3.0).max(0.0)
}

#[inline(always)]
fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn clipped_loop_area(lp: &[[f64; 3]], n: &[f64; 3], u: &[f64; 3], c: f64) -> f64 {
    let m = lp.len();
    let mut first = [0.0; 3];
    let mut have_first = false;
    let mut prev = [0.0; 3];
    let mut acc = [0.0; 3];
    let mut emit = |q: [f64; 3]| {
        if have_first {
            let a = [prev[0] - first[0], prev[1] - first[1], prev[2] - first[2]];
            let b = [q[0] - first[0], q[1] - first[1], q[2] - first[2]];
            acc[0] += a[1] * b[2] - a[2] * b[1];
            acc[1] += a[2] * b[0] - a[0] * b[2];
            acc[2] += a[0] * b[1] - a[1] * b[0];
        } else {
            first = q;
            have_first = true;
        }
        prev = q;
    };
    let mut a = lp[m - 1];
    let mut sa = dot3(u, &a) - c;
    for &b in lp {
        let sb = dot3(u, &b) - c;
        if (sa >= 0.0) != (sb >= 0.0) {
            let t = sa / (sa - sb);
            emit([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]);
        }
        if sb >= 0.0 {
            emit(b);
        }
        a = b;
        sa = sb;
    }
    0.5 * dot3(&acc, n).max(0.0)
}

/// Vertices of P ∩ {u·x ≥ c}: the vertices on the positive side plus the
/// crossings of the cutting hyperplane with edges of P.
pub fn slice_vertices(p: &Polytope, u: &[f64], c: f64) -> Vec<Vec<f64>> {
    let s: Vec<f64> = p.vertices.iter().map(|v| dot(u, v) - c).collect();
    let mut out: Vec<Vec<f64>> = p
        .vertices
        .iter()
        .zip(&s)
        .filter(|(_, &si)| si >= 0.0)
        .map(|(v, _)| v.clone())
        .collect();
    for e in &p.lattice.faces_by_dim[1] {
        if e.len() != 2 {
            continue;
        }
        let (i, j) = (e[0], e[1]);
        if (s[i] > 0.0 && s[j] < 0.0) || (s[i] < 0.0 && s[j] > 0.0) {
            let t = s[i] / (s[i] - s[j]);
            out.push(p.vertices[i].iter().zip(&p.vertices[j]).map(|(a, b)| a + t * (b - a)).collect());
        }
    }
    out
}

fn general_slice_volume(p: &Polytope, u: &[f64], c: f64) -> f64 {
    let v = slice_vertices(p, u, c);
    if v.len() <= p.dim {
        return 0.0;
    }
    crate::hull::convex_hull(&v).volume
}
