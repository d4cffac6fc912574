//! Small dense vector helpers. Dimensions here are tiny (2 to 6), so
//! everything works on slices and plain `Vec<f64>`.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
#[inline]
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Determinant of a square row-major matrix by partial-pivot elimination.
pub fn det(mut m: Vec<f64>, n: usize) -> f64 {
    let mut d = 1.0;
    for c in 0..n {
        let mut piv = c;
        for r in c + 1..n {
            if m[r * n + c].abs() > m[piv * n + c].abs() {
                piv = r;
            }
        }
        let p = m[piv * n + c];
        if p == 0.0 {
            return 0.0;
        }
        if piv != c {
            for k in 0..n {
                m.swap(piv * n + k, c * n + k);
            }
            d = -d;
        }
        d *= p;
        for r in c + 1..n {
            let f = m[r * n + c] / p;
            if f != 0.0 {
                for k in c..n {
                    m[r * n + k] -= f * m[c * n + k];
                }
            }
        }
    }
    d
}

/// Determinant of the matrix whose rows are `rows[i] - origin`.
pub fn det_rows(rows: &[&[f64]], origin: &[f64]) -> f64 {
    let n = origin.len();
    match n {
        2 => {
            let (a, b) = (rows[0], rows[1]);
            (a[0] - origin[0]) * (b[1] - origin[1]) - (a[1] - origin[1]) * (b[0] - origin[0])
        }
        3 => {
            let a = [
                rows[0][0] - origin[0],
                rows[0][1] - origin[1],
                rows[0][2] - origin[2],
            ];
            let b = [
                rows[1][0] - origin[0],
                rows[1][1] - origin[1],
                rows[1][2] - origin[2],
            ];
            let c = [
                rows[2][0] - origin[0],
                rows[2][1] - origin[1],
                rows[2][2] - origin[2],
            ];
            a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0])
        }
        _ => {
            let mut m = Vec::with_capacity(n * n);
            for r in rows {
                for k in 0..n {
                    m.push(r[k] - origin[k]);
                }
            }
            det(m, n)
        }
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Volume of the simplex spanned by `d` points and an apex in R^d.
pub fn simplex_volume(points: &[&[f64]], apex: &[f64]) -> f64 {
    det_rows(points, apex).abs() / factorial(apex.len())
}

/// A vector orthogonal to the `d - 1` difference vectors `pts[i] - pts[0]`
/// (generalized cross product). Not normalized; zero when degenerate.
pub fn hyperplane_normal(pts: &[&[f64]]) -> Vec<f64> {
    let d = pts[0].len();
    match d {
        2 => vec![-(pts[1][1] - pts[0][1]), pts[1][0] - pts[0][0]],
        3 => {
            let a = sub(pts[1], pts[0]);
            let b = sub(pts[2], pts[0]);
            vec![
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        }
        _ => {
            let rows: Vec<Vec<f64>> = (1..d).map(|i| sub(pts[i], pts[0])).collect();
            let mut n = vec![0.0; d];
            for (j, nj) in n.iter_mut().enumerate() {
                let mut m = Vec::with_capacity((d - 1) * (d - 1));
                for r in &rows {
                    for (k, &x) in r.iter().enumerate() {
                        if k != j {
                            m.push(x);
                        }
                    }
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                *nj = sign * det(m, d - 1);
            }
            n
        }
    }
}

/// Orthonormal basis of span{vectors} by modified Gram-Schmidt; vectors
/// with residual norm below `tol` are dropped.
pub fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = norm(&w);
        if n > tol {
            basis.push(w.iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Solve `A x = b` (row-major `n x n`) by Gaussian elimination with partial
/// pivoting. Returns `None` when `A` is numerically singular.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for c in 0..n {
        let mut piv = c;
        for r in c + 1..n {
            if a[r * n + c].abs() > a[piv * n + c].abs() {
                piv = r;
            }
        }
        if a[piv * n + c].abs() < 1e-300 {
            return None;
        }
        if piv != c {
            for k in 0..n {
                a.swap(piv * n + k, c * n + k);
            }
            b.swap(piv, c);
        }
        let p = a[c * n + c];
        for r in c + 1..n {
            let f = a[r * n + c] / p;
            if f != 0.0 {
                for k in c..n {
                    a[r * n + k] -= f * a[c * n + k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let mut s = b[c];
        for k in c + 1..n {
            s -= a[c * n + k] * x[k];
        }
        x[c] = s / a[c * n + c];
    }
    Some(x)
}

/// Numerical rank of a set of vectors.
pub fn rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    orthonormal_basis(vectors, tol).len()
}
