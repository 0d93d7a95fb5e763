//! Reference computations shared by the integration tests. Nothing here calls
//! into the library's quadrature or solver code.

#![allow(dead_code)]

use std::f64::consts::PI;

use bmofem::{Mesh, Point};
use nalgebra::{DMatrix, DVector};

/// Gauss-Legendre nodes and weights on `[0, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

/// Integral over the triangle `(v0, v1, v2)` through the collapsed map
/// `v0 + u (v1 - v0) + u w (v2 - v1)`, graded geometrically towards `u = 0`
/// so that a singularity at `v0` is resolved.
pub fn duffy_integral<const N: usize>(tri: [Point; 3], f: impl Fn(Point) -> [f64; N]) -> [f64; N] {
    let [v0, v1, v2] = tri;
    let e1 = [v1[0] - v0[0], v1[1] - v0[1]];
    let e2 = [v2[0] - v1[0], v2[1] - v1[1]];
    let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let gl = gauss_legendre(12);
    let mut total = [0.0; N];
    for j in 0..48 {
        let (ua, ub) = (0.5f64.powi(j + 1), 0.5f64.powi(j));
        for &(su, wu) in &gl {
            let u = ua + (ub - ua) * su;
            for piece in 0..4 {
                let (wa, wb) = (piece as f64 / 4.0, (piece + 1) as f64 / 4.0);
                for &(sw, ww) in &gl {
                    let w = wa + (wb - wa) * sw;
                    let x = [v0[0] + u * e1[0] + u * w * e2[0], v0[1] + u * e1[1] + u * w * e2[1]];
                    let weight = wu * (ub - ua) * ww * (wb - wa) * u * jac;
                    let v = f(x);
                    for k in 0..N {
                        total[k] += weight * v[k];
                    }
                }
            }
        }
    }
    total
}

/// Cell average, with the collapsed vertex placed at the vertex nearest `hot`.
pub fn duffy_average<const N: usize>(tri: [Point; 3], hot: Point, f: impl Fn(Point) -> [f64; N]) -> [f64; N] {
    let d = |p: Point| (p[0] - hot[0]).hypot(p[1] - hot[1]);
    let i = (0..3).min_by(|&a, &b| d(tri[a]).total_cmp(&d(tri[b]))).unwrap();
    let rotated = [tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]];
    let area = 0.5
        * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[1][1] - tri[0][1]) * (tri[2][0] - tri[0][0])).abs();
    let mut v = duffy_integral(rotated, f);
    for x in v.iter_mut() {
        *x /= area;
    }
    v
}

/// Gradients of the three barycentric coordinates of a triangle.
pub fn barycentric_gradients(t: [Point; 3]) -> [[f64; 2]; 3] {
    let det = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (b, c) = (t[(i + 1) % 3], t[(i + 2) % 3]);
        // rotate the opposite edge by -90 degrees
        g[i] = [(b[1] - c[1]) / det, (c[0] - b[0]) / det];
    }
    g
}

/// Dense Hodge split: solves the identity-coefficient Galerkin system with
/// a Cholesky factorisation and returns per-vertex potential and per-cell
/// remainder `s - grad(phi)`.
pub fn dense_hodge(mesh: &Mesh, s: &[[f64; 2]]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let interior: Vec<usize> = (0..mesh.num_vertices())
        .filter(|&v| !mesh.boundary_flags()[v])
        .collect();
    let mut index = vec![usize::MAX; mesh.num_vertices()];
    for (i, &v) in interior.iter().enumerate() {
        index[v] = i;
    }
    let n = interior.len();
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (c, cell) in mesh.cells().iter().enumerate() {
        let t = [
            mesh.vertices()[cell[0]],
            mesh.vertices()[cell[1]],
            mesh.vertices()[cell[2]],
        ];
        let g = barycentric_gradients(t);
        let area = 0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs();
        for a in 0..3 {
            let i = index[cell[a]];
            if i == usize::MAX {
                continue;
            }
            b[i] += area * (s[c][0] * g[a][0] + s[c][1] * g[a][1]);
            for bb in 0..3 {
                let j = index[cell[bb]];
                if j != usize::MAX {
                    k[(i, j)] += area * (g[a][0] * g[bb][0] + g[a][1] * g[bb][1]);
                }
            }
        }
    }
    let x = k.cholesky().expect("stiffness is SPD").solve(&b);
    let mut phi = vec![0.0; mesh.num_vertices()];
    for (i, &v) in interior.iter().enumerate() {
        phi[v] = x[i];
    }
    let sigma = mesh
        .cells()
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let t = [
                mesh.vertices()[cell[0]],
                mesh.vertices()[cell[1]],
                mesh.vertices()[cell[2]],
            ];
            let g = barycentric_gradients(t);
            let mut grad = [0.0; 2];
            for a in 0..3 {
                grad[0] += phi[cell[a]] * g[a][0];
                grad[1] += phi[cell[a]] * g[a][1];
            }
            [s[c][0] - grad[0], s[c][1] - grad[1]]
        })
        .collect();
    (phi, sigma)
}

/// `(sum_K |K| |v_K|^p)^(1/p)` computed from the mesh vertices directly.
pub fn dense_lp(mesh: &Mesh, v: &[[f64; 2]], p: f64) -> f64 {
    let mut total = 0.0;
    for (c, cell) in mesh.cells().iter().enumerate() {
        let t = [
            mesh.vertices()[cell[0]],
            mesh.vertices()[cell[1]],
            mesh.vertices()[cell[2]],
        ];
        let area = 0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs();
        total += area * v[c][0].hypot(v[c][1]).powf(p);
    }
    total.powf(1.0 / p)
}

/// Integral over `tri` split uniformly into `4^depth` sub-triangles; the ones
/// with a vertex at `hot` use the graded collapsed rule, the rest a plain
/// collapsed 8 x 8 Gauss product. Resolves kinks that cross the cell.
pub fn refined_integral<const N: usize>(
    tri: [Point; 3],
    hot: Point,
    depth: u32,
    f: &impl Fn(Point) -> [f64; N],
) -> [f64; N] {
    if depth == 0 {
        let touch = |p: Point| (p[0] - hot[0]).hypot(p[1] - hot[1]) < 1e-14;
        if let Some(i) = (0..3).find(|&i| touch(tri[i])) {
            return duffy_integral([tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]], f);
        }
        return plain_collapsed(tri, f);
    }
    let mid = |a: Point, b: Point| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let [a, b, c] = tri;
    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
    let mut total = [0.0; N];
    for t in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]] {
        let v = refined_integral(t, hot, depth - 1, f);
        for k in 0..N {
            total[k] += v[k];
        }
    }
    total
}

fn plain_collapsed<const N: usize>(tri: [Point; 3], f: &impl Fn(Point) -> [f64; N]) -> [f64; N] {
    let [v0, v1, v2] = tri;
    let e1 = [v1[0] - v0[0], v1[1] - v0[1]];
    let e2 = [v2[0] - v1[0], v2[1] - v1[1]];
    let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let gl = gauss_legendre(8);
    let mut total = [0.0; N];
    for &(u, wu) in &gl {
        for &(w, ww) in &gl {
            let x = [v0[0] + u * e1[0] + u * w * e2[0], v0[1] + u * e1[1] + u * w * e2[1]];
            let v = f(x);
            for k in 0..N {
                total[k] += wu * ww * u * jac * v[k];
            }
        }
    }
    total
}

pub fn triangle_area(t: [Point; 3]) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs()
}
