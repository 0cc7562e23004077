use std::collections::HashMap;

use crate::geometry::polygon::{add, cross, dot, normalize, scale, sub};
use crate::geometry::{EdgeCondition, SphericalPolygon, Vec3};

/// Geodesic fan mesh of a spherical polygon.
///
/// Each fan triangle `(pole, V_k, V_{k+1})` carries a barycentric lattice with `n` segments per
/// side, pushed radially onto the sphere, so lattice lines are great-circle arcs and the polygon
/// edges are represented exactly.
#[derive(Debug, Clone)]
pub struct FanMesh {
    pub n: usize,
    pub nodes: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    /// Nodes on a Dirichlet edge.
    pub dirichlet: Vec<bool>,
    pole: Vec3,
    fan: Vec<(Vec3, Vec3)>,
    /// Node index of lattice point `(i, j)` of fan triangle `k`, row-major over `i + j <= n`.
    lattice: Vec<Vec<usize>>,
}

// Σ_{r<i} (n + 1 - r): offset of lattice row i
fn row_start(n: usize, i: usize) -> usize {
    i * (n + 1) - (i * i - i) / 2
}

impl FanMesh {
    pub fn new(poly: &SphericalPolygon, n: usize) -> Self {
        assert!(n >= 1, "mesh needs at least one segment per side");
        let pole = poly.pole;
        let m = poly.len();
        let mut nodes: Vec<Vec3> = Vec::new();
        let mut dirichlet: Vec<bool> = Vec::new();
        let mut index: HashMap<[i64; 3], usize> = HashMap::new();
        let mut lattice = Vec::with_capacity(m);
        let mut triangles = Vec::new();
        let mut fan = Vec::with_capacity(m);
        let quant = |v: Vec3| v.map(|c| (c * 1e9).round() as i64);
        for k in 0..m {
            let a = poly.vertices[k];
            let b = poly.vertices[(k + 1) % m];
            fan.push((a, b));
            let outer_dirichlet = poly.edges[k].condition == EdgeCondition::Dirichlet;
            let mut ids = Vec::with_capacity((n + 1) * (n + 2) / 2);
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
                    let x = add(pole, add(scale(sub(a, pole), s), scale(sub(b, pole), t)));
                    let w = normalize(x);
                    let on_outer = i + j == n;
                    let id = *index.entry(quant(w)).or_insert_with(|| {
                        nodes.push(w);
                        dirichlet.push(false);
                        nodes.len() - 1
                    });
                    if on_outer && outer_dirichlet {
                        dirichlet[id] = true;
                    }
                    ids.push(id);
                }
            }
            let at = |i: usize, j: usize| ids[row_start(n, i) + j];
            for i in 0..n {
                for j in 0..(n - i) {
                    triangles.push([at(i, j), at(i + 1, j), at(i, j + 1)]);
                    if i + j + 1 < n {
                        triangles.push([at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
                    }
                }
            }
            lattice.push(ids);
        }
        Self { n, nodes, triangles, dirichlet, pole, fan, lattice }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Piecewise-linear interpolation of nodal values at a direction; `None` outside the mesh.
    pub fn interpolate(&self, values: &[f64], w: Vec3) -> Option<f64> {
        let n = self.n;
        for (k, &(a, b)) in self.fan.iter().enumerate() {
            // w ∝ P + s (A - P) + t (B - P): solve the 3x3 system for (c, s, t) with c w - s e1 - t e2 = P
            let (e1, e2) = (sub(a, self.pole), sub(b, self.pole));
            let det = dot(w, cross(e1, e2));
            if det.abs() < 1e-300 {
                continue;
            }
            let c = dot(self.pole, cross(e1, e2)) / det;
            if c <= 0.0 {
                continue;
            }
            let x = sub(scale(w, c), self.pole);
            // x = s e1 + t e2
            let g11 = dot(e1, e1);
            let g12 = dot(e1, e2);
            let g22 = dot(e2, e2);
            let r1 = dot(x, e1);
            let r2 = dot(x, e2);
            let gdet = g11 * g22 - g12 * g12;
            let s = (r1 * g22 - r2 * g12) / gdet;
            let t = (g11 * r2 - g12 * r1) / gdet;
            let tol = 1e-12;
            if s < -tol || t < -tol || s + t > 1.0 + tol {
                continue;
            }
            let (fs, ft) = (s.max(0.0) * n as f64, t.max(0.0) * n as f64);
            let mut i = (fs.floor() as usize).min(n - 1);
            let mut j = (ft.floor() as usize).min(n - 1);
            if i + j > n - 1 {
                // clamp onto the outer row of cells
                let over = i + j - (n - 1);
                if i >= over {
                    i -= over;
                } else {
                    j -= over;
                }
            }
            let (ds, dt) = (fs - i as f64, ft - j as f64);
            let ids = &self.lattice[k];
            let at = |i: usize, j: usize| values[ids[row_start(n, i) + j]];
            let v = if ds + dt <= 1.0 || i + j + 1 >= n {
                let l0 = 1.0 - ds - dt;
                l0 * at(i, j) + ds * at(i + 1, j) + dt * at(i, j + 1)
            } else {
                // upper cell (i+1, j+1)
                let (es, et) = (1.0 - ds, 1.0 - dt);
                let l0 = 1.0 - es - et;
                l0 * at(i + 1, j + 1) + es * at(i, j + 1) + et * at(i + 1, j)
            };
            return Some(v);
        }
        None
    }
}
