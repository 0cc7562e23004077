use std::collections::BTreeMap;

use super::mesh::FanMesh;
use crate::geometry::polygon::{cross, dot, sub};

/// Symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    pub fn from_entries(n: usize, entries: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut data = Vec::with_capacity(entries.len());
        for (&(r, c), &v) in entries {
            indptr[r + 1] += 1;
            indices.push(c);
            data.push(v);
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Self { n, indptr, indices, data }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut s = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            y[r] = s;
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.data[k])))
    }

    /// `xᵀ A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut ay = vec![0.0; self.n];
        self.matvec(y, &mut ay);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }
}

/// P1 stiffness and consistent mass matrices restricted to the free (non-Dirichlet) nodes.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub stiffness: Csr,
    pub mass: Csr,
    /// Free index of each mesh node, `None` for Dirichlet nodes.
    pub free: Vec<Option<usize>>,
    pub n_free: usize,
}

impl FemSystem {
    pub fn assemble(mesh: &FanMesh) -> Self {
        let mut free = Vec::with_capacity(mesh.len());
        let mut n_free = 0;
        for &d in &mesh.dirichlet {
            free.push(if d {
                None
            } else {
                n_free += 1;
                Some(n_free - 1)
            });
        }
        let mut k = BTreeMap::new();
        let mut m = BTreeMap::new();
        for t in &mesh.triangles {
            let p = t.map(|i| mesh.nodes[i]);
            let (e1, e2) = (sub(p[1], p[0]), sub(p[2], p[0]));
            let nrm = cross(e1, e2);
            let area = 0.5 * dot(nrm, nrm).sqrt();
            // ∇λ_i · ∇λ_j = Dᵀ G⁻¹ D with G the Gram matrix of the edge vectors
            let (g11, g12, g22) = (dot(e1, e1), dot(e1, e2), dot(e2, e2));
            let det = g11 * g22 - g12 * g12;
            let gi = [[g22 / det, -g12 / det], [-g12 / det, g11 / det]];
            let d = [[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]];
            for a in 0..3 {
                for b in 0..3 {
                    let (Some(ra), Some(rb)) = (free[t[a]], free[t[b]]) else { continue };
                    let mut s = 0.0;
                    for x in 0..2 {
                        for y in 0..2 {
                            s += d[x][a] * gi[x][y] * d[y][b];
                        }
                    }
                    *k.entry((ra, rb)).or_insert(0.0) += area * s;
                    *m.entry((ra, rb)).or_insert(0.0) += area / 12.0 * if a == b { 2.0 } else { 1.0 };
                }
            }
        }
        Self { stiffness: Csr::from_entries(n_free, &k), mass: Csr::from_entries(n_free, &m), free, n_free }
    }

    /// Nodal values on the whole mesh from a free-node vector.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.free.iter().map(|f| f.map_or(0.0, |i| x[i])).collect()
    }
}
