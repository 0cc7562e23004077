use serde::{Deserialize, Serialize};

use super::planes::{BoundaryPlaneSet, PlaneKind};
use super::sectors::{Sector, SectorTable};
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Boundary condition carried by an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeCondition {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolygonEdge {
    /// Unit normal of the great-circle plane, pointing into the polygon.
    pub normal: Vec3,
    pub condition: EdgeCondition,
    pub pair: Option<(usize, usize)>,
}

/// Convex spherical polygon bounded by great-circle arcs.
///
/// Edge `i` joins `vertices[i]` to `vertices[i + 1]` (cyclically). Vertices run counterclockwise
/// seen from outside the sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphericalPolygon {
    pub vertices: Vec<Vec3>,
    pub edges: Vec<PolygonEdge>,
    pub pole: Vec3,
}

const VERTEX_TOL: f64 = 1e-10;

impl SphericalPolygon {
    /// The cone of a 3D ordering sector bounded by its hard walls.
    pub fn from_sector(planes: &BoundaryPlaneSet, table: &SectorTable, sector: &Sector) -> Result<Self> {
        if planes.dim != 3 {
            return Err(Error::Chart(format!("spherical polygons need a 3D relative space, got {}", planes.dim)));
        }
        let mut walls: Vec<(Vec3, (usize, usize))> = Vec::new();
        for p in planes.planes.iter().filter(|p| p.kind == PlaneKind::HardWall) {
            let u = p.unit_normal();
            let (i, j) = p.pair;
            // inside: q_i - q_j has the sign fixed by the sector
            let s = if table.precedes(sector.key, i, j) == Some(true) { -1.0 } else { 1.0 };
            walls.push(([s * u[0], s * u[1], s * u[2]], p.pair));
        }
        let inside = |v: Vec3| walls.iter().all(|(n, _)| dot(*n, v) >= -VERTEX_TOL);
        let mut verts: Vec<Vec3> = Vec::new();
        for a in 0..walls.len() {
            for b in (a + 1)..walls.len() {
                let c = cross(walls[a].0, walls[b].0);
                if dot(c, c) < 1e-20 {
                    continue;
                }
                let c = normalize(c);
                for cand in [c, scale(c, -1.0)] {
                    if inside(cand) && !verts.iter().any(|v| dot(sub(*v, cand), sub(*v, cand)) < 1e-16) {
                        verts.push(cand);
                    }
                }
            }
        }
        if verts.len() < 3 {
            return Err(Error::Chart(format!(
                "sector {} is not a bounded polygon ({} vertices); choose a different pole",
                sector.label(),
                verts.len()
            )));
        }
        let pole = normalize(verts.iter().fold([0.0; 3], |acc, v| add(acc, *v)));
        sort_around(&mut verts, pole);
        let mut edges = Vec::with_capacity(verts.len());
        for k in 0..verts.len() {
            let (a, b) = (verts[k], verts[(k + 1) % verts.len()]);
            let (n, pair) = walls
                .iter()
                .find(|(n, _)| dot(*n, a).abs() < 1e-9 && dot(*n, b).abs() < 1e-9)
                .copied()
                .ok_or_else(|| Error::Chart(format!("no wall joins consecutive vertices of {}", sector.label())))?;
            edges.push(PolygonEdge { normal: n, condition: EdgeCondition::Dirichlet, pair: Some(pair) });
        }
        let poly = Self { vertices: verts, edges, pole };
        poly.check_hemisphere()?;
        Ok(poly)
    }

    /// Hemisphere `n · r > 0`, represented with four boundary points.
    pub fn hemisphere(normal: Vec3) -> Self {
        let p = normalize(normal);
        let (e1, e2) = tangent_basis(p);
        let vertices: Vec<Vec3> = (0..4)
            .map(|k| {
                let t = std::f64::consts::FRAC_PI_2 * k as f64;
                add(scale(e1, t.cos()), scale(e2, t.sin()))
            })
            .collect();
        let edges = (0..4)
            .map(|_| PolygonEdge { normal: p, condition: EdgeCondition::Dirichlet, pair: None })
            .collect();
        Self { vertices, edges, pole: p }
    }

    /// Lune `n_a · r > 0, n_b · r > 0`, with the two antipodal corners and the two edge midpoints.
    pub fn lune(n_a: Vec3, n_b: Vec3) -> Result<Self> {
        let (a, b) = (normalize(n_a), normalize(n_b));
        let axis = cross(a, b);
        if dot(axis, axis) < 1e-20 {
            return Err(Error::Chart("lune planes are parallel".into()));
        }
        let axis = normalize(axis);
        let pole = normalize(add(a, b));
        // edge midpoints: in plane a (resp. b), perpendicular to the axis, on the inner side
        let mid_a = {
            let m = normalize(cross(axis, a));
            if dot(m, b) > 0.0 { m } else { scale(m, -1.0) }
        };
        let mid_b = {
            let m = normalize(cross(axis, b));
            if dot(m, a) > 0.0 { m } else { scale(m, -1.0) }
        };
        let mut verts = vec![axis, mid_a, scale(axis, -1.0), mid_b];
        let mut normals = vec![a, a, b, b];
        if dot(cross(sub(verts[0], pole), sub(verts[1], pole)), pole) < 0.0 {
            verts = vec![axis, mid_b, scale(axis, -1.0), mid_a];
            normals = vec![b, b, a, a];
        }
        let edges = normals
            .into_iter()
            .map(|n| PolygonEdge { normal: n, condition: EdgeCondition::Dirichlet, pair: None })
            .collect();
        Ok(Self { vertices: verts, edges, pole })
    }

    /// General constructor from ordered vertices; edge normals are inferred.
    pub fn from_vertices(vertices: Vec<Vec3>, conditions: Vec<EdgeCondition>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 || conditions.len() != n {
            return Err(Error::Chart("polygon needs >= 3 vertices and one condition per edge".into()));
        }
        let vertices: Vec<Vec3> = vertices.into_iter().map(normalize).collect();
        let pole = normalize(vertices.iter().fold([0.0; 3], |acc, v| add(acc, *v)));
        let edges = (0..n)
            .map(|k| {
                let c = normalize(cross(vertices[k], vertices[(k + 1) % n]));
                let normal = if dot(c, pole) >= 0.0 { c } else { scale(c, -1.0) };
                PolygonEdge { normal, condition: conditions[k], pair: None }
            })
            .collect();
        let p = Self { vertices, edges, pole };
        p.check_hemisphere()?;
        Ok(p)
    }

    fn check_hemisphere(&self) -> Result<()> {
        for v in &self.vertices {
            if dot(*v, self.pole) <= 1e-6 {
                return Err(Error::Chart("polygon touches the chart equator; choose a different pole".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, w: Vec3, tol: f64) -> bool {
        self.edges.iter().all(|e| dot(e.normal, w) >= -tol)
    }

    /// Solid angle, summing fan triangles from the pole.
    pub fn area(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|k| spherical_triangle_area(self.pole, self.vertices[k], self.vertices[(k + 1) % n]))
            .sum()
    }

    /// Keeps the side `mirror · r >= 0` and marks the cut with `condition`.
    pub fn clip(&self, mirror: Vec3, condition: EdgeCondition) -> Result<Self> {
        let m = normalize(mirror);
        let n = self.len();
        let sign = |v: Vec3| {
            let d = dot(m, v);
            if d.abs() < VERTEX_TOL { 0 } else if d > 0.0 { 1 } else { -1 }
        };
        let cut = PolygonEdge { normal: m, condition, pair: None };
        let mut out: Vec<(Vec3, PolygonEdge)> = Vec::new();
        for k in 0..n {
            let (a, b) = (self.vertices[k], self.vertices[(k + 1) % n]);
            let (sa, sb) = (sign(a), sign(b));
            let e = &self.edges[k];
            let crossing = || {
                let (da, db) = (dot(m, a), dot(m, b));
                let t = da / (da - db);
                normalize(add(a, scale(sub(b, a), t)))
            };
            match (sa, sb) {
                (sa, sb) if sa >= 0 && sb >= 0 => out.push((a, e.clone())),
                (1, -1) => {
                    out.push((a, e.clone()));
                    out.push((crossing(), cut.clone()));
                }
                (0, -1) => out.push((a, cut.clone())),
                (-1, 1) => out.push((crossing(), e.clone())),
                _ => {}
            }
        }
        if out.len() < 3 {
            return Err(Error::Chart("mirror plane leaves a degenerate polygon".into()));
        }
        let pole = normalize(out.iter().fold([0.0; 3], |acc, (v, _)| add(acc, *v)));
        let (vertices, edges) = out.into_iter().unzip();
        let p = Self { vertices, edges, pole };
        p.check_hemisphere()?;
        Ok(p)
    }

    /// Relabels vertices so that edge 1 and edge 2 carry the given pairs (trying reversal too).
    pub fn oriented(&self, first: (usize, usize), second: (usize, usize)) -> Result<Self> {
        for cand in [self.clone(), self.reversed()] {
            let n = cand.len();
            for s in 0..n {
                let e1 = cand.edges[(s + 1) % n].pair;
                let e2 = cand.edges[(s + 2) % n].pair;
                if e1 == Some(first) && e2 == Some(second) {
                    return Ok(cand.rotated(s));
                }
            }
        }
        Err(Error::Chart(format!("no vertex labeling puts walls {first:?} and {second:?} on consecutive edges")))
    }

    fn rotated(&self, s: usize) -> Self {
        let n = self.len();
        Self {
            vertices: (0..n).map(|k| self.vertices[(k + s) % n]).collect(),
            edges: (0..n).map(|k| self.edges[(k + s) % n].clone()).collect(),
            pole: self.pole,
        }
    }

    /// Same polygon traversed clockwise.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        Self {
            vertices: (0..n).map(|k| self.vertices[n - 1 - k]).collect(),
            edges: (0..n).map(|k| self.edges[(2 * n - 2 - k) % n].clone()).collect(),
            pole: self.pole,
        }
    }

    /// Interior angle at each vertex.
    pub fn angles(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|k| {
                let prev = self.edges[(k + n - 1) % n].normal;
                let next = self.edges[k].normal;
                std::f64::consts::PI - dot(prev, next).clamp(-1.0, 1.0).acos()
            })
            .collect()
    }
}

pub fn tangent_basis(p: Vec3) -> (Vec3, Vec3) {
    let trial = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(sub(trial, scale(p, dot(trial, p))));
    let e2 = cross(p, e1);
    (e1, e2)
}

fn sort_around(verts: &mut [Vec3], pole: Vec3) {
    let (e1, e2) = tangent_basis(pole);
    verts.sort_by(|a, b| {
        let ta = dot(*a, e2).atan2(dot(*a, e1));
        let tb = dot(*b, e2).atan2(dot(*b, e1));
        ta.total_cmp(&tb)
    });
}

/// Solid angle of the spherical triangle with unit-vector corners.
pub fn spherical_triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let num = dot(a, cross(b, c)).abs();
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::frame::JacobiFrame;
    use crate::geometry::system::{MassSystem, Statistics};
    use std::f64::consts::PI;

    fn sector_poly(beta: f64, word: &str) -> SphericalPolygon {
        let s = MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Boson).unwrap();
        let f = JacobiFrame::new(&s).unwrap();
        let p = BoundaryPlaneSet::new(&f, &s);
        let t = SectorTable::new(&s).unwrap();
        SphericalPolygon::from_sector(&p, &t, &t.find_by_word(word).unwrap()).unwrap()
    }

    #[test]
    fn equal_mass_areas_match_counting() {
        // 24 orderings tile the sphere equally when all masses agree
        for (w, cells) in [("AABB", 4.0), ("ABBA", 2.0), ("BAAB", 2.0), ("ABAB", 1.0)] {
            let a = sector_poly(1.0, w).area();
            assert!((a - 4.0 * PI * cells / 24.0).abs() < 1e-12, "{w}: {a}");
        }
    }

    #[test]
    fn shapes_and_angles() {
        assert_eq!(sector_poly(1.0, "AABB").len(), 4);
        assert_eq!(sector_poly(1.0, "ABAB").len(), 3);
        let angles = sector_poly(1.0, "AABB").angles();
        for a in angles {
            assert!((a - 2.0 * PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fixtures() {
        let h = SphericalPolygon::hemisphere([0.0, 0.0, 1.0]);
        assert!((h.area() - 2.0 * PI).abs() < 1e-12);
        let l = SphericalPolygon::lune([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        assert!((l.area() - PI).abs() < 1e-12);
        assert!(l.contains(normalize([1.0, 1.0, 0.3]), 0.0));
        assert!(!l.contains(normalize([-1.0, 1.0, 0.3]), 0.0));
    }

    #[test]
    fn clipping_halves_symmetric_sector() {
        let p = sector_poly(2.0, "AABB");
        // x = 0 is a mirror of the AABB sector
        let half = p.clip([1.0, 0.0, 0.0], EdgeCondition::Neumann).unwrap();
        assert!((half.area() - 0.5 * p.area()).abs() < 1e-12);
        assert!(half.edges.iter().any(|e| e.condition == EdgeCondition::Neumann));
    }

    #[test]
    fn orientation_puts_requested_walls_in_place() {
        let p = sector_poly(3.0, "AABB").oriented((0, 2), (0, 3)).unwrap();
        assert_eq!(p.edges[1].pair, Some((0, 2)));
        assert_eq!(p.edges[2].pair, Some((0, 3)));
    }
}
