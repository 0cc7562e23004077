use crate::error::{Error, Result};
use crate::geometry::polygon::{add, dot, normalize, scale, tangent_basis};
use crate::geometry::{Geometry, MassSystem, Sector, SphericalPolygon, Statistics, Vec3};

/// Gnomonic chart of an ordering wedge followed by a bilinear map onto the square `[-1, 1]²`.
///
/// The pole is the normalized vertex centroid, so every symmetry of the wedge fixes it and acts
/// on the square as one of its eight rigid motions. Triangles use the collapsed square with the
/// edge `u = -1` shrunk onto vertex 0. For the AABB wedge of a 2+2 system the square coordinates
/// are `(u, v) = (λ, γ)`.
#[derive(Debug, Clone)]
pub struct WedgeChart {
    pub label: String,
    pub polygon: SphericalPolygon,
    pub pole: Vec3,
    e1: Vec3,
    e2: Vec3,
    /// Chart images of the square corners `(-1,-1), (1,-1), (1,1), (-1,1)`.
    corners: [[f64; 2]; 4],
    /// Polygon vertex sitting at each square corner.
    pub corner_vertex: [usize; 4],
    pub triangle: bool,
    /// `atan √β` when built from a 2+2 mass ratio.
    pub xi: Option<f64>,
}

/// Square corners in the order used by [`WedgeChart`].
pub const SQUARE_CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Metric data of the composed map at one point of the square.
#[derive(Debug, Clone, Copy)]
pub struct ChartMetric {
    /// `|det J| J⁻¹ (I + x xᵀ) J⁻ᵀ / √s`, the stiffness tensor in square coordinates.
    pub k: [[f64; 2]; 2],
    /// `|det J| s^{-3/2}`, the area density in square coordinates.
    pub w: f64,
}

impl WedgeChart {
    pub fn new(label: impl Into<String>, polygon: SphericalPolygon) -> Result<Self> {
        let n = polygon.len();
        if !(n == 3 || n == 4) {
            return Err(Error::Chart(format!("square chart needs 3 or 4 vertices, got {n}")));
        }
        let pole = polygon.pole;
        let (e1, e2) = tangent_basis(pole);
        let corner_vertex = if n == 4 { [0, 1, 2, 3] } else { [0, 1, 2, 0] };
        let mut chart = Self {
            label: label.into(),
            polygon,
            pole,
            e1,
            e2,
            corners: [[0.0; 2]; 4],
            corner_vertex,
            triangle: n == 3,
            xi: None,
        };
        for (k, &v) in corner_vertex.iter().enumerate() {
            chart.corners[k] = chart
                .gnomonic(chart.polygon.vertices[v])
                .ok_or_else(|| Error::Chart("vertex on the chart equator".into()))?;
        }
        Ok(chart)
    }

    /// Chart of a sector of a 3D relative space.
    ///
    /// The AABB wedge of four particles is labelled so that `u = 1` is `q1 = q3` and `v = 1` is `q1 = q4`.
    pub fn for_sector(geom: &Geometry, sector: &Sector) -> Result<Self> {
        let mut poly = geom.polygon(sector)?;
        if sector.word == "AABB" && geom.system.len() == 4 {
            poly = poly.oriented((0, 2), (0, 3))?;
        }
        Self::new(sector.label(), poly)
    }

    /// Gnomonic coordinates `(a, b)` of a direction; `None` on or beyond the chart equator.
    pub fn gnomonic(&self, w: Vec3) -> Option<[f64; 2]> {
        let z = dot(w, self.pole);
        if z <= 0.0 {
            return None;
        }
        Some([dot(w, self.e1) / z, dot(w, self.e2) / z])
    }

    pub fn from_gnomonic(&self, ab: [f64; 2]) -> Vec3 {
        normalize(add(self.pole, add(scale(self.e1, ab[0]), scale(self.e2, ab[1]))))
    }

    /// Bilinear image of a square point in the gnomonic plane, with its Jacobian `∂(a,b)/∂(u,v)`.
    pub fn bilinear(&self, u: f64, v: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let c = &self.corners;
        let n = [
            0.25 * (1.0 - u) * (1.0 - v),
            0.25 * (1.0 + u) * (1.0 - v),
            0.25 * (1.0 + u) * (1.0 + v),
            0.25 * (1.0 - u) * (1.0 + v),
        ];
        let du = [-0.25 * (1.0 - v), 0.25 * (1.0 - v), 0.25 * (1.0 + v), -0.25 * (1.0 + v)];
        let dv = [-0.25 * (1.0 - u), -0.25 * (1.0 + u), 0.25 * (1.0 + u), 0.25 * (1.0 - u)];
        let mut x = [0.0; 2];
        let mut j = [[0.0; 2]; 2];
        for k in 0..4 {
            for d in 0..2 {
                x[d] += n[k] * c[k][d];
                j[d][0] += du[k] * c[k][d];
                j[d][1] += dv[k] * c[k][d];
            }
        }
        (x, j)
    }

    pub fn from_square(&self, u: f64, v: f64) -> Vec3 {
        self.from_gnomonic(self.bilinear(u, v).0)
    }

    /// Square coordinates of a direction inside the wedge.
    pub fn to_square(&self, w: Vec3) -> Option<[f64; 2]> {
        let ab = self.gnomonic(w)?;
        if self.triangle {
            // a - V0 = t (V1 - V0) + t s (V2 - V1), solved for (t, t s)
            let c = &self.corners;
            let e = [c[1][0] - c[0][0], c[1][1] - c[0][1]];
            let f = [c[2][0] - c[1][0], c[2][1] - c[1][1]];
            let d = [ab[0] - c[0][0], ab[1] - c[0][1]];
            let det = e[0] * f[1] - e[1] * f[0];
            let t = (d[0] * f[1] - d[1] * f[0]) / det;
            let ts = (e[0] * d[1] - e[1] * d[0]) / det;
            let s = if t.abs() > 1e-300 { ts / t } else { 0.5 };
            return Some([2.0 * t - 1.0, 2.0 * s - 1.0]);
        }
        let mut uv = [0.0, 0.0];
        for _ in 0..50 {
            let (x, j) = self.bilinear(uv[0], uv[1]);
            let r = [x[0] - ab[0], x[1] - ab[1]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let du = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
            let dv = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
            uv[0] -= du;
            uv[1] -= dv;
            if du.abs() + dv.abs() < 1e-15 {
                break;
            }
        }
        Some(uv)
    }

    pub fn metric(&self, u: f64, v: f64) -> ChartMetric {
        let (x, j) = self.bilinear(u, v);
        let s = 1.0 + x[0] * x[0] + x[1] * x[1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        // rows of J⁻¹ are the gradients of u and v in the gnomonic plane
        let gu = [j[1][1] / det, -j[0][1] / det];
        let gv = [-j[1][0] / det, j[0][0] / det];
        let g = |p: [f64; 2], q: [f64; 2]| {
            let px = p[0] * x[0] + p[1] * x[1];
            let qx = q[0] * x[0] + q[1] * x[1];
            p[0] * q[0] + p[1] * q[1] + px * qx
        };
        let scale = det.abs() / s.sqrt();
        ChartMetric {
            k: [[scale * g(gu, gu), scale * g(gu, gv)], [scale * g(gu, gv), scale * g(gv, gv)]],
            w: det.abs() * s.powf(-1.5),
        }
    }

    /// Finds the rigid motion of the square induced by a vertex permutation `sigma`.
    ///
    /// Returned as `(swap, su, sv)`: `(u, v) ↦ (su·u, sv·v)`, swapped first when `swap` is set.
    pub fn square_motion(&self, sigma: &[usize]) -> Option<SquareMotion> {
        for swap in [false, true] {
            for su in [1.0, -1.0] {
                for sv in [1.0, -1.0] {
                    let m = SquareMotion { swap, su, sv };
                    let ok = (0..4).all(|k| {
                        let target = m.apply(SQUARE_CORNERS[k]);
                        let kk = SQUARE_CORNERS.iter().position(|c| *c == target).unwrap_or(usize::MAX);
                        kk < 4 && self.corner_vertex[kk] == sigma[self.corner_vertex[k]]
                    });
                    if ok {
                        return Some(m);
                    }
                }
            }
        }
        None
    }
}

/// Rigid motion of `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareMotion {
    pub swap: bool,
    pub su: f64,
    pub sv: f64,
}

impl SquareMotion {
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let (a, b) = if self.swap { (p[1], p[0]) } else { (p[0], p[1]) };
        [self.su * a, self.sv * b]
    }
}

/// `ξ = atan √β`.
pub fn xi_of_beta(beta: f64) -> f64 {
    beta.sqrt().atan()
}

/// Chart of a 2+2 wedge for mass ratio `beta`.
///
/// `wedge` is a species word (`AABB`) or a full label (`ABBA/1342`). For AABB, `(u, v) = (λ, γ)`.
pub fn chart_from_beta(beta: f64, wedge: &str) -> Result<WedgeChart> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("mass ratio must be positive, got {beta}")));
    }
    let geom = Geometry::new(MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Boson)?)?;
    let sector = geom.sector(wedge)?;
    let mut chart = WedgeChart::for_sector(&geom, &sector)?;
    chart.xi = Some(xi_of_beta(beta));
    Ok(chart)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn xi_values() {
        assert!((xi_of_beta(1.0) - PI / 4.0).abs() < 1e-15);
        assert!((xi_of_beta(4.0) - 1.1071487177940904).abs() < 1e-15);
    }

    #[test]
    fn aabb_square_is_lambda_gamma() {
        for &beta in &[1.0, 2.5, 7.0] {
            let c = chart_from_beta(beta, "AABB").unwrap();
            let geom = Geometry::new(MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Boson).unwrap())
                .unwrap();
            let xi = xi_of_beta(beta);
            for &(u, v) in &[(0.3, -0.2), (-0.8, 0.55), (0.0, 0.9)] {
                let w = c.from_square(u, v);
                // λ and γ from the closed-form chart around the -z pole, a = x/z, b = y/z
                let (a, b) = (w[0] / w[2], w[1] / w[2]);
                let lam = a * xi.sin() - b * xi.cos();
                let gam = a * xi.sin() + b * xi.cos();
                assert!((lam.abs() - u.abs()).abs() < 1e-12 && (gam.abs() - v.abs()).abs() < 1e-12);
                let _ = &geom;
            }
        }
    }

    #[test]
    fn aabb_edges_are_walls() {
        let beta = 3.0;
        let c = chart_from_beta(beta, "AABB").unwrap();
        let geom =
            Geometry::new(MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Boson).unwrap()).unwrap();
        for t in [-0.7, 0.1, 0.6] {
            for (uv, pair) in [((1.0, t), (0, 2)), ((t, 1.0), (0, 3)), ((-1.0, t), (1, 3)), ((t, -1.0), (1, 2))] {
                let q = geom.direction_to_q(c.from_square(uv.0, uv.1));
                assert!((q[pair.0] - q[pair.1]).abs() < 1e-12, "{uv:?} {pair:?}");
            }
        }
    }

    #[test]
    fn square_round_trip() {
        for w in ["AABB", "ABBA", "BAAB", "ABAB"] {
            let c = chart_from_beta(2.0, w).unwrap();
            for &(u, v) in &[(0.3, -0.2), (-0.8, 0.55), (0.95, 0.9)] {
                let back = c.to_square(c.from_square(u, v)).unwrap();
                assert!((back[0] - u).abs() < 1e-12 && (back[1] - v).abs() < 1e-12, "{w}: {back:?}");
            }
        }
    }

    #[test]
    fn area_from_metric_weight() {
        // ∫ w du dv equals the solid angle of the wedge
        let rule = crate::quadrature::GaussLegendre::new(60);
        for w in ["AABB", "ABAB"] {
            let c = chart_from_beta(1.7, w).unwrap();
            let mut s = 0.0;
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                for (v, wv) in rule.nodes.iter().zip(&rule.weights) {
                    s += wu * wv * c.metric(*u, *v).w;
                }
            }
            assert!((s - c.polygon.area()).abs() < 1e-10, "{w}: {s} vs {}", c.polygon.area());
        }
    }

    #[test]
    fn lambda_gamma_measure() {
        // the weight in (λ, γ) is sin²2ξ / D^{3/2}
        let beta = 2.0;
        let c = chart_from_beta(beta, "AABB").unwrap();
        let xi = xi_of_beta(beta);
        let s2 = (2.0 * xi).sin().powi(2);
        for &(l, g) in &[(0.2, 0.3), (-0.6, 0.1), (0.9, -0.9)] {
            let d = s2 + l * l + g * g + 2.0 * l * g * (2.0 * xi).cos();
            let want = s2 / d.powf(1.5);
            assert!((c.metric(l, g).w - want).abs() < 1e-12);
        }
    }
}
