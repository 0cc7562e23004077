use serde::{Deserialize, Serialize};

use super::frame::JacobiFrame;
use super::system::{Coupling, MassSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlaneKind {
    HardWall,
    Transparent,
}

/// The contact hyperplane `q_i = q_j` in relative space.
///
/// `normal · Q = q_i - q_j` exactly, so the normal carries the length scale of the pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryPlane {
    pub pair: (usize, usize),
    pub normal: Vec<f64>,
    pub kind: PlaneKind,
}

impl BoundaryPlane {
    pub fn unit_normal(&self) -> Vec<f64> {
        let n = norm(&self.normal);
        self.normal.iter().map(|c| c / n).collect()
    }

    /// `q_i - q_j` at a relative point.
    pub fn separation(&self, rel: &[f64]) -> f64 {
        self.normal.iter().zip(rel).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryPlaneSet {
    pub dim: usize,
    pub planes: Vec<BoundaryPlane>,
}

impl BoundaryPlaneSet {
    pub fn new(frame: &JacobiFrame, sys: &MassSystem) -> Self {
        let inv = frame.inverse();
        let n = frame.n();
        let mut planes = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let normal = (0..n - 1).map(|k| inv[(i, k)] - inv[(j, k)]).collect();
                let kind = match sys.coupling(i, j) {
                    Coupling::Infinite => PlaneKind::HardWall,
                    Coupling::Zero => PlaneKind::Transparent,
                };
                planes.push(BoundaryPlane { pair: (i, j), normal, kind });
            }
        }
        Self { dim: n - 1, planes }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&BoundaryPlane> {
        let key = (i.min(j), i.max(j));
        self.planes.iter().find(|p| p.pair == key)
    }

    pub fn hard_walls(&self) -> impl Iterator<Item = &BoundaryPlane> {
        self.planes.iter().filter(|p| p.kind == PlaneKind::HardWall)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
