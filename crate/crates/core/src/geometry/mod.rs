//! Mass systems, Jacobi frames, contact planes and the ordering sectors they cut out.

pub mod frame;
pub mod planes;
pub mod polygon;
pub mod sectors;
pub mod symmetry;
pub mod system;
pub mod volumes;

pub use frame::JacobiFrame;
pub use planes::{BoundaryPlane, BoundaryPlaneSet, PlaneKind};
pub use polygon::{EdgeCondition, PolygonEdge, SphericalPolygon, Vec3};
pub use sectors::{classify_ordering, Classified, Sector, SectorKey, SectorTable, PLANE_TOLERANCE};
pub use symmetry::{GroupElement, SymmetryGroup};
pub use system::{Coupling, CouplingPattern, MassSystem, Particle, Statistics, SystemFile, SystemSpec};
pub use volumes::{volume_fractions, SectorFraction, VolumeTable};

use crate::error::Result;

/// Everything geometric about one mass system, built once.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub system: MassSystem,
    pub frame: JacobiFrame,
    pub planes: BoundaryPlaneSet,
    pub table: SectorTable,
    pub group: SymmetryGroup,
}

impl Geometry {
    pub fn new(system: MassSystem) -> Result<Self> {
        let frame = JacobiFrame::new(&system)?;
        let planes = BoundaryPlaneSet::new(&frame, &system);
        let table = SectorTable::new(&system)?;
        let group = SymmetryGroup::new(&system);
        Ok(Self { system, frame, planes, table, group })
    }

    pub fn sector(&self, word: &str) -> Result<Sector> {
        self.table.find_by_word(word)
    }

    pub fn polygon(&self, sector: &Sector) -> Result<SphericalPolygon> {
        SphericalPolygon::from_sector(&self.planes, &self.table, sector)
    }

    /// Relative-space unit direction to particle positions (CM at the origin).
    pub fn direction_to_q(&self, w: Vec3) -> Vec<f64> {
        self.frame.from_jacobi(&w, 0.0)
    }

    pub fn key_of_direction(&self, w: Vec3) -> SectorKey {
        self.table.key_of(&self.direction_to_q(w))
    }

    /// Relative-space 3x3 matrix of a group element.
    pub fn rotation(&self, g: &GroupElement) -> [[f64; 3]; 3] {
        let m = g.relative_matrix(&self.frame);
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[(i, j)];
            }
        }
        out
    }
}

pub fn apply3(m: &[[f64; 3]; 3], v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}
