//! Strongly interacting, mass-imbalanced particles in a one-dimensional harmonic trap.
//!
//! With every pairwise coupling either zero or infinite, the relative motion separates in
//! hyperspherical coordinates: the hard-core conditions become Dirichlet walls on the unit sphere
//! of relative space, and the trap only affects the hyperradius. The crate builds that geometry,
//! solves the angular problem on each ordering sector (a spectral Galerkin solver and an
//! independent finite-element oracle), attaches radial and center-of-mass states, and evaluates
//! densities, pair correlations and momentum distributions.
//!
//! Units: `ħ = ω = 1`, lengths in the oscillator length of the reference mass `mu`.

pub mod error;
pub mod geometry;
pub mod grid;
pub mod observables;
pub mod quadrature;
pub mod quench;
pub mod radial;
pub mod spectral;
pub mod special;
pub mod twobody;

pub use error::{Error, Result};
pub use geometry::{
    Geometry, JacobiFrame, MassSystem, Sector, SphericalPolygon, Statistics, SymmetryGroup, SystemSpec,
};
pub use observables::{ObservableGrid, TrapState};
pub use radial::{CmState, RadialState};
pub use spectral::{AngularSolution, WedgeChart};
pub use twobody::TwoBodySolution;
