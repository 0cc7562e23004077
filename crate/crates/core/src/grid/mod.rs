//! Finite-element solver for the hyperangular problem on a geodesic mesh.

pub mod fem;
pub mod lanczos;
pub mod mesh;
pub mod solve;

pub use fem::{Csr, FemSystem};
pub use lanczos::lowest_eigenpairs;
pub use mesh::FanMesh;
pub use solve::{
    richardson_eigenvalues, solve_grid_spectrum, three_plus_one_energy, GridEstimate, GridProblem, GridSolution,
    GridSpectrum, DEFAULT_GRID_N, MIN_ORDER,
};
