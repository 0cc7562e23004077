//! Sine-basis Galerkin solver for the angular problem on 2+2 ordering wedges.

pub mod chart;
pub mod galerkin;
pub mod levels;
pub mod solve;

pub use chart::{chart_from_beta, xi_of_beta, SquareMotion, WedgeChart};
pub use galerkin::{assemble_galerkin, Galerkin};
pub use levels::{
    converged_sector_levels, extrapolate_large_beta, extrapolate_nmax, find_beta_critical, ordering_gap,
    representative_sectors, sector_levels, system_levels, wedge_ground, BetaCritical, Extrapolation, SectorLevel,
    DEFAULT_LADDER,
};
pub use solve::{classify_symmetry, solve_angular_spectrum, symmetry_basis, tau_of, AngularSolution, SymmetryReport, WedgeSolver};
