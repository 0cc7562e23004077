//! Four-body wavefunctions and their one- and two-body observables.

mod estimators;
mod state;

pub use estimators::{density, momentum_distribution, pair_correlation, McOptions, MomentumGrid, ObservableGrid};
pub use state::{assemble_state, spectral_ground_state, spectral_state, AngularFunction, SupportWedge, TrapState, SYMMETRY_TOL};
