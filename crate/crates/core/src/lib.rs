//! Steady vortex states of the extreme type-II Ginzburg-Landau equation on a
//! square, with a bordered phase condition that removes the circle-group
//! singularity, and tools to trace, classify and switch between bifurcation
//! branches in the applied field strength.

pub mod bordered;
pub mod checks;
pub mod continuation;
pub mod eigen;
pub mod error;
pub mod exec;
pub mod gauge;
pub mod glop;
pub mod grid;
pub mod guess;
pub mod linalg;
pub mod newton;
pub mod postproc;
pub mod symmetry;

pub use error::{Error, Result};
pub use gauge::LinkField;
pub use glop::{ExtendedState, ReferenceState};
pub use grid::{Grid, OrderField};
pub use newton::{newton_solve, NewtonSettings, ReferencePolicy, Solution};
pub use eigen::{leading_eigenpairs, stability, EigenSettings, StabilityInfo};
pub use symmetry::{act, isotropy, IsotropyLabel, D4};
pub use postproc::{free_energy, full_energy, vortex_census, winding_number, VortexRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
