//! Vertex-centred finite volume solver for one-dimensional multilayer
//! diffusion.
//!
//! A [`Problem`] describes `m` contiguous layers with their own diffusivity
//! and conductivity, Robin-type external boundaries and one interface
//! condition per internal junction (normalised to the perfect-contact form
//! `GI` or the imperfect-contact form `GII`). The pipeline is
//!
//! 1. [`discretise::build_mesh`] / [`discretise::index_unknowns`] /
//!    [`discretise::assemble`] produce the tridiagonal semi-discrete system
//!    `du/dt = A u + b`;
//! 2. [`stepper`] marches it with forward Euler, backward Euler or
//!    Crank-Nicolson;
//! 3. [`stability`] predicts the forward Euler time-step limit row by row and
//!    checks it against exact spectral radii;
//! 4. [`verify`] measures errors against a fine-grid reference and runs grid
//!    convergence studies.

pub mod cases;
pub mod discretise;
pub mod problem;
pub mod stability;
pub mod stepper;
pub mod tridiag;
pub mod verify;

pub use discretise::{
    assemble, build_mesh, index_unknowns, reconstruct_full, sample_initial, FullState, Mesh,
    NodeId, RowKind, SemiDiscreteSystem, UnknownMap,
};
pub use problem::{
    canonicalize_interface, validate, BoundarySpec, InterfaceParams, InterfaceSpec, InterfaceType,
    Layer, Problem, ProblemError, Violation,
};
pub use stability::{gershgorin_bound, spectral_verdict, table1_bounds, StabilityReport};
pub use stepper::{march, steady_state, step, MarchResult, Scheme};
pub use tridiag::{eigenvalues, principal_minors, symmetrize, thomas_solve, SymTriDiag, TriDiag};
pub use verify::{convergence_study, fine_grid_oracle, relative_error, ErrorRecord, Reference};
