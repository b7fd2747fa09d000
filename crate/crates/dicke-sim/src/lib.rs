//! Lindblad dynamics of N two-level emitters coupled to a lossy cavity
//! mode, with extraction and ordering of the extremal times of relative
//! coherence, correlated emission, the entanglement witness, and
//! correlated dephasing.
//!
//! Two backends solve the same master equation:
//! - [`propagator`]: exact dense evolution in the computational basis,
//!   confined to the support subspace the dynamics can actually reach;
//! - [`dicke`]: permutation-invariant evolution over collective-spin
//!   sectors, polynomial in N.
//!
//! Start with the runnable examples (`cargo run --example <name> -p
//! dicke-sim`):
//! - `evolve_two_emitters` — one trajectory, extremal times, their order
//! - `hierarchy_across_sizes` — extremal times vs system size
//! - `scaling_fit` — ln(N)/N^α fit of the coherence peak time
//! - `entanglement_onset` — coupling threshold where the witness dips negative
//! - `backend_comparison` — exact vs collective-basis agreement
//!
//! The same capabilities are scriptable through the `dicke-sim` binary;
//! see the README for the CLI and file formats.

pub mod backend;
pub mod dicke;
pub mod error;
pub mod harness;
pub mod liouvillian;
pub mod observables;
pub mod ode;
pub mod operators;
pub mod propagator;
mod sparse;
pub mod timing;

pub use error::{Error, Result};
pub use liouvillian::{build_collapse_set, build_hamiltonian, Generator, ModelParams};
pub use observables::{ObservableSet, Quantity};
pub use operators::{HilbertDims, Operator};
pub use propagator::{
    evolve, initial_state, DensityMatrix, EvolveOptions, ObservableScope, TimeGrid,
    TrajectoryResult,
};
