//! Structure-preserving model order reduction of linear port-Hamiltonian
//! systems
//!
//! ```text
//! x' = (J - D) H x + B u,    y = B^T H x
//! ```
//!
//! with Galerkin-type projection onto energy-weighted POD bases and
//! a-posteriori error bounds in the energy norm `||x||_H = sqrt(x^T H x)`.
//!
//! * [`phcore`]: system types, validation, energy norm, descriptor form.
//! * [`integrators`]: implicit midpoint and a matrix-exponential oracle.
//! * [`basisgen`]: snapshots and H-weighted POD bases.
//! * [`projection`]: pH-preserving reduction and the reduced error system.
//! * [`bounds`]: standard, ALP and hierarchical bounds, effectivities.

pub mod basisgen;
pub mod bounds;
mod error;
pub mod integrators;
pub mod phcore;
pub mod projection;

pub use error::{Error, Result};

pub use basisgen::{Basis, PodModes, SnapshotKind, SnapshotSet};
pub use bounds::{BoundSeries, EffectivityReport, Prop1Report, Prop1Status, ReducedSolution, Scheme, SeriesKind};
pub use integrators::{SolverKind, TimeGrid, Trajectory};
pub use phcore::{DescriptorPhSystem, InitialStateConvention, InputSignal, PhMatrices, PhSystem, Tolerances};
pub use projection::{ReducedInput, ReducedPhSystem};
