//! Constrained dominant-set clustering.
//!
//! The crate is split into a numerical engine and an image pipeline built on
//! top of it:
//!
//! * [`graph`] holds the affinity matrix type, the recursive dominant-set
//!   weights and small brute-force oracles (maximal cliques).
//! * [`dynamics`] solves `max x'Mx` over the standard simplex with replicator
//!   or infection-immunization dynamics.
//! * [`extraction`] regularizes the affinity matrix with `-alpha` on the
//!   diagonal of unconstrained vertices and peels off clusters until every
//!   constrained vertex has been captured.
//! * [`segmentation`] turns an image and a user annotation into a mask.
//! * [`eval`] has metrics, fixtures and the synthetic annotation protocols.

pub mod dynamics;
pub mod error;
pub mod eval;
pub mod extraction;
pub mod graph;
pub mod linalg;
pub mod segmentation;

pub use dynamics::{Dynamics, SimplexVector, SolverOutcome, SolverSettings};
pub use error::{Error, Result};
pub use extraction::{ConstraintSet, ExtractionResult, ExtractionSettings};
pub use graph::{AffinityMatrix, VertexSet};
pub use linalg::Matrix;
