//! Conic barrier calculus.
//!
//! Logarithmically homogeneous self-concordant barriers on a catalog of
//! cones, their conjugate shadows, primal–dual scalings, the local
//! complexity measure ξ̌ and a feasible-start predictor–corrector
//! interior-point solver built on those scalings.

pub mod barrier;
pub mod cli;
pub mod cones;
pub mod denselin;
pub mod duality;
pub mod error;
pub mod ipm;
pub mod proximity;
pub mod quadrature;
pub mod sample;
pub mod optim;
pub mod scaling;
pub mod worstcase;

pub use barrier::{Barrier, BarrierEval};
pub use cones::{Cone, ConeDescriptor};
pub use denselin::{SymMatrix, Vector};
pub use error::{Error, Result};
