//! Controllability toolkit for the bilinear Schrödinger equation on quantum graphs.
//!
//! The crate builds closed-form eigenbases on metric graphs, assembles the
//! matrix of a bounded control operator, audits spectral gap and resonance
//! hypotheses, synthesizes controls (moment problem, resonant pulses, Lie
//! closure, planar rotation factorizations) and validates them by simulating
//! the truncated dynamics.

pub mod analysis;
pub mod basis;
pub mod error;
pub mod expr;
pub mod graph;
pub mod operator;
pub mod propagator;
pub mod quadrature;
pub mod state;
pub mod synthesis;

pub use basis::{ChainClass, EigenMode, SpectralBasis};
pub use error::{Error, Result};
pub use graph::{BoundaryCondition, MetricGraph};
pub use operator::{ControlOperator, CouplingMatrix};
pub use state::QuantumState;
