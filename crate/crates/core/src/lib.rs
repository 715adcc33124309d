//! Solitary waves of the Korteweg–de Vries equation on metric star graphs.
//!
//! On every edge `e` of a star graph the field obeys
//!
//! ```text
//! ∂t u = -α ∂x³ u + β ∂x u + γ u ∂x u
//! ```
//!
//! with per-edge coefficients. Incoming edges are parametrized by `(-∞, 0)`,
//! outgoing edges by `(0, ∞)`, and all of them meet at the vertex `x = 0`.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: edge coefficients, the star graph and its TOML file format.
//! - [`soliton`]: the closed-form `sech²` profile with analytic derivatives.
//! - [`phaseplane`]: the reduced first-order system, its Hamiltonian, stationary
//!   point classification and a DOPRI5 homoclinic-orbit oracle.
//! - [`krein`]: boundary-form matrices, indefinite inner products and
//!   unitarity/contractivity certificates for vertex couplings.
//! - [`coupling`]: the compatibility checklist deciding whether a graph carries
//!   a solitary wave, its corollaries, the Y-junction variant and numerical
//!   verification of the vertex conditions.
//! - [`pde`]: a method-of-lines KdV solver on truncated edges with ghost-node
//!   vertex coupling, used as an end-to-end oracle.
//! - [`io`]: deterministic number formatting and tabular writers.

// comparisons like `!(x > 0.0)` are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod coupling;
pub mod graph;
pub mod io;
pub mod krein;
pub mod pde;
pub mod phaseplane;
pub mod soliton;

mod linalg;

pub use coupling::{ConditionEntry, ConditionReport};
pub use graph::{EdgeParams, EdgeRef, Orientation, StarGraph};
pub use soliton::SolitonProfile;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
