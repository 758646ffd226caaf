//! r-adaptive piecewise-affine finite elements in one dimension.
//!
//! The crate minimizes the Dirichlet energy `∫ ½|u'|² + f·u` over continuous
//! piecewise-affine functions whose `n` cells may move. It provides:
//!
//! * the asymptotically optimal mesh map, obtained by equidistributing
//!   `|f|^{2/3}` ([`amf`]),
//! * joint descent over node positions and nodal values ([`gd`]),
//! * the renormalized energy gap `n²(F(u) − F(u_*))` and its limit functional
//!   ([`energy`]),
//! * an exact reference solution independent of the finite element code
//!   ([`exact`]), error norms ([`metrics`]), and experiment drivers
//!   ([`experiment`]).

pub mod amf;
pub mod energy;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod fem;
pub mod field;
pub mod gd;
pub mod mesh;
pub mod metrics;
pub mod quadrature;
pub mod svg;

pub use error::{Error, Result};
