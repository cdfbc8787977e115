//! 2-normed-space machinery on a discretized `L^p[0,1]`.
//!
//! A [`grid::QuadratureRule`] turns `L^p[0,1]` into a weighted finite-dimensional
//! space in which the Gähler and Gunawan 2-norms, the semi-inner product `g`,
//! and the norms of bounded bilinear 2-functionals are computed. The
//! [`verify`] module checks the norm equivalences and dual-space isometries
//! between these quantities on seeded random instances.

pub mod error;
pub mod functional;
pub mod geometry;
pub mod grid;
pub mod lp;
pub mod two_norm;
pub mod verify;

pub use error::{Error, Result};
