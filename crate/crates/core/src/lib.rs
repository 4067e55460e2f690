//! Globally optimal variational paths on manifolds and Lie groups.
//!
//! Optimal reparametrization, Frenet-frame roll and speed, SO(3) / SE(3)
//! geodesic interpolation, hyperbolic half-plane geodesics, Euler-Poincare
//! dynamics, and randomized checks that candidate paths are global minimizers.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN too.

pub mod bootstrap;
pub mod error;
pub mod euler_poincare;
pub mod frenet;
pub mod hyperbolic;
pub mod io;
pub mod lie;
pub mod metric;
pub mod numeric;
pub mod reparam;
pub mod verify;

pub use error::{Error, Result};
