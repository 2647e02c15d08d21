//! Parameter-free SDP relaxations for fractional programs whose data are
//! SOS-convex semi-algebraic functions.

pub mod cli;
pub mod error;
pub mod extract;
pub mod model;
pub mod polycore;
pub mod relax;
pub mod sdpsolve;
pub mod verify;

pub use error::{Error, Result};
