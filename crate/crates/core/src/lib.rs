//! Core algorithms for the curl-descent laboratory: two-layer linear
//! student-teacher networks with sign-flipped plasticity, exact Jacobian
//! stability analysis, random-matrix phase boundaries, trajectory
//! diagnostics, and gradient-flow potential audits.

extern crate blas_src;

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod net;
pub mod plot;
pub mod potential;
pub mod rmt;
pub mod stability;

pub use error::{CoreError, Result};
pub use net::{Activation, Architecture, Dataset, NetworkState, SignPattern};
