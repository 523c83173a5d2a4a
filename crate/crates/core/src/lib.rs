//! Noisy few-qubit simulation and error-mitigation core.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the precision used by the rest of
//! the workspace.

pub mod accumulate;
pub mod baselines;
pub mod circuit;
pub mod error;
pub mod metrics;
pub mod noise;
pub mod pauli;
pub mod scalar;
pub mod sim;

pub use error::{CoreError, Result};
pub use scalar::Scalar;

pub type PauliChannel64 = pauli::PauliChannel<f64>;
pub type Ptm64 = pauli::Ptm<f64>;
pub type ChoiMatrix64 = pauli::ChoiMatrix<f64>;
pub type MndResult64 = pauli::MndResult<f64>;
