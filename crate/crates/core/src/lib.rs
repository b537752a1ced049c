//! Numerical construction and certification of the supersymmetric
//! eight-vertex model on a strip and of the open XYZ chain it is tied to.
//!
//! Everything is generic over the real scalar ([`Real`], implemented for `f32`
//! and `f64`); the `*64` aliases below fix `f64`, which is what the
//! verification suites use.

pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod params;
pub mod report;
pub mod scalar;
pub mod susy;
pub mod theta;
pub mod transfer;
pub mod vertex;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Nome64 = theta::Nome<f64>;
pub type SpectralPoint64 = params::SpectralPoint<f64>;
pub type VertexWeights64 = params::VertexWeights<f64>;
pub type ChainCouplings64 = params::ChainCouplings<f64>;
pub type DenseOperator64 = linalg::DenseOperator<f64>;
pub type StateVector64 = linalg::StateVector<f64>;
pub type Covector64 = linalg::Covector<f64>;
