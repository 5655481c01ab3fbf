//! Multi-group SIS epidemics with higher-order (simplicial) interactions.
//!
//! The crate covers the full workflow around these models:
//!
//! * [`model`]: validated containers for the scalar, simplicial and general
//!   higher-order SIS models, their vector fields, Jacobians and the
//!   difference decomposition `f(x) - f(x*) = D(x, x*)(x - x*)`;
//! * [`linalg`]: the nonnegative/Metzler matrix toolbox (Perron eigenpairs,
//!   spectral radii, weighted sup-norm matrix measures, Hurwitz tests);
//! * [`analysis`]: sufficient-condition classification of the
//!   `(beta1, beta2)` plane into disease-free, bistable and endemic domains,
//!   with the bistable and disease-free threshold curves;
//! * [`equilibrium`]: the monotone fixed-point iteration for endemic
//!   states, local stability and sampled contraction certificates;
//! * [`sim`]: fixed-step RK4 integration, invariance/Lyapunov monitors and
//!   empirical domain classification by basin probing;
//! * [`sweep`]: epidemic diagrams over parameter grids with CSV and SVG
//!   exports;
//! * [`generate`]: seeded random binary models;
//! * [`modelfile`]: the JSON model-file format.
//!
//! Everything numeric is generic over the scalar type through
//! [`scalar::Scalar`] (`f32` or `f64`); the `*64` aliases below fix the
//! common double-precision choice.

#![allow(clippy::needless_range_loop)] // indexed loops mirror the matrix stencils

pub mod analysis;
pub mod error;
pub mod generate;
pub mod linalg;
pub mod model;
pub mod modelfile;
pub mod scalar;
pub mod sim;
pub mod sweep;

pub use error::{Result, SisError};
pub use scalar::Scalar;

pub mod equilibrium;

/// Double-precision aliases for the core types.
pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
pub type StateVector64 = model::StateVector<f64>;
pub type SimplicialSis64 = model::SimplicialSis<f64>;
pub type SisTemplate64 = model::SisTemplate<f64>;
pub type HigherOrderSis64 = model::HigherOrderSis<f64>;
pub type ScalarSis64 = model::ScalarSis<f64>;
pub type Diagram64 = sweep::Diagram<f64>;
pub type Trajectory64 = sim::Trajectory<f64>;
