//! Path integration over Gaussian measures.
//!
//! The pipeline truncates the eigenexpansion of the covariance operator to a
//! finite dimension, replaces the finite-dimensional Gaussian integral by the
//! mean over a product grid of equal-probability quantile nodes, and then
//! estimates that mean either classically or with a simulated quantum
//! summation (amplitude estimation) routine that tallies queries and qubits
//! exactly.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod grid;
pub mod integrate;
pub mod measure;
pub mod oracle;
pub mod probit;
pub mod qae;
pub mod sum;
pub mod truncate;

pub use baselines::{monte_carlo, predict_resources, ComplexityRow};
pub use error::{Error, Result};
pub use grid::CurberaGrid;
pub use integrate::{integrate, Method, PipelineConfig, PipelineReport, Splits};
pub use measure::EigenSpectrum;
pub use oracle::{Integrand, SummandOracle};
pub use qae::{qsum, QaeMode, QaeResult, SumSource};
pub use truncate::SmoothnessClass;
