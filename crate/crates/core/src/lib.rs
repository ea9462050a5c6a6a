//! Butterfly factorization of the windowed discrete Fourier transform.
//!
//! The dense `K×N` kernel `exp(∓2πi ξ t)` restricted to a frequency window
//! is replaced by a chain of `L + 3` block-sparse factors built from
//! Chebyshev interpolation. The same chain doubles as the weights of a
//! complex-valued network that can be trained on windowed-transform data.

pub mod chebyshev;
pub mod complex_embed;
pub mod complexity;
pub mod dataset;
mod error;
pub mod factors;
pub mod functional;
pub mod geometry;
pub mod metrics;
pub mod operator;
pub mod oracle;
pub mod training;

pub use chebyshev::{ChebyshevGrid, GridKind, Interval};
pub use error::{Error, Result};
pub use factors::{
    butterfly_init, inflate, materialize, random_init, read_factors, write_factors, ButterflyFactors,
    InitKind, Stage, Variant,
};
pub use geometry::{ButterflyGeometry, Side};
pub use metrics::{rel_error, NormKind};
pub use num_complex::Complex64;
pub use operator::{apply, apply_batch, Workspace};
pub use oracle::{dense_kernel, oracle_apply, ComplexMatrix, ComplexVector, KernelSign};
