//! Free additive convolution by subordination, single-ring eigenvalue
//! densities, and Monte Carlo checks of local laws for `X = U Σ V*`.

pub mod error;
pub mod freeconv;
pub mod linalg;
pub mod locallaw;
pub mod measure;
pub mod models;
pub mod numeric;
pub mod ringlaw;
pub mod rng;

pub use error::{Error, Result};
pub use measure::DiscreteMeasure;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
