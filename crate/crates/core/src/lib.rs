//! Feature linearization for high-dimensional functional data.
//!
//! A compressing feature `g: R^p -> R` is linearized at the training column
//! mean and rescaled into *feature coefficients*, which are then compared
//! with ridge and PLS regression solution paths:
//!
//! * [`dataset`]: loading, synthesizing, centering and splitting curves
//! * [`features`]: features over a generic scalar, forward-mode gradients
//! * [`linearization`]: Taylor linearization and the slope correction
//! * [`regression`]: SVD-backed ridge paths and NIPALS PLS1
//! * [`path_analysis`]: closest path point and nullspace diagnostics
//! * [`model_selection`]: k-fold CV with min and one-SE rules
//! * [`casestudy`]: the end-to-end pipeline behind the `linfeat` binary

pub mod casestudy;
pub mod dataset;
pub mod error;
pub mod features;
pub mod fmt;
pub mod io;
pub mod linearization;
pub mod model_selection;
pub mod path_analysis;
pub mod regression;

pub use error::{Error, ErrorKind, Result};
