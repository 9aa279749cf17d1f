//! Exact survival probabilities for discrete renewal risk models.
//!
//! The pipeline is: build a [`model::RiskModel`], locate the roots of the
//! step generating function inside the unit disk ([`pgf::unit_disk_roots`]),
//! solve for the initial values ([`initial_values`]) and expand them into a
//! survival table ([`survival`]). [`oracle`] holds independent checks.

pub mod dd;
pub mod error;
pub mod initial_values;
pub mod cli;
pub mod linalg;
pub mod model;
pub mod modelfile;
pub mod oracle;
pub mod pgf;
pub mod poly;
pub mod survival;

pub use error::{Error, Result};
pub use model::{ParametricDist, Pmf, RiskModel};
