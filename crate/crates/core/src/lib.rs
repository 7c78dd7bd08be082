//! Sparse projected averaged regression for generalized linear models.

pub mod cv;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod family;
pub mod io;
mod linalg;
pub mod metrics;
pub mod projection;
pub mod ridge;
pub mod screening;
pub mod sim;
pub mod rng;

pub use ensemble::{spar_fit, PredictKind, SparConfig, SparModel};
pub use error::{Result, SparError};
pub use family::{Family, FamilyLink, Link};
