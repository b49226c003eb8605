//! Construction, verification, restriction and classification of vee-systems:
//! finite covector configurations whose logarithmic prepotential
//! `F = sum a(x)^2 log a(x)^2` solves the WDVV equations.

pub mod builders;
pub mod catalog;
pub mod veecheck;
pub mod equivalence;
pub mod error;
pub mod frobenius;
pub mod gram;
pub mod io;
pub mod linalg;
pub mod restriction;
pub mod sampling;
pub mod system;
pub mod tolerance;

pub use error::{Result, VeeError};
pub use gram::{cvee, gram, GramForm};
pub use sampling::random_regular_point;
pub use system::{canonical_direction, Covector, CovectorSystem, Point};
pub use tolerance::TolerancePolicy;
