//! Construction and verification of Legendrian subvarieties of projective space.
//!
//! A subvariety `X ⊂ P(V)` is Legendrian for a symplectic form `ω` on `V` when the
//! tangent space of its affine cone is Lagrangian at every smooth point. This
//! crate checks that condition exactly at sampled points, runs the
//! hyperplane-section-and-project reduction (and its iterated coisotropic
//! version), and builds conormal lifts of projective varieties together with
//! their singularity diagnostics.

pub mod catalog;
pub mod conormal;
pub mod error;
pub mod legendrian;
pub mod linalg;
pub mod poly;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod symplectic;
pub mod variety;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use poly::MultiPoly;
pub use scalar::{Approx, Backend, Field, Precision, Rational};
pub use symplectic::SymplecticForm;
