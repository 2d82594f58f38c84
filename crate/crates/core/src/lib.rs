//! Numerical differential geometry and Lie theory engine.
//!
//! The crate realizes charts, smooth compatibility, tangent spaces, the
//! tangent bundle, smooth vector fields, the Lie bracket, diffeomorphism
//! groups, Lie groups, and the Lie algebra of left-invariant vector fields
//! as executable, property-testable computations.
//!
//! The calculus substrate is higher-order forward-mode differentiation:
//! every map is jet-evaluable, and an independent central finite-difference
//! oracle backs each derivative claim. Universally quantified statements
//! ("smooth on an open set", "for all group elements") are probed at
//! declared region samples plus seeded jitter, so all verdicts are
//! deterministic and reproducible.

pub mod calculus;
pub mod error;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod groups;
pub mod lie;
pub mod models;
pub mod tangent;
pub mod tol;

pub use error::{Error, Result};
