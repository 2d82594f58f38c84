//! Pinned numerical tolerances used by the library's own contracts.
//!
//! Check-specific tolerances (probe tolerances, suite thresholds) are
//! configurable at call sites; the constants here are the fixed contracts of
//! the data types themselves.

/// Chart round trips `inv(fwd(x)) = x` and `fwd(inv(y)) = y` at samples.
pub const CHART_ROUNDTRIP: f64 = 1e-8;

/// Mutual-inverse identities in diffeomorphism checks.
pub const DIFFEO_INVERSE: f64 = 1e-8;

/// Vector-field component consistency across chart transitions at samples.
pub const FIELD_TRANSITION: f64 = 1e-8;

/// Agreement between the coordinate-formula bracket and its derivation-form
/// oracle.
pub const BRACKET_ORACLE: f64 = 1e-6;

/// Leibniz and linearity identities for derivations at a point.
pub const DERIVATION_POINTWISE: f64 = 1e-8;

/// Invertibility threshold on |det| for matrix inversion.
pub const SINGULAR_DET: f64 = 1e-12;

/// Margin δ carving the invertible-matrix region out of ambient space.
pub const GL_REGION_MARGIN: f64 = 1e-6;
