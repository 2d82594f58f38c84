//! Calculus substrate: truncated Taylor arithmetic, jets, jet-evaluable
//! maps, a finite-difference oracle, and the numerical smoothness probe.

pub mod jet;
pub mod map;
pub mod probe;
pub mod taylor;

pub use jet::Jet;
pub use map::{
    map_add, map_compose, map_fix, map_jacobian_apply, map_mul, map_pair, map_partial, map_scale,
    map_stack, map_sub, RealMap, DEFAULT_MAX_ORDER,
};
pub use probe::{
    fd_derivative, fd_second, probe_points, smooth_on_probe, ProbeConfig, ProbeFailure,
    SmoothnessReport,
};
pub use taylor::{substitute, Ctx, Taylor};
