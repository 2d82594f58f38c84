//! Regions, charts, atlases/manifolds, and smoothness of maps between
//! manifolds.

pub mod chart;
pub mod manifold;
pub mod region;

pub use chart::{Chart, ChartId};
pub use manifold::{
    charts_submanifold, diff_check, diffeomorphism_check, prod_charts, smooth_compat, DiffReport,
    DiffeoReport, Manifold, SampleWitness,
};
pub use region::{Region, Sample};
