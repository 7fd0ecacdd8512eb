//! Temperateness and invertibility diagnostics for assembled structures.

mod invert;
mod temperate;

pub use invert::{
    invertibility_definite, invertibility_split, kernel_angle, sample_invertibility, DefiniteReport, InvertibilitySample, SplitReport,
};
pub use temperate::{temperateness, NuConstants, TemperatenessReport, UNIFORMITY_LIMIT};
