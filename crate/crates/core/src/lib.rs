//! Point-process workbench: finite simple patterns, the insertion / deletion /
//! restriction operators, samplers for lattice-type and Poisson processes,
//! Gaussian analytic function zeros, one- and two-colour stable matching,
//! Boolean continuum percolation, and low-fluctuation diagnostics.
//!
//! Every random quantity is a pure function of an [`RngSpec`], so identical
//! inputs reproduce bit-identical outputs.

pub mod diagnostics;
pub mod error;
pub mod gaf;
pub mod generators;
pub mod geometry;
pub mod matching;
pub mod ops;
pub mod pattern;
pub mod percolation;
pub mod region;
pub mod rng;
pub mod spatial;
pub mod stats;

pub use error::{Error, Result};
pub use generators::{GeneratorSpec, PerturbationSpec, Process};
pub use geometry::{distance, Metric, MetricKind, Window};
pub use ops::{delete_points, insert_uniform, restrict, superpose, PointSelector};
pub use pattern::{Label, PointPattern};
pub use region::{Region, Shape};
pub use rng::RngSpec;
