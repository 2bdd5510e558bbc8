//! Synthetic multidimensional clusters generated around line segments.
//!
//! Each cluster is built around a *cluster-supporting line*: a segment with a
//! center, a direction and a length. Points are first placed as projections
//! along the segment and then displaced away from it. Every stochastic stage
//! (cluster sizes, centers, line lengths, angle deltas, projection placement
//! and final point placement) can be swapped for a user function; see
//! [`engine::HookSet`].
//!
//! ```
//! use ndarray::array;
//! use segclust::{clugen, GenerationParams};
//!
//! let params = GenerationParams::new(
//!     2, 4, 200, array![1.0, 1.0], std::f64::consts::PI / 16.0,
//!     array![10.0, 10.0], 10.0, 1.5, 1.0,
//! )
//! .with_seed(42);
//! let out = clugen(&params).unwrap();
//! assert_eq!(out.points.dim(), (200, 2));
//! assert_eq!(out.sizes.iter().sum::<usize>(), 200);
//! ```
//!
//! Besides the generator the crate provides dataset merging ([`merge`]), CSV
//! and JSON serialization ([`io`]), configuration files and seeded batch runs
//! ([`config`], [`batch`]) and a small evaluation harness built on k-means and
//! the V-measure ([`evalbench`]).

pub mod batch;
pub mod config;
pub mod engine;
pub mod error;
pub mod evalbench;
pub mod io;
pub mod merge;
pub mod pointgen;
pub mod rng;
pub mod stochastics;
pub mod vecgeom;

pub use engine::{
    clugen, validate, Direction, GeneratedClusters, GenerationParams, HookSet, PointDist, ProjDist, Stage,
};
pub use error::{Error, Result, ValidationErrors};
pub use merge::{clumerge, Dataset};
pub use rng::RngState;
