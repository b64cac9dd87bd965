//! Balls containing exactly `n` points of a quasi-finite set, in
//! finite-dimensional normed spaces.
//!
//! - [`norms`]: ℓ_p, ℓ_∞ and a three-dimensional gauge with a flat square face.
//! - [`pointset`]: finite point windows with a horizon, and grid-indexed ball counting.
//! - [`search`]: ball finders (sorted distances, and grow-and-split) with certificates.
//! - [`render`]: CSV and SVG output of unit-sphere meshes and outlines.
//! - [`sprime`]: separating perturbations of unit-vector pairs, and ℓ_∞ facet certificates.

pub mod exact;
pub mod norms;
pub mod pointset;
pub mod render;
pub mod search;
pub mod sprime;
pub mod vector;

pub use norms::{Custom3DParams, NormKind, NormSpec};
pub use pointset::{BallMode, IndexedPointSet, PointSet};
pub use search::{BallCertificate, Method, SearchConfig};
pub use vector::Vector;
