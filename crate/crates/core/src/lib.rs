//! Sections of convex potentials near the boundary of a convex domain:
//! engulfing and separation constants, Besicovitch covering, maximal
//! functions and the induced quasi-metric structure.

pub mod covering;
pub mod directions;
pub mod engulfing;
pub mod error;
pub mod instances;
pub mod maximal;
pub mod point;
pub mod potentials;
pub mod quasimetric;
pub mod runner;
pub mod sampling;
pub mod sections;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use point::{BoundingBox, Point};
