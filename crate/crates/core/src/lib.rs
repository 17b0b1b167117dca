//! Numerical laboratory for fully nonlinear contracting and expanding
//! curvature flows of strictly convex hypersurfaces in the Euclidean space and
//! the unit sphere, and for the differential Harnack quantities along them.

pub mod error;
pub mod flow;
pub mod geometry;
pub mod harnack;
pub mod linalg;
pub mod real;
pub mod symfunc;
pub mod verify;

pub use error::{Error, Result};
pub use real::{Dd, Real};
