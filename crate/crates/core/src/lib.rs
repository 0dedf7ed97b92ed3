//! Exact periodic triangulations of real tori, strongly convex cocycle
//! functions on them, and equidistribution experiments for piecewise Haar
//! measures.
//!
//! All geometry is exact over [`Rational`]. Parallel loops use rayon when the
//! `parallel` feature (on by default) is enabled and run sequentially
//! otherwise; results are identical in both modes.

pub mod complex;
pub mod equidist;
pub mod error;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod measure;
pub mod paf;
pub mod parallel;
pub mod rational;

pub use complex::{PeriodicComplex, Simplex};
pub use error::{Error, Result};
pub use lattice::{Lattice, Polarization};
pub use linalg::{Matrix, RationalVector};
pub use rational::Rational;
