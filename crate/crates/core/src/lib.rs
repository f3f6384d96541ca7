//! Tube unions, Kakeya books and the lift/projection machinery.

pub mod box_dimension;
pub mod constructions;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod intersection;
pub mod lift_project;
pub mod rng;
pub mod union_measure;

pub use error::{Error, Result};
