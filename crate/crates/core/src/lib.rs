//! Spherical t-design curves on `S^2`.
//!
//! A closed curve is a t-design curve when its normalized line integral
//! reproduces the sphere average of every polynomial of degree at most `t`.
//! This crate builds such curves (the explicit [`families`] and the
//! [`assembly`] of cap-boundary circles over design points), certifies them
//! against exact sphere moments, and uses them for reconstruction
//! ([`sampling`]) and radial quadrature on `R^3` ([`weighted`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod curve;
pub mod error;
pub mod families;
pub mod geometry;
pub mod harmonics;
pub mod points;
pub mod polynomial;
pub mod quadrature;
pub mod sampling;
pub mod weighted;

pub use error::{Error, Result};
pub use geometry::{Rotation, SphericalCap, UnitVector};
pub use polynomial::{MonomialIndex, SphericalPolynomial};
