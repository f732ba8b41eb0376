//! Projectively flat Finsler metrics of constant flag curvature.
//!
//! The crate builds the Funk and Hilbert metrics of a strongly convex
//! domain, the Funk-type Randers metrics of the unit ball, the flat metric
//! `F + F_{x^i}(x^i - a^i)` together with its power-series generalisation,
//! and checks their curvature numerically. Every derivative comes from
//! truncated Taylor arithmetic ([`jet`]), nested as deep as the curvature
//! formulas require.

pub mod config;
pub mod curvature;
pub mod error;
pub mod geodesic;
pub mod jet;
pub mod linalg;
pub mod metric;
pub mod norm;
pub mod report;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
