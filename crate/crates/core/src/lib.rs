//! Certified real root isolation for zero-dimensional semi-algebraic systems.

pub mod cli;
pub mod format;
pub mod homotopy;
pub mod interval;
pub mod linalg;
pub mod poly;
pub mod semialg;
pub mod transcend;
pub mod verify;
