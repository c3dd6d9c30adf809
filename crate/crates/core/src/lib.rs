//! Minimum volume covering ellipsoids of tall point sets through
//! leverage-score coresets.
//!
//! The workflow is: compute leverage scores of the `n x d` data matrix, keep
//! the rows that carry almost all of the leverage, solve the D-optimal design
//! dual on those rows with the Wolfe-Atwood method, and read the ellipsoid
//! off the dual solution. See the `examples/` directory for one program per
//! stage.

pub mod bench;
pub mod datagen;
pub mod error;
pub mod io;
pub mod leverage;
pub mod linalg;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{DataMatrix, SpdMatrix};
