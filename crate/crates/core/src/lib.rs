//! Exact integer engine for curved A-infinity algebras, their modules and
//! bimodules, bounding cochains, tree strata and integer homology.

pub mod ainfty;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod graded;
pub mod homology;
pub mod limits;
pub mod mc;
pub mod modcat;
pub mod trees;

pub use error::{Error, Result};
