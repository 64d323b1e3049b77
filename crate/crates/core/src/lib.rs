//! Year-aware name-gender inference from the SSA baby-names corpus, and
//! longitudinal analysis of women's authorship across research groups.
//!
//! The pipeline runs [`ssa`] ingestion, [`inference`] per author,
//! [`cohort`] aggregation per group and year, and [`trends`] fitting.
//! [`calibration`] chooses the year shift used by inference, and
//! [`synthetic`] produces deterministic stand-in data.

pub mod calibration;
pub mod cohort;
pub mod error;
pub mod inference;
pub mod ssa;
pub mod synthetic;
pub mod trends;

pub use error::{Error, Result};
