//! File formats, parallel execution and the `blockspot` command line on
//! top of [`blockspot_core`].

pub mod checkpoint;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod image_io;
pub mod report;
pub mod toy;
pub mod vocab;

pub use error::{Error, Result};
