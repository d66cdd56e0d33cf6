//! Allocation-only building blocks for block-level scene text spotting.
//!
//! Everything here is pure computation over in-memory values: polygon
//! geometry, block label generation by density clustering, the NS and GF
//! spotting protocols, image tokenization, and a small decoder-only
//! vision-language transformer with a unified (prefix) attention mask.
//! File formats, parallel batch evaluation and the command-line front end
//! live in the `blockspot` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod blockgen;
pub mod crop;
pub mod geometry;
mod math;
pub mod metrics;
pub mod order;
pub mod synth;
pub mod tokenizer;
pub mod uvlm;

pub use geometry::{GeometryError, Point, Polygon};
pub use tokenizer::{RasterImage, Vocab};
