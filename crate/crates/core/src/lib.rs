//! Interactive segmentation from crowdsourced foreground/background clicks.
//!
//! Clicks are cleaned against superpixel partitions, workers are scored on a
//! gold set, and a backend turns the surviving clicks into a binary mask.

pub mod aggregation;
pub mod backend;
pub mod candidates;
pub mod cli;
pub mod clicks;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod filtering;
pub mod imaging;
pub mod quality;
pub mod simulation;
pub mod superpixels;

pub use error::{Error, Result};
