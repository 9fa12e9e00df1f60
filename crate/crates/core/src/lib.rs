//! Rank-one cutting-and-stacking constructions with exact correlation counting.
//!
//! A [`SpacerSchedule`] records, stage by stage, how a tower of levels is cut
//! into columns, topped with spacer levels and restacked. Everything is
//! measured inside a finite truncation tower `J`, which is treated as the
//! whole probability space, so every measure is an integer count over
//! `h_J + 1`.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration and the
//! command line runner live in the `rankone` crate.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

mod bits;
mod error;
pub mod lab;
mod measure;
pub mod oracle;
pub mod recipes;
pub mod tower;

pub use bits::BitSet;
pub use error::{Error, Result};
pub use measure::Measure;
pub use tower::{
    LevelSet, Marker, Occurrences, PositionSet, SpacerMass, SpacerSchedule, Stage,
    DEFAULT_OFFSET_BUDGET,
};
