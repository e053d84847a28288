//! Opening-book construction from PGN collections and similarity measures
//! between two books over a suite of test positions.

pub mod book;
pub mod chess;
pub mod measures;
pub mod pgn;
pub mod plot;
pub mod report;
pub mod stats;
pub mod suite;
