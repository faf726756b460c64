//! File formats, comparison and study tooling.

pub mod case;
pub mod compare;
pub mod config;
pub mod csv;
pub mod study;
