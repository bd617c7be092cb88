//! Command-line front end for `stokes-core`.

pub mod args;
pub mod document;
pub mod parse;
pub mod run;
pub mod suites;
