//! Command-line front end, CSV output and parallel drivers for the
//! optical Maxwell's demon model in `demon-core`.

pub mod cli;
pub mod experiments;
pub mod parallel;
pub mod table;
