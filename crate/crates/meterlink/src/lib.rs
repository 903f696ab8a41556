//! File formats, run manifests, parallel drivers and the command-line front end
//! for `meterlink-core`.

pub mod cli;
pub mod manifest;
pub mod output;
pub mod parallel;
pub mod series_io;

pub use series_io::{load_series, parse_series, LoadError, LoadOptions, TimeColumn};
