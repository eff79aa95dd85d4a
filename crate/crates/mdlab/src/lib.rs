//! File formats, experiment orchestration and the `mdlab` command line
//! around [`mdlab_core`].

pub mod cli;
pub mod config;
pub mod experiment;
pub mod gamefile;
pub mod solve;
