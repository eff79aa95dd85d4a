//! Prior-free online mechanism design.
//!
//! The crate is `no_std` (it needs `alloc`). IO, configuration files and the
//! command line live in the `mdlab` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod engine;
pub mod error;
pub mod game;
pub mod impossibility;
pub mod info;
pub mod forecast;
pub mod learner;
pub mod lp;
pub mod mechanism;
pub mod oracle;
pub mod rng;
pub mod scenario;
