//! File formats, ASP export, benchmarks, the CLI and the HTTP service built
//! on [`goalrank_core`].

pub mod asp;
pub mod bench;
pub mod cli;
pub mod dsl;
pub mod load;
pub mod parallel;
pub mod service;

pub use goalrank_core as core;
