//! JSON I/O, seeded instance generators and the subcommand pipelines behind
//! the `ncschur` binary.

pub mod json;
pub mod pipeline;
pub mod random;

pub use pipeline::{random_schur_instance, run_pipeline, Outcome, RunConfig, SUBCOMMANDS};
